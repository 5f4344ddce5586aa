use std::sync::Arc;

use super::{c1, d1, d_tilde, e0, ek, h1prime, nosol_zeta_eta, cotton_variant_zeta, Classification, ConformalPoint};
use crate::error::{Error, Result};
use crate::harness::{
    length_three, onesol_equivalence, ComplexSpec, EquivalenceData, OnesolOperators, OperatorNode, SectionSampler,
};
use crate::tensor::{Bundle, Flavor, ShapeSpec, TensorJet};

type PointOp = fn(&TensorJet, &ConformalPoint) -> Result<TensorJet>;

fn node(cp: &Arc<ConformalPoint>, name: &str, src: Bundle, tgt: Bundle, order: usize, f: PointOp) -> OperatorNode {
    let cp = Arc::clone(cp);
    OperatorNode::unary(name, cp.dim(), src, tgt, order, move |x| f(x, &cp))
}

fn scalar() -> Bundle {
    Bundle::scalar(1.0)
}

fn sym0() -> Bundle {
    Bundle::sym0(1.0)
}

fn form(k: usize) -> Bundle {
    Bundle::form(k, 1.0)
}

fn single(b: Bundle) -> ShapeSpec {
    ShapeSpec::single(b)
}

/// Builds the named conformal operators at one point.
pub struct ConformalOps {
    cp: Arc<ConformalPoint>,
}

impl ConformalOps {
    pub fn new(cp: Arc<ConformalPoint>) -> Self {
        ConformalOps { cp }
    }

    pub fn point(&self) -> &ConformalPoint {
        &self.cp
    }

    pub fn dim(&self) -> usize {
        self.cp.dim()
    }

    pub fn sampler(&self, order: usize) -> SectionSampler {
        SectionSampler { dim: self.dim(), order, flavor: Flavor::Conformal, metric: Some(self.cp.metric().clone()) }
    }

    pub fn e0(&self) -> OperatorNode {
        node(&self.cp, "E0", scalar(), sym0(), 2, e0)
    }

    pub fn ek(&self, k: usize) -> OperatorNode {
        let cp = Arc::clone(&self.cp);
        let b = Bundle::hook(k, 1.0);
        let t = Bundle::hook(k + 1, 1.0);
        OperatorNode::unary(format!("E{k}"), self.dim(), b, t, 1, move |x| ek(k, x, &cp))
    }

    /// `E1` restricted to `E_(ab)0[1]`, read as a hook tensor.
    pub fn e1_on_sym0(&self) -> OperatorNode {
        node(&self.cp, "E1", sym0(), Bundle::hook(2, 1.0), 1, |x, cp| ek(1, x, cp))
    }

    pub fn d_tilde(&self, k: usize) -> OperatorNode {
        node(&self.cp, "d̃", form(k), form(k + 1), 1, d_tilde)
    }

    pub fn d1(&self) -> OperatorNode {
        node(&self.cp, "D1", form(1), sym0(), 1, d1)
    }

    pub fn c1(&self) -> OperatorNode {
        node(&self.cp, "C1", sym0(), form(1), 1, c1)
    }

    pub fn h1prime(&self) -> OperatorNode {
        node(&self.cp, "H'1", form(2), form(1), 1, h1prime)
    }
}

/// The compatibility complex of `E0` for a generic metric whose obstruction
/// vanishes, with its equivalence to the twisted de Rham complex.
pub fn build_onesol_complex(cp: Arc<ConformalPoint>, section_order: usize) -> Result<(ComplexSpec, EquivalenceData)> {
    match cp.classification() {
        Classification::OneSolutionCandidate => {}
        Classification::NotGeneric => cp.wbar().map(|_| ())?,
        Classification::NoSolution => {
            return Err(Error::Classification(format!(
                "obstruction {:e} exceeds the one-solution tolerance",
                cp.obstruction()?.obstruction_size
            )))
        }
    }
    let ops = ConformalOps::new(cp);
    let parts = OnesolOperators {
        e0: ops.e0(),
        c1: ops.c1(),
        d1: ops.d1(),
        h1prime: ops.h1prime(),
        d_tilde: (0..=ops.dim()).map(|k| ops.d_tilde(k)).collect(),
    };
    onesol_equivalence(parts, ops.sampler(section_order))
}

/// `H0 = ζ·d̃C1 + η·(D1C1 − id)`, a left inverse of `E0` when the obstruction
/// does not vanish.
pub fn nosol_left_inverse(ops: &ConformalOps) -> Result<OperatorNode> {
    let (zeta, eta) = nosol_zeta_eta(ops.point())?;
    let (c1, d1, dt1) = (ops.c1(), ops.d1(), ops.d_tilde(1));
    let n = ops.dim();
    let twisted = dt1.after(&c1)?;
    let defect = d1.after(&c1)?.minus(&OperatorNode::identity(n, single(sym0())))?;
    Ok(OperatorNode::unary("H0", n, sym0(), scalar(), 3, move |x| {
        let a = twisted.apply(std::slice::from_ref(x))?.remove(0);
        let b = defect.apply(std::slice::from_ref(x))?.remove(0);
        zeta.contract(&a, &[(0, 0), (1, 1)])?.try_add(&eta.contract(&b, &[(0, 0), (1, 1)])?)
    }))
}

/// `H0 = ζ·E1` with `ζ^{abc} Y_{cab} = 1` (dimension three).
pub fn cotton_left_inverse(ops: &ConformalOps) -> Result<OperatorNode> {
    let zeta = cotton_variant_zeta(ops.point())?;
    let e1 = ops.e1_on_sym0();
    Ok(OperatorNode::unary("H0", ops.dim(), sym0(), scalar(), 1, move |x| {
        let y = e1.apply(std::slice::from_ref(x))?.remove(0);
        zeta.contract(&y, &[(0, 0), (1, 1), (2, 2)])
    }))
}

/// The length-three compatibility complex of `E0` when it has a left
/// inverse: generic with nonvanishing obstruction, or dimension three with
/// nonvanishing Cotton tensor.
pub fn build_nosol_complex(cp: Arc<ConformalPoint>, section_order: usize) -> Result<(ComplexSpec, EquivalenceData)> {
    let ops = ConformalOps::new(cp);
    let sampler = ops.sampler(section_order);
    let h0 = if ops.dim() == 3 {
        cotton_left_inverse(&ops)?
    } else {
        match ops.point().classification() {
            Classification::NoSolution => nosol_left_inverse(&ops)?,
            Classification::NotGeneric => return Err(ops.point().wbar().unwrap_err()),
            Classification::OneSolutionCandidate => {
                return Err(Error::Classification("obstruction vanishes; E0 has no left inverse".into()))
            }
        }
    };
    length_three(ops.e0(), h0, sampler)
}
