use std::sync::Arc;

use super::{c1_proj, cotton_zeta_proj, d1_proj, d_tilde_proj, e0_proj, e1_proj, h1prime_proj, ProjectivePoint};
use crate::conformal::Classification;
use crate::error::{structural, Error, Result};
use crate::harness::{length_three, onesol_equivalence, ComplexSpec, EquivalenceData, OnesolOperators, OperatorNode, SectionSampler};
use crate::tensor::{Bundle, Flavor, TensorJet};

type PointOp = fn(&TensorJet, &ProjectivePoint) -> Result<TensorJet>;

/// Builds the named projective operators at one point.
pub struct ProjectiveOps {
    pp: Arc<ProjectivePoint>,
}

impl ProjectiveOps {
    pub fn new(pp: Arc<ProjectivePoint>) -> Self {
        ProjectiveOps { pp }
    }

    pub fn point(&self) -> &ProjectivePoint {
        &self.pp
    }

    pub fn dim(&self) -> usize {
        self.pp.dim()
    }

    pub fn sampler(&self, order: usize) -> SectionSampler {
        SectionSampler { dim: self.dim(), order, flavor: Flavor::Projective, metric: None }
    }

    fn node(&self, name: &str, src: Bundle, tgt: Bundle, order: usize, f: PointOp) -> OperatorNode {
        let pp = Arc::clone(&self.pp);
        OperatorNode::unary(name, self.dim(), src, tgt, order, move |x| f(x, &pp))
    }

    pub fn e0(&self) -> OperatorNode {
        self.node("E0", Bundle::scalar(1.0), Bundle::sym(1.0), 2, e0_proj)
    }

    pub fn e1(&self) -> OperatorNode {
        self.node("E1", Bundle::sym(1.0), Bundle::hook(2, 1.0), 1, e1_proj)
    }

    pub fn d_tilde(&self, k: usize) -> OperatorNode {
        self.node("d̃", Bundle::form(k, 1.0), Bundle::form(k + 1, 1.0), 1, d_tilde_proj)
    }

    pub fn d1(&self) -> OperatorNode {
        self.node("D1", Bundle::form(1, 1.0), Bundle::sym(1.0), 1, d1_proj)
    }

    pub fn c1(&self) -> OperatorNode {
        self.node("C1", Bundle::sym(1.0), Bundle::form(1, 1.0), 1, c1_proj)
    }

    pub fn h1prime(&self) -> OperatorNode {
        self.node("H'1", Bundle::form(2, 1.0), Bundle::form(1, 1.0), 1, h1prime_proj)
    }
}

/// The projective one-solution complex (`V1 = E_(ab)[1]`) with its
/// equivalence to the `d̃` complex.
pub fn build_onesol_proj_complex(pp: Arc<ProjectivePoint>, section_order: usize) -> Result<(ComplexSpec, EquivalenceData)> {
    if pp.dim() < 3 {
        return Err(structural("the projective one-solution complex needs dimension at least 3"));
    }
    match pp.classification() {
        Classification::OneSolutionCandidate => {}
        Classification::NotGeneric => pp.wbar().map(|_| ())?,
        Classification::NoSolution => {
            return Err(Error::Classification(format!(
                "projective obstruction {:e} exceeds the one-solution tolerance",
                pp.obstruction()?.obstruction_size
            )))
        }
    }
    let ops = ProjectiveOps::new(pp);
    let parts = OnesolOperators {
        e0: ops.e0(),
        c1: ops.c1(),
        d1: ops.d1(),
        h1prime: ops.h1prime(),
        d_tilde: (0..=ops.dim()).map(|k| ops.d_tilde(k)).collect(),
    };
    onesol_equivalence(parts, ops.sampler(section_order))
}

/// Dimension two: `H0 = ζ·E1` with `ζ^{abc} Y_{cab} = 1` inverts `E0`.
pub fn build_nosol_proj_complex(pp: Arc<ProjectivePoint>, section_order: usize) -> Result<(ComplexSpec, EquivalenceData)> {
    if pp.dim() != 2 {
        return Err(structural("the projective Cotton route is for dimension two"));
    }
    let ops = ProjectiveOps::new(pp);
    let zeta = cotton_zeta_proj(ops.point())?;
    let e1 = ops.e1();
    let h0 = OperatorNode::unary("H0", 2, Bundle::sym(1.0), Bundle::scalar(1.0), 1, move |x| {
        let y = e1.apply(std::slice::from_ref(x))?.remove(0);
        zeta.contract(&y, &[(0, 0), (1, 1), (2, 2)])
    });
    length_three(ops.e0(), h0, ops.sampler(section_order))
}
