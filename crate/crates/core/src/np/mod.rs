//! Four-dimensional Lorentzian Weyl algebra in a double-null frame:
//! Newman–Penrose scalars, reconstruction, the Petrov filtration, scalar
//! invariants and the matrix of the Weyl contraction map.
//!
//! Everything here is pointwise; tensors are complex jets of order zero.

mod frame;
mod hook;

pub use frame::{BoostSpin, NullFrame};
pub use hook::{boost_shifts, genericity_rank, hook_basis, weyl_map_matrix, HOOK_BOOST_WEIGHTS, MAP_COLUMN_BOOST_WEIGHTS};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::conformal::{invert_weyl, InversionMethod};
use crate::error::{structural, Error, Result};
use crate::geometry::{curvature_pack, metric_pack_from, MetricChart};
use crate::jet::Jet;
use crate::tensor::{indices, kn_product, sym_product, Flavor, TensorJet, Variance};

const SYMMETRY_TOL: f64 = 1e-9;

/// The five complex Weyl scalars.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NPScalars(pub [C; 5]);

impl NPScalars {
    pub fn new(psi: [C; 5]) -> Self {
        NPScalars(psi)
    }

    pub fn real(psi: [f64; 5]) -> Self {
        NPScalars(psi.map(C::from))
    }

    /// Only `Ψ_k` nonzero.
    pub fn pure(k: usize, value: C) -> Self {
        let mut p = [C::new(0.0, 0.0); 5];
        p[k] = value;
        NPScalars(p)
    }

    pub fn max_abs_diff(&self, other: &NPScalars) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `16 Re(Ψ₀Ψ₄ − 4Ψ₁Ψ₃ + 3Ψ₂²)`.
    pub fn quadratic_invariant(&self) -> f64 {
        let [p0, p1, p2, p3, p4] = self.0;
        16.0 * (p0 * p4 - 4.0 * p1 * p3 + 3.0 * p2 * p2).re
    }
}

/// Frame-relative position in the vanishing filtration of the scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PetrovType {
    /// `Ψ₀ ≠ 0`: no level of the filtration holds in this frame.
    Unaligned,
    /// `Ψ₀ = 0`.
    I,
    /// `Ψ₀ = Ψ₁ = 0`.
    II,
    /// `Ψ₀ = Ψ₁ = Ψ₂ = 0`.
    III,
    /// `Ψ₀ = … = Ψ₃ = 0`.
    N,
    /// All scalars vanish.
    O,
}

pub fn petrov_classify(psi: &NPScalars, tol: f64) -> PetrovType {
    let leading_zeros = psi.0.iter().take_while(|z| z.norm() <= tol).count();
    match leading_zeros {
        0 => PetrovType::Unaligned,
        1 => PetrovType::I,
        2 => PetrovType::II,
        3 => PetrovType::III,
        4 => PetrovType::N,
        _ => PetrovType::O,
    }
}

/// Promotes the base-point value of a real covariant 4-tensor.
pub fn pointwise(w: &TensorJet) -> TensorJet<C> {
    let v = w.truncate(0).to_complex();
    let comps = v.comps().iter().map(|j| Jet::constant(4, 0, j.value())).collect();
    TensorJet::new(4, v.valence().to_vec(), v.weight(), v.flavor(), comps).expect("same shape")
}

fn eval4(w: &TensorJet<C>, v: [&[C; 4]; 4]) -> C {
    let mut s = C::new(0.0, 0.0);
    for idx in indices(4, 4) {
        let c = w.value(&idx);
        if c != C::new(0.0, 0.0) {
            s += c * v[0][idx[0]] * v[1][idx[1]] * v[2][idx[2]] * v[3][idx[3]];
        }
    }
    s
}

/// Worst violation of the Weyl symmetries, relative to `1 + max|W|`:
/// pair antisymmetries, pair exchange, the first Bianchi identity and the
/// metric trace.
pub fn weyl_symmetry_residual(w: &TensorJet<C>, f: &NullFrame) -> Result<f64> {
    if w.dim() != 4 || w.valence() != [Variance::Down; 4] {
        return Err(structural("expected a covariant 4-tensor in dimension four"));
    }
    let mut worst: f64 = 0.0;
    for [p, q, r, s] in indices(4, 4).map(|i| [i[0], i[1], i[2], i[3]]) {
        let x = w.value(&[p, q, r, s]);
        worst = worst
            .max((x + w.value(&[q, p, r, s])).norm())
            .max((x + w.value(&[p, q, s, r])).norm())
            .max((x - w.value(&[r, s, p, q])).norm())
            .max((x + w.value(&[p, r, s, q]) + w.value(&[p, s, q, r])).norm());
    }
    let trace = w.raise(0, &f.metric_pack())?.self_contract(0, 2)?;
    worst = worst.max(trace.max_abs());
    Ok(worst / (1.0 + w.max_abs()))
}

fn check_weyl(w: &TensorJet<C>, f: &NullFrame) -> Result<()> {
    let r = weyl_symmetry_residual(w, f)?;
    if r > SYMMETRY_TOL {
        return Err(structural(format!("tensor violates the Weyl symmetries by {r:e}")));
    }
    Ok(())
}

/// `Ψ₀ = −W(l,m,l,m)`, `Ψ₁ = −W(l,n,l,m)`, `Ψ₂ = −W(l,m,m̄,n)`,
/// `Ψ₃ = −W(l,n,m̄,n)`, `Ψ₄ = −W(n,m̄,n,m̄)`.
pub fn np_scalars(w: &TensorJet<C>, f: &NullFrame) -> Result<NPScalars> {
    check_weyl(w, f)?;
    let [l, n, m, mb] = f.vectors();
    Ok(NPScalars([
        -eval4(w, [&l, &m, &l, &m]),
        -eval4(w, [&l, &n, &l, &m]),
        -eval4(w, [&l, &m, &mb, &n]),
        -eval4(w, [&l, &n, &mb, &n]),
        -eval4(w, [&n, &mb, &n, &mb]),
    ]))
}

/// The Weyl tensor with the given scalars, as a sum of Kulkarni–Nomizu
/// products of symmetrized frame covectors.
pub fn reconstruct_weyl(psi: &NPScalars, f: &NullFrame) -> Result<TensorJet<C>> {
    let [l, n, m, mb] = f.covectors();
    let s = |a: &TensorJet<C>, b: &TensorJet<C>| sym_product(a, b);
    let (ll, nn, mm, mbmb) = (s(&l, &l)?, s(&n, &n)?, s(&m, &m)?, s(&mb, &mb)?);
    let (ln, lm, lmb, nm, nmb, mmb) = (s(&l, &n)?, s(&l, &m)?, s(&l, &mb)?, s(&n, &m)?, s(&n, &mb)?, s(&m, &mb)?);
    let kn = kn_product::<C>;
    let [p0, p1, p2, p3, p4] = psi.0;
    let terms: Vec<(C, TensorJet<C>)> = vec![
        (-p0, kn(&nn, &mbmb)?),
        (-p0.conj(), kn(&nn, &mm)?),
        (2.0 * p1, kn(&nn, &lmb)?.try_add(&kn(&nm, &mbmb)?)?),
        (2.0 * p1.conj(), kn(&nn, &lm)?.try_add(&kn(&nmb, &mm)?)?),
        (-(p2 + p2.conj()), kn(&ll, &nn)?.try_add(&kn(&mm, &mbmb)?)?.try_sub(&kn(&ln, &mmb)?.scale_real(2.0))?),
        (2.0 * (p2 - p2.conj()), kn(&lm, &nmb)?.try_sub(&kn(&lmb, &nm)?)?),
        (2.0 * p3.conj(), kn(&ll, &nmb)?.try_add(&kn(&lm, &mbmb)?)?),
        (2.0 * p3, kn(&ll, &nm)?.try_add(&kn(&lmb, &mm)?)?),
        (-p4.conj(), kn(&ll, &mbmb)?),
        (-p4, kn(&ll, &mm)?),
    ];
    let mut w = TensorJet::zeros(4, vec![Variance::Down; 4], 0.0, Flavor::Conformal, 0);
    for (c, t) in terms {
        w = w.try_add(&t.scale(c))?;
    }
    Ok(w.with_weight(2.0))
}

/// `|W|² = W_pqrs W^pqrs` by direct contraction.
pub fn quadratic_invariant(w: &TensorJet<C>, f: &NullFrame) -> Result<f64> {
    let g = f.metric_pack();
    let up = (0..4).try_fold(w.clone(), |t, i| t.raise(i, &g))?;
    Ok(w.contract(&up, &[(0, 0), (1, 1), (2, 2), (3, 3)])?.value(&[]).re)
}

/// Cubic Weyl polynomials: `W²_abcd = W_rsab W^rs_cd` and
/// `V³_a^b = W_rs^tb W^rs_pq W^pq_ta` with its trace.
#[derive(Debug, Clone)]
pub struct CubicInvariants {
    pub w2: TensorJet<C>,
    /// Slots `(a, b)`, valence `(Down, Up)`.
    pub v3: TensorJet<C>,
    pub trace: f64,
}

impl CubicInvariants {
    /// `max |V³_a^b − ¼ V³_r^r δ_a^b| / (1 + max|V³|)`.
    pub fn identity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in indices(4, 2) {
            let target = if idx[0] == idx[1] { 0.25 * self.trace } else { 0.0 };
            worst = worst.max((self.v3.value(&idx) - target).norm());
        }
        worst / (1.0 + self.v3.max_abs())
    }
}

pub fn cubic_invariants(w: &TensorJet<C>, f: &NullFrame) -> Result<CubicInvariants> {
    let g = f.metric_pack();
    // W^rs_pq and W_rs^tb
    let up01 = w.raise(0, &g)?.raise(1, &g)?;
    let up23 = w.raise(2, &g)?.raise(3, &g)?;
    let w2 = w.contract(&up01, &[(0, 0), (1, 1)])?;
    // X^tb_pq, then contract with W^pq_ta: slots (t, b, t', a)
    let x = up23.contract(&up01, &[(0, 0), (1, 1)])?;
    let v = x.contract(&up01, &[(2, 0), (3, 1)])?.self_contract(0, 2)?.permute(&[1, 0])?;
    let trace = v.self_contract(0, 1)?.value(&[]).re;
    Ok(CubicInvariants { w2, v3: v, trace })
}

/// What `classify` reports for a set of scalars.
#[derive(Debug, Clone, Serialize)]
pub struct WeylSummary {
    pub petrov: PetrovType,
    /// `|W|²` by contraction.
    pub weyl_squared: f64,
    /// `|W|²` from the scalars.
    pub weyl_squared_formula: f64,
    pub cubic_trace: f64,
    pub rank: usize,
    /// Left inverse chosen for the real tensor; `None` when not generic.
    pub route: Option<InversionMethod>,
}

pub fn summarize(psi: &NPScalars, f: &NullFrame, tol: f64) -> Result<WeylSummary> {
    let w = reconstruct_weyl(psi, f)?;
    let cubic = cubic_invariants(&w, f)?;
    let g = f.metric();
    let metric = metric_pack_from(TensorJet::from_fn(4, vec![Variance::Down; 2], 2.0, Flavor::Conformal, |i| {
        Jet::constant(4, 0, g[i[0]][i[1]])
    }))?;
    let real = TensorJet::from_fn(4, vec![Variance::Down; 4], 2.0, Flavor::Conformal, |i| Jet::constant(4, 0, w.value(i).re));
    Ok(WeylSummary {
        petrov: petrov_classify(psi, tol),
        weyl_squared: quadratic_invariant(&w, f)?,
        weyl_squared_formula: psi.quadratic_invariant(),
        cubic_trace: cubic.trace,
        rank: genericity_rank(&w, f)?,
        route: invert_weyl(&real, &metric)?.method,
    })
}

/// Weyl scalars of a Lorentzian chart at a point, in the frame built from
/// the eigenvectors of the metric there (timelike leg first, the rest in
/// eigenvalue order). Charts of signature (−+++) are read with `−g`.
pub fn chart_scalars(chart: &dyn MetricChart, point: &[f64]) -> Result<(NPScalars, NullFrame)> {
    if chart.dim() != 4 {
        return Err(Error::Classification(format!("chart `{}` is not four-dimensional", chart.name())));
    }
    let pack = curvature_pack(chart, point, 3)?;
    let g = nalgebra::Matrix4::from_fn(|i, j| pack.metric.g.value(&[i, j]));
    let negative = g.symmetric_eigen().eigenvalues.iter().filter(|&&x| x < 0.0).count();
    let sign = match negative {
        1 => -1.0,
        3 => 1.0,
        _ => return Err(Error::Classification(format!("chart `{}` is not Lorentzian at {point:?}", chart.name()))),
    };
    let gm = g * sign;
    let eig = gm.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let e: [[f64; 4]; 4] = std::array::from_fn(|k| {
        let col = order[k];
        let norm = eig.eigenvalues[col].abs().sqrt();
        std::array::from_fn(|i| eig.eigenvectors[(i, col)] / norm)
    });
    let frame = NullFrame::from_orthonormal(e, std::array::from_fn(|i| std::array::from_fn(|j| gm[(i, j)])))?;
    let w = pointwise(&pack.weyl).scale_real(sign);
    Ok((np_scalars(&w, &frame)?, frame))
}
