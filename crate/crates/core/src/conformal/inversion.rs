use serde::Serialize;

use crate::error::{numeric, Result};
use crate::jet::Jet;
use crate::linalg::{numeric_rank, singular_values, JetMatrix};
use crate::tensor::{indices, Bundle, Flavor, MetricPack, TensorJet, Variance};

/// Which left inverse of the Weyl contraction map was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InversionMethod {
    PreferredV,
    /// `W̄^{pqtb} = 4 W^{rspq} W_{rs}{}^{tb} / V³_r^r`, four dimensions only.
    Cubic,
    LeastSquares,
}

/// Rank data of `v^d ↦ W_{abcd} v^d` and, when injective, its left inverse.
#[derive(Debug, Clone)]
pub struct GenericityReport {
    pub rank: usize,
    pub smallest_singular: f64,
    pub det_v: f64,
    pub method: Option<InversionMethod>,
    /// Conformal: `W̄^{abcd}`. Projective: `W̄^{ab}{}_c{}^d`.
    pub wbar: Option<TensorJet>,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.wbar.is_some()
    }
}

pub const RANK_TOL: f64 = 1e-8;
const DET_V_TOL: f64 = 1e-8;
const CUBIC_TOL: f64 = 1e-8;
const INVERSE_TOL: f64 = 1e-9;

/// Rows `(a,b,c)`, columns `d`, for the given slot of `W` playing `d`.
fn contraction_matrix(w: &TensorJet, col_slot: usize) -> Result<JetMatrix> {
    let n = w.dim();
    let mut data = Vec::with_capacity(n * n * n * n);
    for row in indices(n, 3) {
        for d in 0..n {
            let mut idx = row.clone();
            idx.insert(col_slot, d);
            data.push(w.get(&idx).clone());
        }
    }
    JetMatrix::new(n * n * n, n, data)
}

fn rank_data(m: &JetMatrix) -> (usize, f64) {
    let s = singular_values(&m.constant_part());
    (numeric_rank(&s, RANK_TOL), s.last().copied().unwrap_or(0.0))
}

/// Conformal inversion from fully covariant `W_{abcd}`.
pub fn invert_weyl(w: &TensorJet, metric: &MetricPack) -> Result<GenericityReport> {
    let n = w.dim();
    let m = contraction_matrix(w, 3)?;
    let (rank, smallest) = rank_data(&m);

    let w_up = (0..4).try_fold(w.clone(), |t, s| t.raise(s, metric))?;
    // V_a^b = W_{cdea} W^{cdeb}
    let v = w.contract(&w_up, &[(0, 0), (1, 1), (2, 2)])?;
    let vm = JetMatrix::new(n, n, v.comps().to_vec())?;
    let v0 = vm.constant_part();
    let det_v = v0.determinant();

    if rank < n {
        return Ok(GenericityReport { rank, smallest_singular: smallest, det_v, method: None, wbar: None });
    }

    // |V| is quadratic in W; compare against the size of W itself, read in
    // an orthonormal frame, so that roundoff in a vanishing V does not pass
    // for invertibility and anisotropic coordinates do not hide a good V
    let scale = frame_size(w, metric).powi(2);
    let (method, wbar) = if det_v.abs() > DET_V_TOL * scale.powi(n as i32) {
        let vinv = vm.inverse()?;
        // V̄_e^d with V_a^e V̄_e^d = δ_a^d
        let vbar = TensorJet::new(n, vec![Variance::Down, Variance::Up], -v.weight(), w.flavor(), vinv.into_entries())?;
        // W̄^{abcd} = W^{abce} V̄_e^d
        let wbar = w_up.contract(&vbar, &[(3, 0)])?;
        (InversionMethod::PreferredV, wbar)
    } else if let Some(wbar) = cubic_inverse(w, &w_up, metric, scale)? {
        (InversionMethod::Cubic, wbar)
    } else {
        let l = m.left_inverse()?;
        let wbar = compose_with_projection(&l, n, w.flavor(), Some(metric), -2.0, |t| {
            Bundle::hook(2, 0.0).project(t, Some(metric))
        })?;
        (InversionMethod::LeastSquares, wbar)
    };
    check_left_inverse(&wbar, w, &[(0, 0), (1, 1), (2, 2)])?;
    Ok(GenericityReport { rank, smallest_singular: smallest, det_v, method: Some(method), wbar: Some(wbar) })
}

/// In four dimensions `W_rs^tb W^rs_pq W^pq_ta = ¼ V³_r^r δ_a^b`, so a
/// nonvanishing cubic trace gives a left inverse even when `|W|² = 0`.
fn cubic_inverse(w: &TensorJet, w_up: &TensorJet, metric: &MetricPack, scale: f64) -> Result<Option<TensorJet>> {
    if w.dim() != 4 {
        return Ok(None);
    }
    let up23 = w.raise(2, metric)?.raise(3, metric)?;
    // X^{pqtb} = W^{rspq} W_rs^tb
    let x = w_up.contract(&up23, &[(0, 0), (1, 1)])?;
    let trace = x.contract(w, &[(0, 0), (1, 1), (2, 2)])?.self_contract(0, 1)?;
    let tr = trace.get(&[]);
    if tr.value().abs() <= CUBIC_TOL * scale.powf(1.5) {
        return Ok(None);
    }
    let factor = tr.recip()?.scale(4.0);
    let raw = x.mul_jet(&factor)?;
    // X is not trace-free in its first three slots; precompose with the hook
    // projection as for least squares, which keeps W̄·W = δ
    let n = w.dim();
    let mut rows = Vec::with_capacity(n * n * n * n);
    for d in 0..n {
        for pqr in indices(n, 3) {
            rows.push(raw.get(&[pqr[0], pqr[1], pqr[2], d]).clone());
        }
    }
    let l = JetMatrix::new(n, n * n * n, rows)?;
    let wbar = compose_with_projection(&l, n, w.flavor(), Some(metric), -w.weight(), |t| {
        Bundle::hook(2, 0.0).project(t, Some(metric))
    })?;
    Ok(Some(wbar))
}

/// `max |W(e_i, e_j, e_k, e_l)|` over an orthonormal frame of `g` at the
/// base point.
fn frame_size(w: &TensorJet, metric: &MetricPack) -> f64 {
    let n = w.dim();
    let g = nalgebra::DMatrix::from_fn(n, n, |i, j| metric.g.value(&[i, j]));
    let eig = g.symmetric_eigen();
    let e = nalgebra::DMatrix::from_fn(n, n, |a, i| eig.eigenvectors[(a, i)] / eig.eigenvalues[i].abs().sqrt());
    let mut t: Vec<f64> = indices(n, 4).map(|i| w.value(&i)).collect();
    // transform one slot at a time: t[..slot..] ← Σ_a t[..a..] e^a_i
    for slot in 0..4 {
        let stride = n.pow(3 - slot as u32);
        let mut next = vec![0.0; t.len()];
        for (flat, v) in next.iter_mut().enumerate() {
            let i = (flat / stride) % n;
            let base = flat - i * stride;
            *v = (0..n).map(|a| t[base + a * stride] * e[(a, i)]).sum();
        }
        t = next;
    }
    t.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Projective inversion from `W_{ab}{}^c{}_d`; always least squares.
pub fn invert_projective_weyl(w_mixed: &TensorJet) -> Result<GenericityReport> {
    let n = w_mixed.dim();
    // rows (a, b, d), column c
    let m = contraction_matrix(w_mixed, 2)?;
    let (rank, smallest) = rank_data(&m);
    if rank < n {
        return Ok(GenericityReport { rank, smallest_singular: smallest, det_v: 0.0, method: None, wbar: None });
    }
    let l = m.left_inverse()?;
    let down = compose_with_projection(&l, n, Flavor::Projective, None, 0.0, |t| {
        Bundle::hook(2, 0.0).project(t, None)
    })?;
    // stored as (r, s, t, a); reorder to W̄^{rs}{}_a{}^t
    let wbar = relabel(&down.permute(&[0, 1, 3, 2])?, vec![Variance::Up, Variance::Up, Variance::Down, Variance::Up]);
    check_left_inverse(&wbar, w_mixed, &[(0, 0), (1, 1), (3, 3)])?;
    Ok(GenericityReport { rank, smallest_singular: smallest, det_v: 0.0, method: Some(InversionMethod::LeastSquares), wbar: Some(wbar) })
}

fn relabel(t: &TensorJet, valence: Vec<Variance>) -> TensorJet {
    TensorJet::new(t.dim(), valence, t.weight(), t.flavor(), t.comps().to_vec()).expect("same rank")
}

/// `W̄^{abcd} = Σ_{pqr} L[d][pqr] Pr(e_{abc})_{pqr}`: the least-squares inverse
/// precomposed with the hook projection, so it annihilates the complement.
fn compose_with_projection(
    l: &JetMatrix,
    n: usize,
    flavor: Flavor,
    metric: Option<&MetricPack>,
    weight: f64,
    project: impl Fn(&TensorJet) -> Result<TensorJet>,
) -> Result<TensorJet> {
    let order = match metric {
        Some(m) => m.g.order().min(l.order()),
        None => l.order(),
    };
    let mut comps = vec![Jet::zero(n, order); n * n * n * n];
    for (col, abc) in indices(n, 3).enumerate() {
        let basis = TensorJet::from_fn(n, vec![Variance::Down; 3], 0.0, flavor, |i| {
            Jet::constant(n, order, if i == abc.as_slice() { 1.0 } else { 0.0 })
        });
        let pr = project(&basis)?;
        for d in 0..n {
            let mut acc = Jet::zero(n, order);
            for (row, c) in pr.comps().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                acc.add_product(l.get(d, row), c)?;
            }
            comps[col * n + d] = acc;
        }
    }
    TensorJet::new(n, vec![Variance::Up; 4], weight, flavor, comps)
}

/// Asserts `W̄ · W = δ` over the given slot pairs.
fn check_left_inverse(wbar: &TensorJet, w: &TensorJet, pairs: &[(usize, usize)]) -> Result<()> {
    let prod = wbar.contract_raw(w, pairs)?;
    let n = w.dim();
    let mut worst: f64 = 0.0;
    for idx in indices(n, 2) {
        let c = prod.get(&idx);
        let target = if idx[0] == idx[1] { 1.0 } else { 0.0 };
        worst = worst.max(c.add_constant(-target).max_abs());
    }
    if worst > INVERSE_TOL * (1.0 + wbar.max_abs() * w.max_abs()) {
        return Err(numeric(format!("Weyl left inverse fails W̄·W = δ by {worst:e}")));
    }
    Ok(())
}
