use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use super::NullFrame;
use crate::conformal::RANK_TOL;
use crate::error::{structural, Result};
use crate::jet::Jet;
use crate::linalg::{numeric_rank, singular_values_complex};
use crate::tensor::{sym_product, wedge_product, Flavor, TensorJet, Variance};

const SPAN_TOL: f64 = 1e-9;

/// Boost weight of each hook basis element, in basis order.
pub const HOOK_BOOST_WEIGHTS: [i32; 16] = [-2, -2, -1, -1, -1, -1, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2];

/// Boost weight of the columns `(v_n, v_m̄, v_m, v_l)` of the map matrix.
pub const MAP_COLUMN_BOOST_WEIGHTS: [i32; 4] = [-1, 0, 0, 1];

/// Basis of the trace-free hook tensors `H_pqr` (`H_(pq)r = H_[pqr] = 0`),
/// grouped by boost weight.
pub fn hook_basis(f: &NullFrame) -> Result<Vec<TensorJet<C>>> {
    let [l, n, m, mb] = f.covectors();
    let s = |a: &TensorJet<C>, b: &TensorJet<C>| sym_product(a, b);
    let w = |a: &TensorJet<C>, b: &TensorJet<C>| wedge_product(a, b);
    let (ll, nn, mm, mbmb) = (s(&l, &l)?, s(&n, &n)?, s(&m, &m)?, s(&mb, &mb)?);
    let (lm, lmb, nm, nmb) = (s(&l, &m)?, s(&l, &mb)?, s(&n, &m)?, s(&n, &mb)?);
    let two = |a: TensorJet<C>, b: TensorJet<C>| a.scale_real(2.0).try_add(&b);
    Ok(vec![
        w(&nn, &mb)?,
        w(&nn, &m)?,
        w(&mbmb, &n)?,
        two(w(&nm, &mb)?, w(&nn, &l)?)?,
        two(w(&nmb, &m)?, w(&nn, &l)?)?,
        w(&mm, &n)?,
        two(w(&lmb, &n)?, w(&mbmb, &m)?)?,
        two(w(&nmb, &l)?, w(&mbmb, &m)?)?,
        two(w(&lm, &n)?, w(&mm, &mb)?)?,
        two(w(&nm, &l)?, w(&mm, &mb)?)?,
        w(&mbmb, &l)?,
        two(w(&lm, &mb)?, w(&ll, &n)?)?,
        two(w(&lmb, &m)?, w(&ll, &n)?)?,
        w(&mm, &l)?,
        w(&ll, &mb)?,
        w(&ll, &m)?,
    ])
}

fn flatten(t: &TensorJet<C>) -> DVector<C> {
    DVector::from_iterator(t.comps().len(), t.comps().iter().map(Jet::value))
}

/// Matrix of `v ↦ W_pqrs v^s` from `(v_n, v_m̄, v_m, v_l)`, where
/// `v = v_l l + v_m m + v_m̄ m̄ + v_n n`, to coordinates in [`hook_basis`].
pub fn weyl_map_matrix(w: &TensorJet<C>, f: &NullFrame) -> Result<DMatrix<C>> {
    super::check_weyl(w, f)?;
    let basis = hook_basis(f)?;
    let b = DMatrix::from_columns(&basis.iter().map(flatten).collect::<Vec<_>>());
    let qr = b.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let [l, n, m, mb] = f.vectors();
    let mut out = DMatrix::zeros(16, 4);
    for (col, v) in [n, mb, m, l].iter().enumerate() {
        let vt = TensorJet::from_fn(4, vec![Variance::Up], 0.0, Flavor::Conformal, |i| Jet::constant(4, 0, v[i[0]]));
        let y = flatten(&w.contract(&vt, &[(3, 0)])?);
        let x = r
            .solve_upper_triangular(&(q.adjoint() * &y))
            .ok_or_else(|| structural("hook basis is degenerate"))?;
        let miss = (&b * &x - &y).camax();
        if miss > SPAN_TOL * (1.0 + y.camax()) {
            return Err(structural(format!("W·v leaves the span of the hook basis by {miss:e}")));
        }
        out.set_column(col, &x);
    }
    Ok(out)
}

/// Rank of [`weyl_map_matrix`]; 4 means the contraction map is injective.
pub fn genericity_rank(w: &TensorJet<C>, f: &NullFrame) -> Result<usize> {
    let s = singular_values_complex(&weyl_map_matrix(w, f)?);
    Ok(numeric_rank(&s, RANK_TOL))
}

/// Sorted distinct `row weight − column weight` over entries above `tol`.
pub fn boost_shifts(matrix: &DMatrix<C>, tol: f64) -> Vec<i32> {
    let mut out = Vec::new();
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if matrix[(i, j)].norm() > tol {
                out.push(HOOK_BOOST_WEIGHTS[i] - MAP_COLUMN_BOOST_WEIGHTS[j]);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
