use super::TensorJet;
use crate::error::{structural, Result};
use crate::jet::Scalar;

fn expect_rank<T: Scalar>(t: &TensorJet<T>, rank: usize, what: &str) -> Result<()> {
    if t.rank() != rank || t.valence().iter().any(|v| *v != super::Variance::Down) {
        return Err(structural(format!("{what} expects a covariant rank-{rank} tensor")));
    }
    Ok(())
}

/// Kulkarni–Nomizu product
/// `(A⊙B)_{pqrs} = A_pr B_qs − A_qr B_ps − A_ps B_qr + A_qs B_pr`.
pub fn kn_product<T: Scalar>(a: &TensorJet<T>, b: &TensorJet<T>) -> Result<TensorJet<T>> {
    expect_rank(a, 2, "kn_product")?;
    expect_rank(b, 2, "kn_product")?;
    // (A⊗B)_{pr qs} reordered to pqrs
    let ab = a.outer(b)?.permute(&[0, 2, 1, 3])?;
    let ba = b.outer(a)?.permute(&[0, 2, 1, 3])?;
    let first = ab.try_add(&ba)?;
    let swapped = first.permute(&[1, 0, 2, 3])?;
    first.try_sub(&swapped)
}

/// Symmetrized product `(AB)_{pr} = A_(p B_r)`.
pub fn sym_product<T: Scalar>(a: &TensorJet<T>, b: &TensorJet<T>) -> Result<TensorJet<T>> {
    expect_rank(a, 1, "sym_product")?;
    expect_rank(b, 1, "sym_product")?;
    a.outer(b)?.symmetrize(&[0, 1])
}

/// `(A∧B)_{pqr} = A_pr B_q − A_qr B_p`.
pub fn wedge_product<T: Scalar>(a: &TensorJet<T>, b: &TensorJet<T>) -> Result<TensorJet<T>> {
    expect_rank(a, 2, "wedge_product")?;
    expect_rank(b, 1, "wedge_product")?;
    // outer gives slots (p, r, q) -> A_pr B_q
    let t = a.outer(b)?.permute(&[0, 2, 1])?;
    let swapped = t.permute(&[1, 0, 2])?;
    t.try_sub(&swapped)
}
