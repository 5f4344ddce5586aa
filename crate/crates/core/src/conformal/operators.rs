use super::ConformalPoint;
use crate::error::{numeric, structural, Result};
use crate::geometry::covariant_derivative;
use crate::jet::Jet;
use crate::tensor::{cartan_project, trace_free_part, Bundle, TensorJet, Variance};

const MEMBERSHIP_TOL: f64 = 1e-8;

fn expect_rank(t: &TensorJet, rank: usize, what: &str) -> Result<()> {
    if t.rank() != rank || t.valence().iter().any(|v| *v != Variance::Down) {
        return Err(structural(format!("{what} expects a covariant rank-{rank} tensor, got {:?}", t.valence())));
    }
    Ok(())
}

fn slots(k: usize) -> Vec<usize> {
    (0..k).collect()
}

/// `(∇_(a ∇_b)0 + P_(ab)0) σ`.
pub fn e0(sigma: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(sigma, 0, "E0")?;
    let conn = &cp.pack.connection;
    let dd = covariant_derivative(&covariant_derivative(sigma, conn)?, conn)?;
    let t = dd.try_add(&cp.pack.schouten.mul_scalar(sigma)?)?;
    trace_free_part(&t.symmetrize(&[0, 1])?, cp.metric())
}

/// `(k+1) Pr ∇_[a0 τ_a1..ak]b` on `E_[a1..ak] ⊠ E_b`.
pub fn ek(k: usize, tau: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    let n = cp.dim();
    if k == 0 || k + 2 > n {
        return Err(structural(format!("E_k needs 1 ≤ k ≤ n−2, got k={k}")));
    }
    expect_rank(tau, k + 1, "E_k")?;
    let bundle = Bundle::hook(k, tau.weight());
    let off = bundle.membership_residual(tau, Some(cp.metric()))?;
    if off > MEMBERSHIP_TOL * (1.0 + tau.max_abs()) {
        return Err(structural(format!("E_{k} input is not a hook tensor (off by {off:e})")));
    }
    let d = covariant_derivative(tau, &cp.pack.connection)?;
    let alt = d.antisymmetrize(&slots(k + 1))?.scale_real((k + 1) as f64);
    cartan_project(&alt, k + 1, Some(cp.metric()))
}

/// `∇̃σ = ∇σ + Zσ`.
pub fn nabla_tilde(sigma: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(sigma, 0, "∇̃")?;
    d_tilde(sigma, cp)
}

/// `d̃τ = (k+1)(∇_[a0 τ_a1..ak] + Z_[a0 τ_a1..ak])` on `k`-forms.
pub fn d_tilde(tau: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    twisted_exterior(tau, cp.z()?, &cp.pack.connection)
}

pub(crate) fn twisted_exterior(
    tau: &TensorJet,
    z: &TensorJet,
    conn: &crate::geometry::Connection,
) -> Result<TensorJet> {
    let k = tau.rank();
    expect_rank(tau, k, "d̃")?;
    let t = covariant_derivative(tau, conn)?.try_add(&z.outer(tau)?)?;
    Ok(t.antisymmetrize(&slots(k + 1))?.scale_real((k + 1) as f64))
}

/// `D1 τ = ∇_(a τ_b)0 − Z_(a τ_b)0`.
pub fn d1(tau: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(tau, 1, "D1")?;
    let t = covariant_derivative(tau, &cp.pack.connection)?.try_sub(&cp.z()?.outer(tau)?)?;
    trace_free_part(&t.symmetrize(&[0, 1])?, cp.metric())
}

/// `C1 τ = 2 W̄^{rst}{}_a ∇_[r τ_s]t`.
pub fn c1(tau: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(tau, 2, "C1")?;
    let x = covariant_derivative(tau, &cp.pack.connection)?.antisymmetrize(&[0, 1])?.scale_real(2.0);
    cp.wbar()?.contract(&x, &[(0, 0), (1, 1), (2, 2)])
}

/// `D̄τ = Pr(∇_a − 2Z_a)τ_bc` into `E_a ⊠ E_[bc]`.
pub fn dbar(tau: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(tau, 2, "D̄")?;
    let t = covariant_derivative(tau, &cp.pack.connection)?
        .try_sub(&cp.z()?.outer(tau)?.scale_real(2.0))?;
    Bundle::hook_first(2, t.weight()).project(&t, Some(cp.metric()))
}

/// `H'1 ψ = −½ W̄^{rsp}{}_a D̄(ψ)_{prs}`.
pub fn h1prime(psi: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    let db = dbar(psi, cp)?;
    Ok(cp.wbar()?.contract(&db, &[(0, 1), (1, 2), (2, 0)])?.scale_real(-0.5))
}

/// `W̄^{rsp}{}_a [2Φ_pr τ_s + ½ (dZ)_rs τ_p]`.
pub fn cdcomp_correction(tau: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(tau, 1, "CDcomp")?;
    let ob = cp.obstruction()?;
    // Φ_pr τ_s stored as (p, r, s) -> (r, s, p)
    let a = ob.phi.outer(tau)?.permute(&[1, 2, 0])?.scale_real(2.0);
    let b = ob.dz.outer(tau)?.scale_real(0.5);
    cp.wbar()?.contract(&a.try_add(&b)?, &[(0, 0), (1, 1), (2, 2)])
}

/// `W_{abcd} ∇^d σ + Y_{cab} σ`.
pub fn weyl_gradient_term(sigma: &TensorJet, cp: &ConformalPoint) -> Result<TensorJet> {
    expect_rank(sigma, 0, "W∇σ + Yσ")?;
    let grad_up = covariant_derivative(sigma, &cp.pack.connection)?.raise(0, cp.metric())?;
    let w = cp.pack.weyl.contract(&grad_up, &[(3, 0)])?;
    let y = cp.pack.cotton.permute(&[1, 2, 0])?.mul_scalar(sigma)?;
    w.try_add(&y)
}

fn euclidean_norm_sq(t: &TensorJet) -> Result<Jet> {
    let mut acc = Jet::zero(t.dim(), t.order());
    for c in t.comps() {
        acc.add_product(c, c)?;
    }
    Ok(acc)
}

fn raise_euclidean(t: &TensorJet, scale: &Jet) -> Result<TensorJet> {
    let up = TensorJet::new(t.dim(), vec![Variance::Up; t.rank()], -t.weight(), t.flavor(), t.comps().to_vec())?;
    up.mul_jet(scale)
}

/// `(ζ, η) = (dZ, Φ) / (|dZ|² + |Φ|²)` with coordinate (Euclidean) norms, so
/// that `ζ·dZ + η·Φ = 1`.
pub fn nosol_zeta_eta(cp: &ConformalPoint) -> Result<(TensorJet, TensorJet)> {
    let ob = cp.obstruction()?;
    let norm = euclidean_norm_sq(&ob.dz)?.try_add(&euclidean_norm_sq(&ob.phi)?)?;
    if norm.value().abs() < 1e-28 {
        return Err(numeric("obstruction vanishes; no left inverse of E0 from (dZ, Φ)"));
    }
    let inv = norm.recip()?;
    let zeta = raise_euclidean(&ob.dz, &inv)?;
    let eta = raise_euclidean(&ob.phi, &inv)?;
    let one = zeta.contract(&ob.dz, &[(0, 0), (1, 1)])?.try_add(&eta.contract(&ob.phi, &[(0, 0), (1, 1)])?)?;
    let dev = one.comps()[0].add_constant(-1.0).max_abs();
    if dev > 1e-10 {
        return Err(numeric(format!("ζ·dZ + η·Φ deviates from 1 by {dev:e}")));
    }
    Ok((zeta, eta))
}

/// `ζ^{abc}` with `ζ^{abc} F_{abc} = 1` for `F_{abc} = Y_{cab}`, the
/// coefficient of `σ` in `E1∘E0(σ)` when `W = 0`.
pub fn cotton_variant_zeta(cp: &ConformalPoint) -> Result<TensorJet> {
    let f = cp.pack.cotton.permute(&[1, 2, 0])?;
    let norm = euclidean_norm_sq(&f)?;
    if norm.value().abs() < 1e-28 {
        return Err(numeric("Cotton tensor vanishes at the base point"));
    }
    let zeta = raise_euclidean(&f, &norm.recip()?)?;
    let one = zeta.contract(&f, &[(0, 0), (1, 1), (2, 2)])?;
    let dev = one.comps()[0].add_constant(-1.0).max_abs();
    if dev > 1e-10 {
        return Err(numeric(format!("ζ·Y deviates from 1 by {dev:e}")));
    }
    Ok(zeta)
}
