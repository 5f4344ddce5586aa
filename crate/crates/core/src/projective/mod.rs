//! Projective analogues: special connections, their Schouten, Cotton and
//! Weyl tensors, and the projective-to-Ricci-flat operator with its complex.

mod complexes;

pub use complexes::{build_nosol_proj_complex, build_onesol_proj_complex, ProjectiveOps};

use crate::conformal::{invert_projective_weyl, Classification, GenericityReport, ONE_SOLUTION_TOL};
use crate::error::{numeric, structural, Error, Result};
use crate::geometry::{covariant_derivative, metric_pack, Connection, ConformalScale, MetricChart};
use crate::tensor::{Bundle, Flavor, TensorJet, Variance};

const CHECK_TOL: f64 = 1e-9;

/// Curvature data of a special torsion-free connection at one point.
#[derive(Debug, Clone)]
pub struct ProjectivePoint {
    pub connection: Connection,
    /// `R_{ab}{}^c{}_d`.
    pub riemann: TensorJet,
    pub ricci: TensorJet,
    /// `P_{ab} = Ric_{ab}/(n−1)`.
    pub schouten: TensorJet,
    /// `Y_{abc} = ∇_b P_{ca} − ∇_c P_{ba}`.
    pub cotton: TensorJet,
    /// `W_{ab}{}^c{}_d`.
    pub weyl: TensorJet,
    pub report: GenericityReport,
    pub obstruction: Option<ProjectiveObstruction>,
}

/// `Z_a = −W̄^{rs}{}_a{}^t Y_{trs}`, `dZ` and `Φ(Z)`.
#[derive(Debug, Clone)]
pub struct ProjectiveObstruction {
    pub z: TensorJet,
    pub dz: TensorJet,
    pub phi: TensorJet,
    pub classification: Classification,
    pub obstruction_size: f64,
}

fn delta(n: usize, order: usize) -> TensorJet {
    TensorJet::from_fn(n, vec![Variance::Up, Variance::Down], 0.0, Flavor::Projective, |i| {
        crate::jet::Jet::constant(n, order, if i[0] == i[1] { 1.0 } else { 0.0 })
    })
}

impl ProjectivePoint {
    /// Levi-Civita connection of a metric chart, optionally moved within its
    /// projective class by `Γ̂^c_ab = Γ^c_ab + δ^c_a Υ_b + δ^c_b Υ_a`.
    pub fn from_chart(
        chart: &dyn MetricChart,
        point: &[f64],
        metric_order: usize,
        change: Option<&ConformalScale>,
    ) -> Result<Self> {
        let mp = metric_pack(chart, point, metric_order)?;
        let lc = Connection::levi_civita(&mp)?;
        let lc = Connection::from_symbols(lc.gamma.with_flavor(Flavor::Projective))?;
        let conn = match change {
            Some(u) => lc.projective_change(&u.gradient(point, lc.order()))?,
            None => lc,
        };
        Self::from_connection(conn)
    }

    pub fn from_connection(connection: Connection) -> Result<Self> {
        let n = connection.dim();
        if n < 2 {
            return Err(structural("projective structures need dimension at least 2"));
        }
        if connection.order() < 2 {
            return Err(Error::BudgetExhausted);
        }
        if connection.torsion()? > CHECK_TOL {
            return Err(structural("connection has torsion"));
        }
        let riemann = connection.riemann()?;
        let ricci = riemann.self_contract(0, 2)?;
        let scale = 1.0 + riemann.max_abs();
        let asym = ricci.max_abs_diff(&ricci.permute(&[1, 0])?);
        if asym > CHECK_TOL * scale {
            return Err(structural(format!("Ricci tensor not symmetric ({asym:e}); connection is not special")));
        }
        let schouten = ricci.scale_real(1.0 / (n as f64 - 1.0));
        let dp = covariant_derivative(&schouten, &connection)?;
        let cotton = TensorJet::try_from_fn(n, vec![Variance::Down; 3], 0.0, Flavor::Projective, |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            dp.get(&[b, c, a]).try_sub(dp.get(&[c, b, a]))
        })?;
        // W_ab^c_d = R_ab^c_d − δ^c_a P_bd + δ^c_b P_ad
        // outer product is (c, a, b, d)
        let first = delta(n, schouten.order()).outer(&schouten)?.permute(&[1, 2, 0, 3])?;
        let weyl = riemann.try_sub(&first)?.try_add(&first.permute(&[1, 0, 2, 3])?)?;
        for (i, j) in [(0, 2), (1, 2), (2, 3)] {
            let t = weyl.self_contract(i, j)?.max_abs();
            if t > CHECK_TOL * scale {
                return Err(numeric(format!("projective Weyl trace ({i},{j}) is {t:e}")));
            }
        }
        let report = if n >= 3 {
            invert_projective_weyl(&weyl)?
        } else {
            GenericityReport { rank: 0, smallest_singular: 0.0, det_v: 0.0, method: None, wbar: None }
        };
        let mut pp = ProjectivePoint { connection, riemann, ricci, schouten, cotton, weyl, report, obstruction: None };
        if pp.report.is_generic() {
            pp.obstruction = Some(pp.compute_obstruction()?);
        }
        Ok(pp)
    }

    fn compute_obstruction(&self) -> Result<ProjectiveObstruction> {
        let wbar = self.wbar()?;
        let z = wbar.contract(&self.cotton, &[(0, 1), (1, 2), (3, 0)])?.neg();
        let dzz = covariant_derivative(&z, &self.connection)?;
        let dz = dzz.try_sub(&dzz.permute(&[1, 0])?)?;
        let phi = dzz.try_sub(&self.schouten)?.try_sub(&z.outer(&z)?)?.symmetrize(&[0, 1])?;
        let base = |t: &TensorJet| t.truncate(0).max_abs();
        let zn = base(&z);
        let size = base(&dz).max(base(&phi)) / (1.0 + base(&self.schouten) + zn * zn);
        let classification = if size <= ONE_SOLUTION_TOL {
            Classification::OneSolutionCandidate
        } else {
            Classification::NoSolution
        };
        Ok(ProjectiveObstruction { z, dz, phi, classification, obstruction_size: size })
    }

    pub fn dim(&self) -> usize {
        self.connection.dim()
    }

    pub fn is_generic(&self) -> bool {
        self.report.is_generic()
    }

    pub fn classification(&self) -> Classification {
        self.obstruction.as_ref().map_or(Classification::NotGeneric, |o| o.classification)
    }

    /// `W̄^{rs}{}_a{}^t`.
    pub fn wbar(&self) -> Result<&TensorJet> {
        self.report.wbar.as_ref().ok_or_else(|| {
            Error::NotGeneric(format!("projective Weyl map has rank {} < {}", self.report.rank, self.dim()))
        })
    }

    pub fn obstruction(&self) -> Result<&ProjectiveObstruction> {
        self.obstruction.as_ref().ok_or_else(|| {
            Error::NotGeneric(format!("projective Weyl map has rank {} < {}", self.report.rank, self.dim()))
        })
    }

    pub fn z(&self) -> Result<&TensorJet> {
        Ok(&self.obstruction()?.z)
    }
}

fn covariant(t: &TensorJet, rank: usize, what: &str) -> Result<()> {
    if t.rank() != rank || t.valence().iter().any(|v| *v != Variance::Down) {
        return Err(structural(format!("{what} expects a covariant rank-{rank} tensor")));
    }
    Ok(())
}

/// `(∇_a∇_b + P_ab)σ`, symmetric.
pub fn e0_proj(sigma: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    covariant(sigma, 0, "E0")?;
    let c = &pp.connection;
    let dd = covariant_derivative(&covariant_derivative(sigma, c)?, c)?;
    dd.try_add(&pp.schouten.mul_scalar(sigma)?)?.symmetrize(&[0, 1])
}

/// `2 Pr ∇_[a τ_b]c` on `E_(ab)[1]`, symmetrizations only.
pub fn e1_proj(tau: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    covariant(tau, 2, "E1")?;
    let alt = covariant_derivative(tau, &pp.connection)?.antisymmetrize(&[0, 1])?.scale_real(2.0);
    Bundle::hook(2, alt.weight()).project(&alt, None)
}

/// `−W_{ab}{}^c{}_d ∇_c σ + Y_{dab} σ`.
pub fn comp_rhs_proj(sigma: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    let grad = covariant_derivative(sigma, &pp.connection)?;
    let w = pp.weyl.contract(&grad, &[(2, 0)])?.neg();
    w.try_add(&pp.cotton.permute(&[1, 2, 0])?.mul_scalar(sigma)?)
}

pub fn d_tilde_proj(tau: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    crate::conformal::twisted_exterior(tau, pp.z()?, &pp.connection)
}

/// `∇_(a τ_b) − Z_(a τ_b)`.
pub fn d1_proj(tau: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    covariant(tau, 1, "D1")?;
    covariant_derivative(tau, &pp.connection)?.try_sub(&pp.z()?.outer(tau)?)?.symmetrize(&[0, 1])
}

/// `−2 W̄^{rs}{}_a{}^t ∇_[r τ_s]t`.
pub fn c1_proj(tau: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    covariant(tau, 2, "C1")?;
    let x = covariant_derivative(tau, &pp.connection)?.antisymmetrize(&[0, 1])?;
    Ok(pp.wbar()?.contract(&x, &[(0, 0), (1, 1), (3, 2)])?.scale_real(-2.0))
}

/// `Pr(∇_a − 2Z_a)τ_bc`, symmetrizations only.
pub fn dbar_proj(tau: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    covariant(tau, 2, "D̄")?;
    let t = covariant_derivative(tau, &pp.connection)?.try_sub(&pp.z()?.outer(tau)?.scale_real(2.0))?;
    Bundle::hook_first(2, t.weight()).project(&t, None)
}

/// `½ W̄^{rs}{}_a{}^p D̄(ψ)_{prs}`.
pub fn h1prime_proj(psi: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    let db = dbar_proj(psi, pp)?;
    Ok(pp.wbar()?.contract(&db, &[(0, 1), (1, 2), (3, 0)])?.scale_real(0.5))
}

/// `W̄^{rs}{}_a{}^p [2Φ_pr τ_s + ½ (dZ)_rs τ_p]`.
pub fn cdcomp_correction_proj(tau: &TensorJet, pp: &ProjectivePoint) -> Result<TensorJet> {
    covariant(tau, 1, "CDcomp")?;
    let ob = pp.obstruction()?;
    let a = ob.phi.outer(tau)?.permute(&[1, 2, 0])?.scale_real(2.0);
    let b = ob.dz.outer(tau)?.scale_real(0.5);
    pp.wbar()?.contract(&a.try_add(&b)?, &[(0, 0), (1, 1), (3, 2)])
}

/// `ζ^{abc}` with `ζ^{abc} Y_{cab} = 1`, Euclidean normalization.
pub fn cotton_zeta_proj(pp: &ProjectivePoint) -> Result<TensorJet> {
    let f = pp.cotton.permute(&[1, 2, 0])?;
    let mut norm = crate::jet::Jet::zero(f.dim(), f.order());
    for c in f.comps() {
        norm.add_product(c, c)?;
    }
    if norm.value().abs() < 1e-28 {
        return Err(numeric("projective Cotton tensor vanishes at the base point"));
    }
    let up = TensorJet::new(f.dim(), vec![Variance::Up; 3], 0.0, Flavor::Projective, f.comps().to_vec())?;
    up.mul_jet(&norm.recip()?)
}
