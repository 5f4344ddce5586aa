//! Conformally invariant operators built from the Weyl inversion.

mod complexes;
mod inversion;
mod operators;

pub use complexes::{
    build_nosol_complex, build_onesol_complex, cotton_left_inverse, nosol_left_inverse, ConformalOps,
};
pub use inversion::{invert_projective_weyl, invert_weyl, GenericityReport, InversionMethod, RANK_TOL};
pub(crate) use operators::twisted_exterior;
pub use operators::{
    c1, cdcomp_correction, cotton_variant_zeta, d1, d_tilde, dbar, e0, ek, h1prime, nabla_tilde, nosol_zeta_eta,
    weyl_gradient_term,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{covariant_derivative, CurvaturePack, MetricChart};
use crate::tensor::{MetricPack, TensorJet};

/// Outcome of the obstruction test `dZ = 0`, `Φ(Z) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    OneSolutionCandidate,
    NoSolution,
    NotGeneric,
}

/// `Z_a = W̄^{rst}{}_a Y_{trs}` with `dZ` and `Φ(Z)`.
#[derive(Debug, Clone)]
pub struct ObstructionPack {
    pub z: TensorJet,
    pub dz: TensorJet,
    pub phi: TensorJet,
    pub classification: Classification,
    /// `max(|dZ|, |Φ|) / (1 + |P| + |Z|²)`, base-point values.
    pub obstruction_size: f64,
}

pub const ONE_SOLUTION_TOL: f64 = 1e-8;

/// Everything the conformal operators need at one base point.
#[derive(Debug, Clone)]
pub struct ConformalPoint {
    pub pack: CurvaturePack,
    pub report: GenericityReport,
    /// `W̄^{rst}{}_a`.
    pub wbar: Option<TensorJet>,
    pub obstruction: Option<ObstructionPack>,
}

impl ConformalPoint {
    pub fn new(chart: &dyn MetricChart, point: &[f64], metric_order: usize) -> Result<Self> {
        Self::from_metric(chart.metric_jet(point, metric_order)?)
    }

    pub fn from_metric(g: TensorJet) -> Result<Self> {
        let pack = CurvaturePack::from_metric(g)?;
        let report = if pack.dim() >= 4 {
            invert_weyl(&pack.weyl, &pack.metric)?
        } else {
            GenericityReport { rank: 0, smallest_singular: 0.0, det_v: 0.0, method: None, wbar: None }
        };
        let wbar = match &report.wbar {
            Some(w) => Some(w.lower(3, &pack.metric)?),
            None => None,
        };
        let mut cp = ConformalPoint { pack, report, wbar, obstruction: None };
        if cp.wbar.is_some() {
            cp.obstruction = Some(obstruction_pack(&cp)?);
        }
        Ok(cp)
    }

    pub fn dim(&self) -> usize {
        self.pack.dim()
    }

    pub fn metric(&self) -> &MetricPack {
        &self.pack.metric
    }

    pub fn is_generic(&self) -> bool {
        self.wbar.is_some()
    }

    pub fn classification(&self) -> Classification {
        self.obstruction.as_ref().map_or(Classification::NotGeneric, |o| o.classification)
    }

    pub fn wbar(&self) -> Result<&TensorJet> {
        self.wbar.as_ref().ok_or_else(|| {
            Error::NotGeneric(format!("Weyl contraction map has rank {} < {}", self.report.rank, self.dim()))
        })
    }

    pub fn obstruction(&self) -> Result<&ObstructionPack> {
        self.obstruction.as_ref().ok_or_else(|| {
            Error::NotGeneric(format!("Weyl contraction map has rank {} < {}", self.report.rank, self.dim()))
        })
    }

    pub fn z(&self) -> Result<&TensorJet> {
        Ok(&self.obstruction()?.z)
    }
}

/// `Z`, `dZ = 2∇_[a Z_b]` and `Φ(Z) = ∇_(a Z_b)0 − P_(ab)0 − Z_(a Z_b)0`.
pub fn obstruction_pack(cp: &ConformalPoint) -> Result<ObstructionPack> {
    let wbar = cp.wbar()?;
    let pack = &cp.pack;
    // Z_a = W̄^{rst}_a Y_{trs}
    let z = wbar.contract(&pack.cotton, &[(0, 1), (1, 2), (2, 0)])?;
    let dzz = covariant_derivative(&z, &pack.connection)?;
    let dz = dzz.try_sub(&dzz.permute(&[1, 0])?)?;
    let zz = z.outer(&z)?;
    let raw = dzz.try_sub(&pack.schouten)?.try_sub(&zz)?;
    let phi = crate::tensor::trace_free_part(&raw.symmetrize(&[0, 1])?, &pack.metric)?;

    let base = |t: &TensorJet| t.truncate(0).max_abs();
    let zn = base(&z);
    let size = base(&dz).max(base(&phi)) / (1.0 + base(&pack.schouten) + zn * zn);
    let classification = if size <= ONE_SOLUTION_TOL {
        Classification::OneSolutionCandidate
    } else {
        Classification::NoSolution
    };
    Ok(ObstructionPack { z, dz, phi, classification, obstruction_size: size })
}
