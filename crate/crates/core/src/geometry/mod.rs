//! Metric charts, the Levi-Civita curvature pipeline and conformal rescaling.

mod charts;
mod connection;
mod curvature;
mod polynomial;

use std::sync::Arc;

pub use charts::{
    builtin_charts, chart_by_name, chart_names, s2xs2_rescaling, ConformallyFlat, Flat, Perturbed, Rescaled, S2xS2, Schwarzschild,
};
pub use connection::{Connection, covariant_derivative};
pub use curvature::{curvature_pack, weyl_from_riemann, CurvaturePack};
pub use polynomial::{ConformalScale, Polynomial};

use crate::error::{numeric, structural, Result};
use crate::jet::Jet;
use crate::linalg::JetMatrix;
use crate::tensor::{Flavor, MetricPack, TensorJet, Variance};

/// An analytic metric on a coordinate box.
pub trait MetricChart: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// `(positive, negative)` eigenvalue counts.
    fn signature(&self) -> (usize, usize);

    /// Coordinate box used for sampling, one interval per coordinate.
    fn sample_box(&self) -> Vec<(f64, f64)>;

    /// Components `g_ab` as jets of the given order about `point`.
    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>>;

    /// `g_ab` as a weight-2 tensor, checked for symmetry and nondegeneracy.
    fn metric_jet(&self, point: &[f64], order: usize) -> Result<TensorJet> {
        let n = self.dim();
        if point.len() != n {
            return Err(crate::error::Error::DimensionMismatch(point.len(), n));
        }
        let comps = self.metric_components(point, order)?;
        let g = TensorJet::new(n, vec![Variance::Down; 2], 2.0, Flavor::Conformal, comps)?;
        let asym = g.max_abs_diff(&g.permute(&[1, 0])?);
        if asym > 1e-12 * (1.0 + g.max_abs()) {
            return Err(structural(format!("{} returned a non-symmetric metric", self.name())));
        }
        let g0 = nalgebra::DMatrix::from_fn(n, n, |i, j| g.value(&[i, j]));
        let eig = g0.symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|&&l| l > 0.0).count();
        let neg = eig.iter().filter(|&&l| l < 0.0).count();
        if (pos, neg) != self.signature() {
            return Err(numeric(format!(
                "{} has signature ({pos},{neg}) at {point:?}, expected {:?}",
                self.name(),
                self.signature()
            )));
        }
        Ok(g)
    }
}

pub type ChartRef = Arc<dyn MetricChart>;

/// Metric and inverse metric at a point.
pub fn metric_pack(chart: &dyn MetricChart, point: &[f64], order: usize) -> Result<MetricPack> {
    metric_pack_from(chart.metric_jet(point, order)?)
}

pub fn metric_pack_from(g: TensorJet) -> Result<MetricPack> {
    let n = g.dim();
    let m = JetMatrix::new(n, n, g.comps().to_vec())?;
    let det = m.constant_part().determinant();
    let scale = m.constant_part().abs().max().max(1e-300);
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(n as i32) {
        return Err(numeric("metric is degenerate at the base point"));
    }
    let inv = m.inverse()?;
    let ginv = TensorJet::new(n, vec![Variance::Up; 2], -2.0, g.flavor(), inv.into_entries())?;
    Ok(MetricPack { g, ginv })
}

/// Determinant of a square matrix of jets by cofactor expansion.
pub fn jet_determinant(m: &[Jet], n: usize) -> Result<Jet> {
    if m.len() != n * n || n == 0 {
        return Err(structural("determinant of a malformed matrix"));
    }
    if n == 1 {
        return Ok(m[0].clone());
    }
    let mut acc = Jet::zero(m[0].dim(), m.iter().map(Jet::order).min().unwrap_or(0));
    for j in 0..n {
        let minor: Vec<Jet> = (1..n)
            .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| (r, c)))
            .map(|(r, c)| m[r * n + c].clone())
            .collect();
        let sub = jet_determinant(&minor, n - 1)?;
        let term = m[j].try_mul(&sub)?;
        acc = if j % 2 == 0 { acc.try_add(&term)? } else { acc.try_sub(&term)? };
    }
    Ok(acc)
}

/// Riemannian volume form `√|det g| ε_{a1..an}` of weight `n`.
pub fn volume_form(g: &TensorJet) -> Result<TensorJet> {
    let n = g.dim();
    let det = jet_determinant(g.comps(), n)?;
    let abs = if det.value() < 0.0 { det.neg() } else { det };
    let root = abs.powf(0.5)?;
    levi_civita_density(&root, n, n as f64, g.flavor())
}

/// `f · ε_{a1..an}` where `ε` is the permutation symbol.
pub fn levi_civita_density(f: &Jet, n: usize, weight: f64, flavor: Flavor) -> Result<TensorJet> {
    let zero = Jet::zero(f.dim(), f.order());
    Ok(TensorJet::from_fn(f.dim(), vec![Variance::Down; n], weight, flavor, |idx| {
        match permutation_sign(idx) {
            0 => zero.clone(),
            s => f.scale(s as f64),
        }
    }))
}

fn permutation_sign(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            match idx[i].cmp(&idx[j]) {
                std::cmp::Ordering::Equal => return 0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// `t` rescaled by `e^{wΥ}` for its weight `w`: the components of a weighted
/// tensor in the scale `e^{2Υ}g` given its components in the scale `g`.
pub fn transform_density(t: &TensorJet, upsilon: &Jet) -> Result<TensorJet> {
    let factor = upsilon.scale(t.weight()).exp()?;
    t.mul_jet(&factor)
}
