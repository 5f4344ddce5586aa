use super::{covariant_derivative, metric_pack_from, volume_form, Connection, MetricChart};
use crate::error::{numeric, structural, Result};
use crate::tensor::{kn_product, MetricPack, TensorJet, Variance};

const CHECK_TOL: f64 = 1e-9;

/// Levi-Civita curvature data at a point. With metric order `N`:
/// `Γ` has order `N−1`, curvature `N−2`, Cotton `N−3`.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub metric: MetricPack,
    pub connection: Connection,
    /// `R_{ab}{}^c{}_d`.
    pub riemann: TensorJet,
    /// `R_{abcd}`, third slot lowered.
    pub riemann_down: TensorJet,
    pub ricci: TensorJet,
    pub scalar: TensorJet,
    pub schouten: TensorJet,
    pub j: TensorJet,
    /// `Y_{abc} = ∇_b P_{ca} − ∇_c P_{ba}`.
    pub cotton: TensorJet,
    /// `W_{abcd}` (weight 2).
    pub weyl: TensorJet,
    /// `W_{ab}{}^c{}_d` (weight 0).
    pub weyl_mixed: TensorJet,
    pub volume: TensorJet,
}

impl CurvaturePack {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn from_metric(g: TensorJet) -> Result<Self> {
        let n = g.dim();
        if n < 3 {
            return Err(structural("conformal curvature needs dimension at least 3"));
        }
        if g.order() < 3 {
            return Err(crate::error::Error::BudgetExhausted);
        }
        let metric = metric_pack_from(g)?;
        let connection = Connection::levi_civita(&metric)?;
        let riemann = connection.riemann()?;
        let riemann_down = riemann.lower(2, &metric)?;
        let ricci = riemann.self_contract(0, 2)?;
        let scalar = ricci.trace(0, 1, Some(&metric))?;
        let j = scalar.scale_real(1.0 / (2.0 * (n as f64 - 1.0)));
        let gj = metric.g.outer(&j)?;
        let schouten = ricci.try_sub(&gj)?.scale_real(1.0 / (n as f64 - 2.0));
        let dp = covariant_derivative(&schouten, &connection)?;
        let cotton = TensorJet::try_from_fn(n, vec![Variance::Down; 3], 0.0, dp.flavor(), |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            dp.get(&[b, c, a]).try_sub(dp.get(&[c, b, a]))
        })?;
        let weyl = weyl_from_riemann(&riemann_down, &metric)?;
        let weyl_mixed = weyl.raise(2, &metric)?;
        let volume = volume_form(&metric.g)?;
        let pack = CurvaturePack {
            metric,
            connection,
            riemann,
            riemann_down,
            ricci,
            scalar,
            schouten,
            j,
            cotton,
            weyl,
            weyl_mixed,
            volume,
        };
        pack.check_invariants()?;
        Ok(pack)
    }

    /// Ricci symmetry and the first Bianchi identity.
    pub fn check_invariants(&self) -> Result<()> {
        let scale = 1.0 + self.riemann.max_abs();
        let ric_asym = self.ricci.max_abs_diff(&self.ricci.permute(&[1, 0])?);
        if ric_asym > CHECK_TOL * scale {
            return Err(numeric(format!("Ricci tensor not symmetric ({ric_asym:e})")));
        }
        let bianchi = self.riemann_down.antisymmetrize(&[0, 1, 3])?.max_abs();
        if bianchi > CHECK_TOL * scale {
            return Err(numeric(format!("first Bianchi identity fails ({bianchi:e})")));
        }
        Ok(())
    }
}

/// Totally trace-free part of a Riemann-type tensor: `R − g⊙S` with `S`
/// solved so that every trace of the result vanishes.
pub fn weyl_from_riemann(r: &TensorJet, metric: &MetricPack) -> Result<TensorJet> {
    let n = r.dim() as f64;
    // tr_{02}(g⊙S) = (n−2)S + g tr S; solve against tr_{02} R.
    let ric = r.trace(0, 2, Some(metric))?;
    let tr = ric.trace(0, 1, Some(metric))?.scale_real(1.0 / (2.0 * (n - 1.0)));
    let s = ric
        .try_sub(&metric.g.outer(&tr)?)?
        .scale_real(1.0 / (n - 2.0));
    let w = r.try_sub(&kn_product(&metric.g, &s)?)?;
    let scale = 1.0 + r.max_abs();
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (0, 1), (2, 3)] {
        let t = w.trace(i, j, Some(metric))?.max_abs();
        if t > CHECK_TOL * scale * (1.0 + metric.ginv.max_abs()) {
            return Err(numeric(format!("Weyl trace over ({i},{j}) is {t:e}")));
        }
    }
    Ok(w)
}

/// Curvature data of a chart at `point`, from a metric jet of order `metric_order`.
pub fn curvature_pack(chart: &dyn MetricChart, point: &[f64], metric_order: usize) -> Result<CurvaturePack> {
    CurvaturePack::from_metric(chart.metric_jet(point, metric_order)?)
}
