//! Named verification suites. Each one samples a chart, measures residuals
//! of a fixed list of identities and folds them into a report.

mod algebraic;
mod conformal;
mod projective;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{chart_by_name, ChartRef, ConformalScale};
use crate::harness::{aggregate, over_points, sample_points, CheckResult, Residual, VerificationReport};
use crate::np::NPScalars;

pub use algebraic::expected_map_pattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Onesol,
    Nosol,
    Proj,
    BggFlat,
    Np,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Identities, Suite::Onesol, Suite::Nosol, Suite::Proj, Suite::BggFlat, Suite::Np];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Onesol => "onesol",
            Suite::Nosol => "nosol",
            Suite::Proj => "proj",
            Suite::BggFlat => "bgg-flat",
            Suite::Np => "np",
        }
    }

    pub fn default_chart(self) -> &'static str {
        match self {
            Suite::Identities | Suite::Onesol => "s2xs2",
            Suite::Nosol => "perturbed",
            Suite::Proj => "schwarzschild",
            Suite::BggFlat => "flat",
            Suite::Np => "frame",
        }
    }

    pub fn default_order(self) -> usize {
        match self {
            Suite::Nosol => 8,
            Suite::BggFlat => 5,
            _ => 6,
        }
    }

    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Proj => 1e-6,
            Suite::BggFlat => 1e-8,
            Suite::Np => 1e-10,
            _ => 1e-7,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Structural(format!("unknown suite `{s}`")))
    }
}

/// Everything a suite run depends on. Unset fields take the suite defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub chart: Option<String>,
    pub points: usize,
    pub trials: usize,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
    /// Extra scalars for the `np` suite.
    pub psi: Option<NPScalars>,
    /// Explicit sample points; when given they replace seeded sampling.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub at: Vec<Vec<f64>>,
    /// Restricts the run to these check names; empty means all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<String>,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        SuiteConfig { suite, chart: None, points: 10, trials: 5, order: None, tol: None, seed: 0, psi: None, at: Vec::new(), only: Vec::new() }
    }

    pub fn chart_name(&self) -> String {
        self.chart.clone().unwrap_or_else(|| self.suite.default_chart().to_string())
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(self.suite.default_order())
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(self.suite.default_tol())
    }

    pub fn wants(&self, name: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|o| o == name)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Structural(m.to_string()));
        if self.points == 0 {
            return bad("at least one sample point is needed");
        }
        if self.trials == 0 {
            return bad("at least one trial per point is needed");
        }
        if self.order() < 4 {
            return bad("jet order must be at least 4");
        }
        if self.tol().is_nan() || self.tol() <= 0.0 {
            return bad("tolerance must be positive");
        }
        Ok(())
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    match cfg.suite {
        Suite::Np => algebraic::run(cfg),
        Suite::Identities => conformal::identities(cfg),
        Suite::Onesol => conformal::onesol(cfg),
        Suite::Nosol => conformal::nosol(cfg),
        Suite::BggFlat => conformal::bgg(cfg),
        Suite::Proj => projective::run(cfg),
    }
}

/// A named identity with its formula.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Check {
    pub name: &'static str,
    pub tag: &'static str,
    pub needs: Needs,
}

/// When a check can be evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Needs {
    Always,
    FourDim,
    Generic,
    OneSolution,
}

impl Needs {
    fn note(self) -> &'static str {
        match self {
            Needs::Always => "not evaluated",
            Needs::FourDim => "dimension is not four",
            Needs::Generic => "metric is not generic at any sample point",
            Needs::OneSolution => "obstruction does not vanish at any sample point",
        }
    }
}

impl Check {
    pub const fn new(name: &'static str, tag: &'static str, needs: Needs) -> Self {
        Check { name, tag, needs }
    }

    pub fn zero(&self, value: f64) -> Residual {
        Residual::zero(self.name, self.tag, value)
    }

    pub fn nonzero(&self, value: f64, threshold: f64) -> Residual {
        Residual::nonzero(self.name, self.tag, value, threshold)
    }
}

pub(crate) fn any_wanted(cfg: &SuiteConfig, checks: &[Check]) -> bool {
    checks.iter().any(|c| cfg.wants(c.name))
}

/// Residuals and per-point facts gathered at one sample point.
#[derive(Debug, Default)]
pub(crate) struct PointOutcome {
    pub residuals: Vec<Residual>,
    pub facts: BTreeMap<String, Value>,
}

impl PointOutcome {
    pub fn push(&mut self, r: Residual) {
        self.residuals.push(r);
    }

    pub fn fact(&mut self, key: &str, v: impl Serialize) {
        self.facts.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }
}

pub(crate) fn load_chart(cfg: &SuiteConfig) -> Result<ChartRef> {
    chart_by_name(&cfg.chart_name())
}

pub(crate) fn points_for(chart: &ChartRef, cfg: &SuiteConfig) -> Result<Vec<Vec<f64>>> {
    if cfg.at.is_empty() {
        return Ok(sample_points(&chart.sample_box(), cfg.points, cfg.seed, 0.8));
    }
    if let Some(p) = cfg.at.iter().find(|p| p.len() != chart.dim()) {
        return Err(Error::DimensionMismatch(chart.dim(), p.len()));
    }
    Ok(cfg.at.clone())
}

/// Three changes of scale derived from the seed, shared by all points and
/// centred at each one before use.
pub(crate) fn scales(dim: usize, seed: u64) -> Vec<ConformalScale> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(17));
    (0..3).map(|_| ConformalScale::random(dim, &mut rng)).collect()
}

pub(crate) fn run_points<F>(cfg: &SuiteConfig, points: &[Vec<f64>], f: F) -> Result<Vec<PointOutcome>>
where
    F: Fn(usize, &[f64], &mut ChaCha8Rng) -> Result<PointOutcome> + Sync,
{
    over_points(points, cfg.seed, |i, p, rng| {
        f(i, p, rng).map_err(|e| match e {
            Error::NotGeneric(m) => Error::NotGeneric(format!("{m} at point {i} {p:?}")),
            Error::Classification(m) => Error::Classification(format!("{m} at point {i} {p:?}")),
            other => other,
        })
    })
}

/// Aggregates in catalogue order; catalogue entries never measured are
/// reported as not applicable, anything measured outside it follows.
/// Fails when the `only` filter leaves nothing to report.
pub(crate) fn finish(
    cfg: &SuiteConfig,
    chart: String,
    points: Vec<Vec<f64>>,
    outcomes: Vec<PointOutcome>,
    catalogue: &[Check],
    mut summary: BTreeMap<String, Value>,
) -> Result<VerificationReport> {
    let per_point: Vec<Vec<Residual>> =
        outcomes.iter().map(|o| o.residuals.iter().filter(|r| cfg.wants(&r.name)).cloned().collect()).collect();
    let measured = aggregate(&per_point, cfg.tol());
    let mut checks: Vec<CheckResult> = catalogue
        .iter()
        .filter(|c| cfg.wants(c.name))
        .map(|c| match measured.iter().find(|m| m.name == c.name) {
            Some(m) => m.clone(),
            None => CheckResult::not_applicable(c.name, c.tag, c.needs.note()),
        })
        .collect();
    checks.extend(measured.into_iter().filter(|m| catalogue.iter().all(|c| c.name != m.name)));
    if checks.is_empty() {
        return Err(Error::Structural(format!("no check of suite `{}` matches {:?}", cfg.suite, cfg.only)));
    }
    summary.insert(
        "per_point".into(),
        Value::Array(outcomes.into_iter().map(|o| serde_json::to_value(o.facts).unwrap_or(Value::Null)).collect()),
    );
    summary.insert("order".into(), Value::from(cfg.order()));
    summary.insert("tolerance".into(), Value::from(cfg.tol()));
    Ok(VerificationReport {
        suite: cfg.suite.name().into(),
        chart,
        seed: cfg.seed,
        trials: cfg.trials,
        points,
        summary,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), Value::from(s.name()));
        }
        assert!("bgg".parse::<Suite>().is_err());
    }

    #[test]
    fn config_is_validated() {
        let mut c = SuiteConfig::new(Suite::Identities);
        assert!(c.validate().is_ok());
        c.order = Some(3);
        assert!(c.validate().is_err());
        c.order = None;
        c.tol = Some(0.0);
        assert!(c.validate().is_err());
        c.tol = None;
        c.points = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_checks_become_not_applicable() {
        const A: Check = Check::new("a", "x = 0", Needs::Always);
        const B: Check = Check::new("b", "y = 0", Needs::Generic);
        let cfg = SuiteConfig::new(Suite::Identities);
        let mut o = PointOutcome::default();
        o.push(A.zero(1e-12));
        o.push(Residual::zero("extra", "z = 0", 0.0));
        let r = finish(&cfg, "c".into(), vec![vec![0.0]], vec![o], &[A, B], BTreeMap::new()).unwrap();
        let names: Vec<_> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "extra"]);
        assert_eq!(r.checks[1].status, crate::harness::Status::NotApplicable);
        assert!(r.passed());
    }

    #[test]
    fn only_filter_selects_checks() {
        const A: Check = Check::new("a", "x = 0", Needs::Always);
        const B: Check = Check::new("b", "y = 0", Needs::Always);
        let mut cfg = SuiteConfig::new(Suite::Identities);
        cfg.only = vec!["b".into()];
        let outcome = || {
            let mut o = PointOutcome::default();
            o.push(A.zero(1.0));
            o.push(B.zero(0.0));
            o
        };
        let r = finish(&cfg, "c".into(), vec![vec![0.0]], vec![outcome()], &[A, B], BTreeMap::new()).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.passed());
        cfg.only = vec!["missing".into()];
        assert!(finish(&cfg, "c".into(), vec![vec![0.0]], vec![outcome()], &[A, B], BTreeMap::new()).is_err());
    }
}
