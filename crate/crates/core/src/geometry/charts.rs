use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ChartRef, ConformalScale, MetricChart, Polynomial};
use crate::error::{Error, Result};
use crate::jet::Jet;

fn vars(point: &[f64], order: usize) -> Vec<Jet> {
    (0..point.len()).map(|i| Jet::variable(point.len(), order, i, point[i])).collect()
}

/// Constant diagonal metric with `p` entries `+1` followed by `q` entries `−1`.
#[derive(Debug, Clone)]
pub struct Flat {
    pub positive: usize,
    pub negative: usize,
}

impl Flat {
    pub fn euclidean(dim: usize) -> Self {
        Flat { positive: dim, negative: 0 }
    }
}

impl MetricChart for Flat {
    fn name(&self) -> String {
        match (self.positive + self.negative, self.negative) {
            (4, 0) => "flat".into(),
            (n, 0) => format!("flat{n}"),
            (n, q) => format!("flat{n}-{q}"),
        }
    }

    fn dim(&self) -> usize {
        self.positive + self.negative
    }

    fn signature(&self) -> (usize, usize) {
        (self.positive, self.negative)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); self.dim()]
    }

    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim();
        Ok((0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let v = match (i == j, i < self.positive) {
                    (false, _) => 0.0,
                    (true, true) => 1.0,
                    (true, false) => -1.0,
                };
                Jet::constant(point.len(), order, v)
            })
            .collect())
    }
}

/// `e^{2Υ}` times the Euclidean metric.
#[derive(Debug, Clone)]
pub struct ConformallyFlat {
    pub scale: ConformalScale,
}

impl ConformallyFlat {
    pub fn example(dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        ConformallyFlat { scale: ConformalScale::new(Polynomial::random(dim, 3, 0.4, &mut rng)) }
    }
}

impl MetricChart for ConformallyFlat {
    fn name(&self) -> String {
        "conf-flat".into()
    }

    fn dim(&self) -> usize {
        self.scale.upsilon.dim
    }

    fn signature(&self) -> (usize, usize) {
        (self.dim(), 0)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(-0.5, 0.5); self.dim()]
    }

    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        Rescaled::new(Arc::new(Flat::euclidean(self.dim())), self.scale.clone()).metric_components(point, order)
    }
}

/// Product of two unit round spheres in stereographic coordinates
/// `(x1, y1, x2, y2)`.
#[derive(Debug, Clone, Default)]
pub struct S2xS2;

impl MetricChart for S2xS2 {
    fn name(&self) -> String {
        "s2xs2".into()
    }

    fn dim(&self) -> usize {
        4
    }

    fn signature(&self) -> (usize, usize) {
        (4, 0)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); 4]
    }

    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let x = vars(point, order);
        let conformal = |a: &Jet, b: &Jet| -> Result<Jet> {
            let r2 = (&(a * a) + &(b * b)).add_constant(1.0);
            r2.powf(-2.0).map(|f| f.scale(4.0))
        };
        let f1 = conformal(&x[0], &x[1])?;
        let f2 = conformal(&x[2], &x[3])?;
        let zero = Jet::zero(4, order);
        Ok((0..16)
            .map(|k| match (k / 4, k % 4) {
                (i, j) if i != j => zero.clone(),
                (i, _) if i < 2 => f1.clone(),
                _ => f2.clone(),
            })
            .collect())
    }
}

/// Schwarzschild exterior in coordinates `(t, r, θ, φ)`, signature `(−+++)`.
#[derive(Debug, Clone)]
pub struct Schwarzschild {
    pub mass: f64,
}

impl Default for Schwarzschild {
    fn default() -> Self {
        Schwarzschild { mass: 1.0 }
    }
}

impl MetricChart for Schwarzschild {
    fn name(&self) -> String {
        "schwarzschild".into()
    }

    fn dim(&self) -> usize {
        4
    }

    fn signature(&self) -> (usize, usize) {
        (3, 1)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        let m = self.mass;
        vec![(-1.0, 1.0), (3.0 * m, 10.0 * m), (0.5, PI - 0.5), (0.0, 2.0 * PI)]
    }

    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        if point[1] <= 2.0 * self.mass {
            return Err(Error::Numeric("point inside the horizon".into()));
        }
        let x = vars(point, order);
        let r = &x[1];
        let f = r.recip()?.scale(-2.0 * self.mass).add_constant(1.0);
        let r2 = r * r;
        let s = x[2].sin()?;
        let zero = Jet::zero(4, order);
        let diag = [f.neg(), f.recip()?, r2.clone(), &r2 * &(&s * &s)];
        Ok((0..16)
            .map(|k| if k / 4 == k % 4 { diag[k / 4].clone() } else { zero.clone() })
            .collect())
    }
}

/// `δ + h` with `h` a symmetric matrix of random cubic polynomials.
#[derive(Debug, Clone)]
pub struct Perturbed {
    pub dim: usize,
    pub seed: u64,
    entries: Vec<Polynomial>,
}

impl Perturbed {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut entries = vec![Polynomial::zero(dim); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let p = Polynomial::random(dim, 3, 0.1, &mut rng);
                entries[i * dim + j] = p.clone();
                entries[j * dim + i] = p;
            }
        }
        Perturbed { dim, seed, entries }
    }
}

impl MetricChart for Perturbed {
    fn name(&self) -> String {
        match self.dim {
            4 => format!("perturbed:{}", self.seed),
            n => format!("perturbed{n}:{}", self.seed),
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn signature(&self) -> (usize, usize) {
        (self.dim, 0)
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        vec![(-0.3, 0.3); self.dim]
    }

    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let n = self.dim;
        Ok((0..n * n)
            .map(|k| {
                let h = self.entries[k].jet(point, order);
                if k / n == k % n {
                    h.add_constant(1.0)
                } else {
                    h
                }
            })
            .collect())
    }
}

/// `e^{2Υ}` times another chart's metric.
#[derive(Clone)]
pub struct Rescaled {
    pub base: ChartRef,
    pub scale: ConformalScale,
    label: Option<String>,
}

impl Rescaled {
    pub fn new(base: ChartRef, scale: ConformalScale) -> Self {
        Rescaled { base, scale, label: None }
    }

    pub fn named(base: ChartRef, scale: ConformalScale, label: &str) -> Self {
        Rescaled { base, scale, label: Some(label.to_string()) }
    }
}

impl MetricChart for Rescaled {
    fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| format!("{}-rescaled", self.base.name()))
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn signature(&self) -> (usize, usize) {
        self.base.signature()
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        self.base.sample_box()
    }

    fn metric_components(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let factor = self.scale.jet(point, order).scale(2.0).exp()?;
        self.base
            .metric_components(point, order)?
            .iter()
            .map(|g| g.try_mul(&factor))
            .collect()
    }
}

/// Scale used by the `s2xs2-rescaled` chart, so that `Z` is not identically zero.
pub fn s2xs2_rescaling() -> ConformalScale {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    ConformalScale::new(Polynomial::random(4, 2, 0.3, &mut rng))
}

const NAMES: &[&str] = &[
    "flat",
    "flat-lorentz",
    "flat3",
    "conf-flat",
    "s2xs2",
    "s2xs2-rescaled",
    "schwarzschild",
    "perturbed",
    "perturbed3",
    "perturbed2",
];

/// Names accepted by [`chart_by_name`]; perturbed charts also take `:<seed>`.
pub fn chart_names() -> &'static [&'static str] {
    NAMES
}

pub fn chart_by_name(name: &str) -> Result<ChartRef> {
    let (base, seed) = match name.split_once(':') {
        Some((b, s)) => (b, Some(s.parse::<u64>().map_err(|_| Error::UnknownChart(name.into()))?)),
        None => (name, None),
    };
    let seed_or = |d: u64| seed.unwrap_or(d);
    let chart: ChartRef = match base {
        "flat" | "flat4" => Arc::new(Flat::euclidean(4)),
        "flat-lorentz" => Arc::new(Flat { positive: 3, negative: 1 }),
        "flat3" => Arc::new(Flat::euclidean(3)),
        "conf-flat" => Arc::new(ConformallyFlat::example(4)),
        "s2xs2" => Arc::new(S2xS2),
        "s2xs2-rescaled" => Arc::new(Rescaled::named(Arc::new(S2xS2), s2xs2_rescaling(), "s2xs2-rescaled")),
        "schwarzschild" => Arc::new(Schwarzschild::default()),
        "perturbed" | "perturbed4" => Arc::new(Perturbed::new(4, seed_or(1))),
        "perturbed3" => Arc::new(Perturbed::new(3, seed_or(1))),
        "perturbed2" => Arc::new(Perturbed::new(2, seed_or(1))),
        _ => return Err(Error::UnknownChart(name.into())),
    };
    if seed.is_some() && !base.starts_with("perturbed") {
        return Err(Error::UnknownChart(name.into()));
    }
    Ok(chart)
}

/// One instance of every built-in chart.
pub fn builtin_charts() -> Vec<ChartRef> {
    NAMES.iter().map(|n| chart_by_name(n).expect("built-in name")).collect()
}
