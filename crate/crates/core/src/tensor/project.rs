use super::{indices, Flavor, TensorJet, Variance};
use crate::error::{numeric, structural, Result};
use crate::jet::{Jet, Scalar};

/// Metric and inverse metric jets at a point (weights 2 and −2).
#[derive(Debug, Clone)]
pub struct MetricPack<T: Scalar = f64> {
    pub g: TensorJet<T>,
    pub ginv: TensorJet<T>,
}

impl<T: Scalar> MetricPack<T> {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn truncate(&self, order: usize) -> Self {
        MetricPack {
            g: self.g.truncate(order),
            ginv: self.ginv.truncate(order),
        }
    }
}

impl MetricPack<f64> {
    pub fn to_complex(&self) -> MetricPack<num_complex::Complex64> {
        MetricPack {
            g: self.g.to_complex(),
            ginv: self.ginv.to_complex(),
        }
    }
}

const ASSERT_TOL: f64 = 1e-9;

/// `t − g·tr(t)/n` for a covariant 2-tensor.
pub fn trace_free_part<T: Scalar>(t: &TensorJet<T>, metric: &MetricPack<T>) -> Result<TensorJet<T>> {
    if t.rank() != 2 || t.valence().iter().any(|v| *v != Variance::Down) {
        return Err(structural("trace_free_part expects a covariant 2-tensor"));
    }
    let n = t.dim() as f64;
    let tr = t.trace(0, 1, Some(metric))?;
    let correction = metric.g.outer(&tr)?.scale_real(1.0 / n);
    t.try_sub(&correction)
}

/// Projection onto `E_[a1..ak] ⊠ E_b`: removes the totally antisymmetric
/// part and, for conformal flavor, every metric trace. The first `k` slots
/// must already be antisymmetric.
pub fn cartan_project<T: Scalar>(
    t: &TensorJet<T>,
    k: usize,
    metric: Option<&MetricPack<T>>,
) -> Result<TensorJet<T>> {
    if t.rank() != k + 1 || k == 0 {
        return Err(structural(format!("hook projection with k={k} on a rank-{} tensor", t.rank())));
    }
    if t.valence().iter().any(|v| *v != Variance::Down) {
        return Err(structural("hook projection expects covariant slots"));
    }
    let scale = 1.0 + t.max_abs();
    let form_slots: Vec<usize> = (0..k).collect();
    if k > 1 {
        let alt = t.antisymmetrize(&form_slots)?;
        if t.max_abs_diff(&alt) > ASSERT_TOL * scale {
            return Err(structural("input is not antisymmetric in its form slots"));
        }
    }
    let all: Vec<usize> = (0..=k).collect();
    let t1 = t.try_sub(&t.antisymmetrize(&all)?)?;
    if t.flavor() == Flavor::Projective {
        return Ok(t1);
    }
    let metric = metric.ok_or_else(|| structural("conformal hook projection needs the metric"))?;

    let s = t1.trace(0, k, Some(metric))?;
    let u = trace_ansatz(&metric.g, &s, k)?;
    let c = ansatz_coefficient(metric, k)?;
    let t2 = if c.abs() > 1e-12 {
        t1.try_sub(&u.scale_real(1.0 / c))?
    } else {
        t1
    };

    let residual = t2.trace(0, k, Some(metric))?.max_abs();
    if residual > ASSERT_TOL * scale * (1.0 + metric.ginv.max_abs()) {
        return Err(numeric(format!("hook projection left a trace of size {residual:e}")));
    }
    Ok(t2)
}

/// Same projection for a tensor whose single slot comes first:
/// `E_a ⊠ E_[b1..bk]`.
pub fn cartan_project_last_first<T: Scalar>(
    t: &TensorJet<T>,
    k: usize,
    metric: Option<&MetricPack<T>>,
) -> Result<TensorJet<T>> {
    let to_back = t.move_slot(0, k)?;
    cartan_project(&to_back, k, metric)?.move_slot(k, 0)
}

/// `Alt_{a1..ak}(g_{a1 b} s_{a2..ak})` with `b` placed last.
fn trace_ansatz<T: Scalar>(g: &TensorJet<T>, s: &TensorJet<T>, k: usize) -> Result<TensorJet<T>> {
    let gs = g.outer(s)?;
    let mut perm = Vec::with_capacity(k + 1);
    perm.push(0);
    perm.extend(2..=k);
    perm.push(1);
    let u = gs.permute(&perm)?;
    u.antisymmetrize(&(0..k).collect::<Vec<_>>())
}

/// Least-squares coefficient `c` with `tr(ansatz(s)) = c·s`, fitted on a
/// fixed probe at the base point.
fn ansatz_coefficient<T: Scalar>(metric: &MetricPack<T>, k: usize) -> Result<f64> {
    let n = metric.dim();
    let mp0 = metric.truncate(0);
    let probe = TensorJet::from_fn(n, vec![Variance::Down; k - 1], 0.0, mp0.g.flavor(), |idx| {
        let v = idx.iter().enumerate().fold(0.3, |acc, (i, &x)| acc + (i as f64 + 1.7) * (x as f64 + 0.5).sqrt());
        Jet::constant(n, 0, T::from_real(v.sin()))
    })
    .antisymmetrize(&(0..k - 1).collect::<Vec<_>>())?;
    let u = trace_ansatz(&mp0.g, &probe, k)?;
    let tr = u.trace(0, k, Some(&mp0))?;
    let (mut num, mut den) = (T::zero(), 0.0);
    for idx in indices(n, k - 1) {
        let p = probe.value(&idx);
        num += tr.value(&idx) * p.conj();
        den += p.abs() * p.abs();
    }
    if den == 0.0 {
        return Err(numeric("degenerate probe for the hook projection"));
    }
    Ok(num.re() / den)
}
