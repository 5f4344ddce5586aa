//! Operators as composable nodes, and numerical checks of complexes and of
//! equivalences up to homotopy.

mod diagrams;
mod node;
mod report;

pub use diagrams::{length_three, onesol_equivalence, OnesolOperators};
pub use node::{section_residual, section_size, OperatorNode, Section};
pub use report::{aggregate, CheckResult, Expect, Residual, Status, VerificationReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{structural, Result};
use crate::tensor::{Flavor, MetricPack, ShapeSpec};

/// Draws random section jets of a given order, projected into each bundle.
#[derive(Debug, Clone)]
pub struct SectionSampler {
    pub dim: usize,
    pub order: usize,
    pub flavor: Flavor,
    pub metric: Option<MetricPack>,
}

impl SectionSampler {
    pub fn sample<R: Rng + ?Sized>(&self, shape: &ShapeSpec, rng: &mut R) -> Result<Section> {
        shape
            .parts
            .iter()
            .map(|b| b.random_section(self.dim, self.order, self.flavor, self.metric.as_ref(), rng))
            .collect()
    }
}

/// `V_0 → V_1 → … → V_L` with operators `K_0 … K_{L−1}`.
#[derive(Debug, Clone)]
pub struct ComplexSpec {
    pub name: String,
    pub ops: Vec<OperatorNode>,
    pub sampler: SectionSampler,
}

impl ComplexSpec {
    pub fn new(name: impl Into<String>, ops: Vec<OperatorNode>, sampler: SectionSampler) -> Result<Self> {
        let name = name.into();
        for (l, w) in ops.windows(2).enumerate() {
            if w[0].target != w[1].source {
                return Err(structural(format!(
                    "{name}: K_{l} lands in {} but K_{} starts at {}",
                    w[0].target,
                    l + 1,
                    w[1].source
                )));
            }
        }
        Ok(ComplexSpec { name, ops, sampler })
    }

    /// `V_l`.
    pub fn space(&self, l: usize) -> &ShapeSpec {
        if l < self.ops.len() {
            &self.ops[l].source
        } else {
            &self.ops[l - 1].target
        }
    }

    /// Number of spaces, `L + 1`.
    pub fn spaces(&self) -> usize {
        self.ops.len() + 1
    }

    pub fn dim(&self) -> usize {
        self.sampler.dim
    }
}

/// `K_{l+1} ∘ K_l` on random sections, scaled by `1 + max(|x|, |K_l x|)`.
pub fn check_complex<R: Rng + ?Sized>(c: &ComplexSpec, trials: usize, rng: &mut R) -> Result<Vec<Residual>> {
    let mut out = Vec::new();
    for l in 0..c.ops.len().saturating_sub(1) {
        let (k0, k1) = (&c.ops[l], &c.ops[l + 1]);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let x = c.sampler.sample(&k0.source, rng)?;
            let y = k0.apply(&x)?;
            let z = k1.apply(&y)?;
            let scale = 1.0 + section_size(&x).max(section_size(&y));
            worst = worst.max(section_size(&z) / scale);
        }
        out.push(Residual::zero(
            format!("{}: K{}∘K{}", c.name, l + 1, l),
            format!("{}∘{} = 0", k1.name, k0.name),
            worst,
        ));
    }
    Ok(out)
}

/// Cochain maps `C_l : V_l → V'_l`, `D_l : V'_l → V_l` and homotopies
/// `H_l : V_{l+1} → V_l`, `H'_l : V'_{l+1} → V'_l`.
#[derive(Debug, Clone)]
pub struct EquivalenceData {
    pub top: ComplexSpec,
    pub bottom: ComplexSpec,
    pub c: Vec<OperatorNode>,
    pub d: Vec<OperatorNode>,
    pub h: Vec<OperatorNode>,
    pub h_prime: Vec<OperatorNode>,
}

impl EquivalenceData {
    pub fn new(
        top: ComplexSpec,
        bottom: ComplexSpec,
        c: Vec<OperatorNode>,
        d: Vec<OperatorNode>,
        h: Vec<OperatorNode>,
        h_prime: Vec<OperatorNode>,
    ) -> Result<Self> {
        let n = top.spaces();
        if bottom.spaces() != n || c.len() != n || d.len() != n || h.len() != n - 1 || h_prime.len() != n - 1 {
            return Err(structural("equivalence data lengths do not match the complexes"));
        }
        for l in 0..n {
            let (v, w) = (top.space(l), bottom.space(l));
            if &c[l].source != v || &c[l].target != w || &d[l].source != w || &d[l].target != v {
                return Err(structural(format!("C_{l}/D_{l} do not map between {v} and {w}")));
            }
            if l + 1 < n {
                if &h[l].source != top.space(l + 1) || &h[l].target != v {
                    return Err(structural(format!("H_{l} does not map {} → {v}", top.space(l + 1))));
                }
                if &h_prime[l].source != bottom.space(l + 1) || &h_prime[l].target != w {
                    return Err(structural(format!("H'_{l} does not map {} → {w}", bottom.space(l + 1))));
                }
            }
        }
        Ok(EquivalenceData { top, bottom, c, d, h, h_prime })
    }

    /// The trivial equivalence of a complex with itself.
    pub fn identity(c: ComplexSpec) -> Self {
        let dim = c.dim();
        let n = c.spaces();
        let ids: Vec<OperatorNode> = (0..n).map(|l| OperatorNode::identity(dim, c.space(l).clone())).collect();
        let zeros: Vec<OperatorNode> = (0..n - 1)
            .map(|l| OperatorNode::zero(dim, c.space(l + 1).clone(), c.space(l).clone()))
            .collect();
        EquivalenceData { top: c.clone(), bottom: c, c: ids.clone(), d: ids, h: zeros.clone(), h_prime: zeros }
    }
}

struct Side<'a> {
    label: &'static str,
    k: &'a ComplexSpec,
    h: &'a [OperatorNode],
    there: &'a [OperatorNode],
    back: &'a [OperatorNode],
}

/// `back_l ∘ there_l = id − K_{l−1}H_{l−1} − H_l K_l`, with the edge forms
/// `K_0 ∘ H̃ = 0` and `H̃ ∘ K_{L−1} = 0` for the remainder `H̃` at each end.
fn homotopy_residuals<R: Rng + ?Sized>(s: &Side, trials: usize, rng: &mut R, out: &mut Vec<Residual>) -> Result<()> {
    let n = s.k.spaces();
    let ops = &s.k.ops;
    // (id − back∘there − interior terms present at l, largest term)
    let remainder = |l: usize, x: &Section| -> Result<(Section, f64)> {
        // a composite through a zero space is zero; skipping it keeps the
        // jet order of the remainder intact
        let through = |outer: &OperatorNode, inner: &OperatorNode| -> Result<Option<Section>> {
            let mid = inner.apply(x)?;
            if mid.is_empty() {
                return Ok(None);
            }
            outer.apply(&mid).map(Some)
        };
        let mut terms = Vec::new();
        terms.extend(through(&s.back[l], &s.there[l])?);
        if l > 0 {
            terms.extend(through(&ops[l - 1], &s.h[l - 1])?);
        }
        if l + 1 < n {
            terms.extend(through(&s.h[l], &ops[l])?);
        }
        let mut scale = section_size(x);
        let mut r = x.to_vec();
        for t in &terms {
            scale = scale.max(section_size(t));
            r = r.iter().zip(t).map(|(a, b)| a.try_sub(b)).collect::<Result<_>>()?;
        }
        Ok((r, scale))
    };
    for l in 0..n {
        let mut worst: f64 = 0.0;
        let edge_left = l == 0 && n > 1;
        let edge_right = l == n - 1 && n > 1;
        for _ in 0..trials {
            if edge_right {
                // H̃ ∘ K_{L−1}, with H̃ = id − DC − K_{L−1}H_{L−1}
                let x = s.k.sampler.sample(s.k.space(l - 1), rng)?;
                let kx = ops[l - 1].apply(&x)?;
                let (r, scale) = remainder(l, &kx)?;
                worst = worst.max(section_size(&r) / (1.0 + scale.max(section_size(&x))));
                continue;
            }
            let x = s.k.sampler.sample(s.k.space(l), rng)?;
            let (r, scale) = remainder(l, &x)?;
            if edge_left {
                // K_0 ∘ H̃, with H̃ = id − DC − H_0 K_0
                let kr = ops[0].apply(&r)?;
                worst = worst.max(section_size(&kr) / (1.0 + scale.max(section_size(&r))));
            } else {
                worst = worst.max(section_size(&r) / (1.0 + scale));
            }
        }
        let (name, tag) = if edge_left {
            (format!("{}: edge {l}", s.label), format!("K_0∘(id − {0}_0 − H_0K_0) = 0", s.label))
        } else if edge_right {
            (
                format!("{}: edge {l}", s.label),
                format!("(id − {0}_{l} − K_{1}H_{1})∘K_{1} = 0", s.label, l - 1),
            )
        } else {
            (format!("{}: homotopy {l}", s.label), format!("{}_{l} = id − K_{{l−1}}H_{{l−1}} − H_lK_l", s.label))
        };
        out.push(Residual::zero(name, tag, worst));
    }
    Ok(())
}

/// Commuting squares and both homotopy identities at every degree.
pub fn check_equivalence<R: Rng + ?Sized>(e: &EquivalenceData, trials: usize, rng: &mut R) -> Result<Vec<Residual>> {
    let mut out = Vec::new();
    let (top, bottom) = (&e.top, &e.bottom);
    for l in 0..top.ops.len() {
        let mut wc: f64 = 0.0;
        let mut wd: f64 = 0.0;
        for _ in 0..trials {
            // a zero space makes the square vacuous
            let x = top.sampler.sample(top.space(l), rng)?;
            if !x.is_empty() {
                let lhs = bottom.ops[l].apply(&e.c[l].apply(&x)?)?;
                let rhs = e.c[l + 1].apply(&top.ops[l].apply(&x)?)?;
                wc = wc.max(section_residual(&lhs, &rhs));
            }
            let y = bottom.sampler.sample(bottom.space(l), rng)?;
            if !y.is_empty() {
                let lhs = top.ops[l].apply(&e.d[l].apply(&y)?)?;
                let rhs = e.d[l + 1].apply(&bottom.ops[l].apply(&y)?)?;
                wd = wd.max(section_residual(&lhs, &rhs));
            }
        }
        out.push(Residual::zero(format!("square C{l}"), format!("K'_{l}C_{l} = C_{}K_{l}", l + 1), wc));
        out.push(Residual::zero(format!("square D{l}"), format!("K_{l}D_{l} = D_{}K'_{l}", l + 1), wd));
    }
    let dc = Side { label: "DC", k: top, h: &e.h, there: &e.c, back: &e.d };
    homotopy_residuals(&dc, trials, rng, &mut out)?;
    let cd = Side { label: "CD", k: bottom, h: &e.h_prime, there: &e.d, back: &e.c };
    homotopy_residuals(&cd, trials, rng, &mut out)?;
    Ok(out)
}

/// Completes the first square to the next operator of the top row:
/// `K_1 = (id − K_0H_0 − D_1C_1 ; K'_1C_1)`.
pub fn lift_compatibility(e: &EquivalenceData, k1_prime: &OperatorNode) -> Result<OperatorNode> {
    let dim = e.top.dim();
    let k0 = &e.top.ops[0];
    let v1 = k0.target.clone();
    if v1.len() != 1 || e.c[1].target.len() != 1 || k1_prime.target.len() != 1 {
        return Err(structural("lift_compatibility expects single-bundle spaces in the first cell"));
    }
    let first = OperatorNode::identity(dim, v1.clone())
        .minus(&k0.after(&e.h[0])?)?
        .minus(&e.d[1].after(&e.c[1])?)?;
    let second = k1_prime.after(&e.c[1])?;
    let target = ShapeSpec::sum(vec![v1.parts[0].clone(), k1_prime.target.parts[0].clone()]);
    let name = format!("({}; {})", first.name, second.name);
    OperatorNode::block(name, dim, v1, target, vec![vec![Some(first)], vec![Some(second)]])
}

/// `count` points drawn uniformly from the chart's sampling box, shrunk by
/// `shrink` toward its centre.
pub fn sample_points(bounds: &[(f64, f64)], count: usize, seed: u64, shrink: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| {
                    let mid = 0.5 * (lo + hi);
                    let half = 0.5 * (hi - lo) * shrink;
                    rng.gen_range(mid - half..=mid + half)
                })
                .collect()
        })
        .collect()
}

/// Per-point RNG: independent of evaluation order.
pub fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Runs `f` at every point in parallel; results stay in point order.
pub fn over_points<T, F>(points: &[Vec<f64>], seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &[f64], &mut ChaCha8Rng) -> Result<T> + Sync,
{
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| f(i, p, &mut point_rng(seed, i)))
        .collect()
}
