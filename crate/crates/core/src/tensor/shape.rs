use std::fmt;

use serde::Serialize;

use rand::Rng;

use super::{cartan_project, Flavor, cartan_project_last_first, trace_free_part, MetricPack, TensorJet, Variance};
use crate::error::{structural, Result};
use crate::jet::{Jet, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    None,
    /// Symmetric 2-tensor.
    Sym,
    /// Symmetric trace-free 2-tensor.
    Sym0,
    /// Antisymmetric in all `k` slots (k = 0 is a scalar).
    Form(usize),
    /// `E_[a1..ak] ⊠ E_b`, single slot last.
    Hook(usize),
    /// `E_a ⊠ E_[b1..bk]`, single slot first.
    HookFirst(usize),
}

/// One irreducible-ish bundle: valence, symmetry type and weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bundle {
    pub valence: Vec<Variance>,
    pub symmetry: Symmetry,
    pub weight: f64,
}

impl Bundle {
    pub fn new(valence: Vec<Variance>, symmetry: Symmetry, weight: f64) -> Result<Self> {
        let r = valence.len();
        let ok = match symmetry {
            Symmetry::None => true,
            Symmetry::Sym | Symmetry::Sym0 => r == 2,
            Symmetry::Form(k) => r == k,
            Symmetry::Hook(k) | Symmetry::HookFirst(k) => r == k + 1 && k >= 1,
        };
        if !ok {
            return Err(structural(format!("symmetry {symmetry:?} does not fit rank {r}")));
        }
        Ok(Bundle { valence, symmetry, weight })
    }

    fn covariant(rank: usize, symmetry: Symmetry, weight: f64) -> Self {
        Bundle::new(vec![Variance::Down; rank], symmetry, weight).expect("valid covariant bundle")
    }

    pub fn scalar(weight: f64) -> Self {
        Self::covariant(0, Symmetry::Form(0), weight)
    }

    pub fn form(k: usize, weight: f64) -> Self {
        Self::covariant(k, Symmetry::Form(k), weight)
    }

    pub fn sym(weight: f64) -> Self {
        Self::covariant(2, Symmetry::Sym, weight)
    }

    pub fn sym0(weight: f64) -> Self {
        Self::covariant(2, Symmetry::Sym0, weight)
    }

    pub fn hook(k: usize, weight: f64) -> Self {
        Self::covariant(k + 1, Symmetry::Hook(k), weight)
    }

    pub fn hook_first(k: usize, weight: f64) -> Self {
        Self::covariant(k + 1, Symmetry::HookFirst(k), weight)
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    /// Projects an arbitrary tensor of the right valence into this bundle.
    pub fn project<T: Scalar>(&self, t: &TensorJet<T>, metric: Option<&MetricPack<T>>) -> Result<TensorJet<T>> {
        self.check_valence(t)?;
        let slots: Vec<usize> = (0..self.rank()).collect();
        match self.symmetry {
            Symmetry::None => Ok(t.clone()),
            Symmetry::Sym => t.symmetrize(&slots),
            Symmetry::Sym0 => {
                let m = metric.ok_or_else(|| structural("trace-free projection needs the metric"))?;
                trace_free_part(&t.symmetrize(&slots)?, m)
            }
            Symmetry::Form(_) => t.antisymmetrize(&slots),
            Symmetry::Hook(k) => cartan_project(&t.antisymmetrize(&slots[..k])?, k, metric),
            Symmetry::HookFirst(k) => cartan_project_last_first(&t.antisymmetrize(&slots[1..])?, k, metric),
        }
    }

    /// Polynomial jet with i.i.d. uniform `[−1, 1]` coefficients, projected
    /// into this bundle.
    pub fn random_section<R: Rng + ?Sized>(
        &self,
        dim: usize,
        order: usize,
        flavor: Flavor,
        metric: Option<&MetricPack>,
        rng: &mut R,
    ) -> Result<TensorJet> {
        let raw = TensorJet::from_fn(dim, self.valence.clone(), self.weight, flavor, |_| {
            Jet::from_fn(dim, order, |_| rng.gen_range(-1.0..=1.0))
        });
        let metric = metric.map(|m| m.truncate(order));
        self.project(&raw, metric.as_ref())
    }

    /// `max |t − project(t)|`.
    pub fn membership_residual<T: Scalar>(&self, t: &TensorJet<T>, metric: Option<&MetricPack<T>>) -> Result<f64> {
        Ok(t.max_abs_diff(&self.project(t, metric)?))
    }

    pub fn check_valence<T: Scalar>(&self, t: &TensorJet<T>) -> Result<()> {
        if t.valence() != self.valence.as_slice() {
            return Err(structural(format!(
                "expected valence {:?} for {self}, got {:?}",
                self.valence,
                t.valence()
            )));
        }
        Ok(())
    }

    /// Valence and weight agree with this bundle.
    pub fn check<T: Scalar>(&self, t: &TensorJet<T>) -> Result<()> {
        self.check_valence(t)?;
        if (t.weight() - self.weight).abs() > 1e-12 {
            return Err(structural(format!("expected weight {} for {self}, got {}", self.weight, t.weight())));
        }
        Ok(())
    }
}

const LETTERS: &[u8] = b"abcdefgh";

fn letters(range: std::ops::Range<usize>) -> String {
    range.map(|i| LETTERS[i % LETTERS.len()] as char).collect()
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.weight;
        match self.symmetry {
            Symmetry::Form(0) => write!(f, "E[{w}]"),
            Symmetry::Form(1) => write!(f, "E_a[{w}]"),
            Symmetry::Form(k) => write!(f, "E_[{}][{w}]", letters(0..k)),
            Symmetry::Sym => write!(f, "E_(ab)[{w}]"),
            Symmetry::Sym0 => write!(f, "E_(ab)0[{w}]"),
            Symmetry::Hook(k) => write!(f, "E_[{}]⊠E_{}[{w}]", letters(0..k), letters(k..k + 1)),
            Symmetry::HookFirst(k) => write!(f, "E_a⊠E_[{}][{w}]", letters(1..k + 1)),
            Symmetry::None => {
                let idx: String = self
                    .valence
                    .iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Variance::Up => format!("^{}", letters(i..i + 1)),
                        Variance::Down => format!("_{}", letters(i..i + 1)),
                    })
                    .collect();
                write!(f, "E{idx}[{w}]")
            }
        }
    }
}

/// Direct sum of bundles; the empty sum is the zero bundle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSpec {
    pub parts: Vec<Bundle>,
}

impl ShapeSpec {
    pub fn single(b: Bundle) -> Self {
        ShapeSpec { parts: vec![b] }
    }

    pub fn sum(parts: Vec<Bundle>) -> Self {
        ShapeSpec { parts }
    }

    pub fn zero() -> Self {
        ShapeSpec { parts: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn check<T: Scalar>(&self, section: &[TensorJet<T>]) -> Result<()> {
        if section.len() != self.parts.len() {
            return Err(structural(format!(
                "section has {} parts, {self} has {}",
                section.len(),
                self.parts.len()
            )));
        }
        self.parts.iter().zip(section).try_for_each(|(b, t)| b.check(t))
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> = self.parts.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", s.join(" ⊕ "))
    }
}
