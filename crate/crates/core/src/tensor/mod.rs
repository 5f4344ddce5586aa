//! Weighted tensor fields at a point whose components are jets.

mod ops;
mod products;
mod project;
mod shape;

pub use ops::permutations_with_sign;
pub use products::{kn_product, sym_product, wedge_product};
pub use project::{cartan_project, cartan_project_last_first, trace_free_part, MetricPack};
pub use shape::{Bundle, ShapeSpec, Symmetry};

use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::jet::{Jet, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variance {
    Up,
    Down,
}

/// Controls weight bookkeeping and whether hook projections remove traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Conformal,
    Projective,
}

/// Dense tensor of jets, row-major over its slots.
#[derive(Debug, Clone)]
pub struct TensorJet<T: Scalar = f64> {
    dim: usize,
    valence: Vec<Variance>,
    weight: f64,
    flavor: Flavor,
    comps: Vec<Jet<T>>,
}

/// Odometer over all multi-indices in `0..dim` of a given length.
pub struct Indices {
    dim: usize,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for Indices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.dim {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}

pub fn indices(dim: usize, rank: usize) -> Indices {
    Indices {
        dim,
        current: vec![0; rank],
        done: dim == 0,
    }
}

pub(crate) fn flat_index(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

impl<T: Scalar> TensorJet<T> {
    pub fn new(
        dim: usize,
        valence: Vec<Variance>,
        weight: f64,
        flavor: Flavor,
        comps: Vec<Jet<T>>,
    ) -> Result<Self> {
        let expected = dim.pow(valence.len() as u32);
        if comps.len() != expected {
            return Err(structural(format!(
                "tensor of rank {} in dimension {dim} needs {expected} components, got {}",
                valence.len(),
                comps.len()
            )));
        }
        if let Some(bad) = comps.iter().find(|j| j.dim() != dim) {
            return Err(Error::DimensionMismatch(bad.dim(), dim));
        }
        Ok(TensorJet {
            dim,
            valence,
            weight,
            flavor,
            comps,
        })
    }

    pub fn from_fn(
        dim: usize,
        valence: Vec<Variance>,
        weight: f64,
        flavor: Flavor,
        mut f: impl FnMut(&[usize]) -> Jet<T>,
    ) -> Self {
        let comps = indices(dim, valence.len()).map(|i| f(&i)).collect();
        TensorJet::new(dim, valence, weight, flavor, comps).expect("from_fn builds a consistent tensor")
    }

    pub fn try_from_fn(
        dim: usize,
        valence: Vec<Variance>,
        weight: f64,
        flavor: Flavor,
        mut f: impl FnMut(&[usize]) -> Result<Jet<T>>,
    ) -> Result<Self> {
        let comps = indices(dim, valence.len())
            .map(|i| f(&i))
            .collect::<Result<Vec<_>>>()?;
        TensorJet::new(dim, valence, weight, flavor, comps)
    }

    pub fn zeros(dim: usize, valence: Vec<Variance>, weight: f64, flavor: Flavor, order: usize) -> Self {
        let n = dim.pow(valence.len() as u32);
        TensorJet {
            dim,
            valence,
            weight,
            flavor,
            comps: vec![Jet::zero(dim, order); n],
        }
    }

    pub fn scalar(value: Jet<T>, weight: f64, flavor: Flavor) -> Self {
        TensorJet {
            dim: value.dim(),
            valence: Vec::new(),
            weight,
            flavor,
            comps: vec![value],
        }
    }

    /// All-`Down` valence of the given rank.
    pub fn covariant(rank: usize) -> Vec<Variance> {
        vec![Variance::Down; rank]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[Variance] {
        &self.valence
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    /// Lowest jet order among the components.
    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn comps(&self) -> &[Jet<T>] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Jet<T>] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<Jet<T>> {
        self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Jet<T> {
        debug_assert_eq!(idx.len(), self.rank());
        &self.comps[flat_index(self.dim, idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Jet<T> {
        let k = flat_index(self.dim, idx);
        &mut self.comps[k]
    }

    /// Base-point value of one component.
    pub fn value(&self, idx: &[usize]) -> T {
        self.get(idx).value()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.max_abs()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }

    pub fn map(&self, f: impl FnMut(&Jet<T>) -> Jet<T>) -> Self {
        TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            weight: self.weight,
            flavor: self.flavor,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl FnMut(&Jet<T>) -> Result<Jet<T>>) -> Result<Self> {
        Ok(TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            weight: self.weight,
            flavor: self.flavor,
            comps: self.comps.iter().map(f).collect::<Result<Vec<_>>>()?,
        })
    }

    /// Checks that `other` lives in the same bundle (valence, weight, flavor).
    pub fn check_same_bundle(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.valence != other.valence {
            return Err(structural(format!(
                "valence mismatch: {:?} vs {:?}",
                self.valence, other.valence
            )));
        }
        if (self.weight - other.weight).abs() > 1e-12 {
            return Err(structural(format!(
                "weight mismatch: {} vs {}",
                self.weight, other.weight
            )));
        }
        if self.flavor != other.flavor {
            return Err(structural("flavor mismatch"));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_bundle(other)?;
        self.zip_with(other, |a, b| a.try_add(b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_bundle(other)?;
        self.zip_with(other, |a, b| a.try_sub(b))
    }

    fn zip_with(&self, other: &Self, mut f: impl FnMut(&Jet<T>, &Jet<T>) -> Result<Jet<T>>) -> Result<Self> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            weight: self.weight,
            flavor: self.flavor,
            comps,
        })
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|j| j.scale(c))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(T::from_real(c))
    }

    pub fn neg(&self) -> Self {
        self.scale_real(-1.0)
    }

    /// Multiplies every component by a scalar field; the weight is unchanged.
    pub fn mul_jet(&self, f: &Jet<T>) -> Result<Self> {
        self.try_map(|j| j.try_mul(f))
    }

    /// Multiplies by a scalar density, adding its weight.
    pub fn mul_scalar(&self, s: &TensorJet<T>) -> Result<Self> {
        if s.rank() != 0 {
            return Err(structural("mul_scalar expects a rank-0 tensor"));
        }
        Ok(self.mul_jet(&s.comps[0])?.with_weight(self.weight + s.weight))
    }

    /// Componentwise partial derivative in coordinate `var`.
    pub fn partial(&self, var: usize) -> Result<Self> {
        self.try_map(|j| j.partial(var))
    }

    /// Reorders slots: output slot `s` is input slot `perm[s]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(structural(format!("invalid slot permutation {perm:?}")));
        }
        let valence = perm.iter().map(|&p| self.valence[p]).collect();
        let mut src = vec![0; r];
        let comps = indices(self.dim, r)
            .map(|idx| {
                for (s, &p) in perm.iter().enumerate() {
                    src[p] = idx[s];
                }
                self.get(&src).clone()
            })
            .collect();
        Ok(TensorJet {
            dim: self.dim,
            valence,
            weight: self.weight,
            flavor: self.flavor,
            comps,
        })
    }

    /// Tensor product; slots of `self` come first.
    pub fn outer(&self, other: &Self) -> Result<Self> {
        self.contract_raw(other, &[])
    }

    /// Contraction of slot pairs `(slot of self, slot of other)` that have
    /// opposite variance. Output slots are the free slots of `self` followed
    /// by the free slots of `other`, in order.
    pub fn contract(&self, other: &Self, pairs: &[(usize, usize)]) -> Result<Self> {
        for &(a, b) in pairs {
            let (va, vb) = (self.valence.get(a), other.valence.get(b));
            match (va, vb) {
                (Some(x), Some(y)) if x != y => {}
                _ => {
                    return Err(structural(format!(
                        "cannot contract slot {a} ({va:?}) with slot {b} ({vb:?})"
                    )))
                }
            }
        }
        self.contract_raw(other, pairs)
    }

    /// Same as [`contract`](Self::contract) without the variance check
    /// (component sums in a fixed coordinate frame).
    pub fn contract_raw(&self, other: &Self, pairs: &[(usize, usize)]) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.flavor != other.flavor {
            return Err(structural("flavor mismatch in contraction"));
        }
        let n = self.dim;
        let free_a: Vec<usize> = (0..self.rank()).filter(|s| pairs.iter().all(|p| p.0 != *s)).collect();
        let free_b: Vec<usize> = (0..other.rank()).filter(|s| pairs.iter().all(|p| p.1 != *s)).collect();
        if free_a.len() + pairs.len() != self.rank() || free_b.len() + pairs.len() != other.rank() {
            return Err(structural("repeated slot in contraction"));
        }
        let valence: Vec<Variance> = free_a
            .iter()
            .map(|&s| self.valence[s])
            .chain(free_b.iter().map(|&s| other.valence[s]))
            .collect();
        let order = self.order().min(other.order());
        let mut ia = vec![0; self.rank()];
        let mut ib = vec![0; other.rank()];
        let mut comps = Vec::with_capacity(n.pow(valence.len() as u32));
        for out in indices(n, valence.len()) {
            for (k, &s) in free_a.iter().enumerate() {
                ia[s] = out[k];
            }
            for (k, &s) in free_b.iter().enumerate() {
                ib[s] = out[free_a.len() + k];
            }
            let mut acc = Jet::zero(n, order);
            for c in indices(n, pairs.len()) {
                for (k, &(sa, sb)) in pairs.iter().enumerate() {
                    ia[sa] = c[k];
                    ib[sb] = c[k];
                }
                acc.add_product(self.get(&ia), other.get(&ib))?;
            }
            comps.push(acc);
        }
        Ok(TensorJet {
            dim: n,
            valence,
            weight: self.weight + other.weight,
            flavor: self.flavor,
            comps,
        })
    }

    /// Contraction of two slots of opposite variance within this tensor.
    pub fn self_contract(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.rank() || b >= self.rank() || self.valence[a] == self.valence[b] {
            return Err(structural(format!("cannot self-contract slots {a} and {b}")));
        }
        let n = self.dim;
        let free: Vec<usize> = (0..self.rank()).filter(|&s| s != a && s != b).collect();
        let valence = free.iter().map(|&s| self.valence[s]).collect::<Vec<_>>();
        let mut idx = vec![0; self.rank()];
        let comps = indices(n, free.len())
            .map(|out| {
                for (k, &s) in free.iter().enumerate() {
                    idx[s] = out[k];
                }
                let mut acc = Jet::zero(n, self.order());
                for c in 0..n {
                    idx[a] = c;
                    idx[b] = c;
                    acc = &acc + self.get(&idx);
                }
                acc
            })
            .collect();
        Ok(TensorJet {
            dim: n,
            valence,
            weight: self.weight,
            flavor: self.flavor,
            comps,
        })
    }

    /// Moves slot `from` to position `to`, shifting the slots in between.
    pub fn move_slot(&self, from: usize, to: usize) -> Result<Self> {
        let mut order: Vec<usize> = (0..self.rank()).filter(|&s| s != from).collect();
        if to > order.len() {
            return Err(structural("slot position out of range"));
        }
        order.insert(to, from);
        self.permute(&order)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.try_sub(b).map_or(f64::INFINITY, |d| d.max_abs()))
            .fold(0.0, f64::max)
    }

    /// `max|a − b| / (1 + max(|a|, |b|))` over the common jet order; infinite
    /// when the shapes disagree.
    pub fn relative_residual(&self, other: &Self) -> f64 {
        if self.dim != other.dim || self.valence != other.valence {
            return f64::INFINITY;
        }
        let o = self.order().min(other.order());
        let (a, b) = (self.truncate(o), other.truncate(o));
        a.max_abs_diff(&b) / (1.0 + a.max_abs().max(b.max_abs()))
    }
}

impl TensorJet<f64> {
    pub fn to_complex(&self) -> TensorJet<num_complex::Complex64> {
        TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            weight: self.weight,
            flavor: self.flavor,
            comps: self.comps.iter().map(Jet::to_complex).collect(),
        }
    }
}

impl TensorJet<num_complex::Complex64> {
    pub fn re(&self) -> TensorJet<f64> {
        TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            weight: self.weight,
            flavor: self.flavor,
            comps: self.comps.iter().map(Jet::re).collect(),
        }
    }
}
