use std::fmt;
use std::sync::Arc;

use crate::error::{structural, Result};
use crate::tensor::{Bundle, ShapeSpec, TensorJet};

/// A section of a direct sum of bundles, one tensor per summand.
pub type Section = Vec<TensorJet>;

type EvalFn = dyn Fn(&[TensorJet]) -> Result<Section> + Send + Sync;

/// A differential operator between direct sums of bundles.
#[derive(Clone)]
pub struct OperatorNode {
    pub name: String,
    pub source: ShapeSpec,
    pub target: ShapeSpec,
    /// Number of derivatives consumed.
    pub order: usize,
    dim: usize,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for OperatorNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} → {}", self.name, self.source, self.target)
    }
}

impl OperatorNode {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        source: ShapeSpec,
        target: ShapeSpec,
        order: usize,
        eval: impl Fn(&[TensorJet]) -> Result<Section> + Send + Sync + 'static,
    ) -> Self {
        OperatorNode { name: name.into(), source, target, order, dim, eval: Arc::new(eval) }
    }

    /// Single bundle to single bundle.
    pub fn unary(
        name: impl Into<String>,
        dim: usize,
        source: Bundle,
        target: Bundle,
        order: usize,
        f: impl Fn(&TensorJet) -> Result<TensorJet> + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, dim, ShapeSpec::single(source), ShapeSpec::single(target), order, move |x| Ok(vec![f(&x[0])?]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn identity(dim: usize, shape: ShapeSpec) -> Self {
        Self::new("id", dim, shape.clone(), shape, 0, |x| Ok(x.to_vec()))
    }

    pub fn zero(dim: usize, source: ShapeSpec, target: ShapeSpec) -> Self {
        let tgt = target.clone();
        Self::new("0", dim, source, target, 0, move |x| {
            let order = x.iter().map(|t| t.order()).min().unwrap_or(0);
            Ok(zero_section(dim, &tgt, order, x.first()))
        })
    }

    /// Evaluates with shape checks on both sides.
    pub fn apply(&self, x: &[TensorJet]) -> Result<Section> {
        self.source.check(x).map_err(|e| structural(format!("{} input: {e}", self.name)))?;
        let y = (self.eval)(x)?;
        self.target.check(&y).map_err(|e| structural(format!("{} output: {e}", self.name)))?;
        Ok(y)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &OperatorNode) -> Result<OperatorNode> {
        if inner.target != self.source {
            return Err(structural(format!(
                "cannot compose {} after {}: {} ≠ {}",
                self.name, inner.name, self.source, inner.target
            )));
        }
        let (a, b) = (self.clone(), inner.clone());
        Ok(Self::new(
            format!("{}∘{}", self.name, inner.name),
            self.dim,
            inner.source.clone(),
            self.target.clone(),
            self.order + inner.order,
            move |x| a.apply(&b.apply(x)?),
        ))
    }

    fn combine(&self, other: &OperatorNode, sign: f64, op: &str) -> Result<OperatorNode> {
        if self.source != other.source || self.target != other.target {
            return Err(structural(format!("cannot form {} {op} {}: shapes differ", self.name, other.name)));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::new(
            format!("({} {op} {})", self.name, other.name),
            self.dim,
            self.source.clone(),
            self.target.clone(),
            self.order.max(other.order),
            move |x| {
                let (u, v) = (a.apply(x)?, b.apply(x)?);
                u.iter().zip(&v).map(|(p, q)| p.try_add(&q.scale_real(sign))).collect()
            },
        ))
    }

    pub fn plus(&self, other: &OperatorNode) -> Result<OperatorNode> {
        self.combine(other, 1.0, "+")
    }

    pub fn minus(&self, other: &OperatorNode) -> Result<OperatorNode> {
        self.combine(other, -1.0, "−")
    }

    pub fn scaled(&self, c: f64) -> OperatorNode {
        let a = self.clone();
        Self::new(
            format!("{c}·{}", self.name),
            self.dim,
            self.source.clone(),
            self.target.clone(),
            self.order,
            move |x| Ok(a.apply(x)?.iter().map(|t| t.scale_real(c)).collect()),
        )
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Block operator from `⊕ source` to `⊕ target`; `blocks[i][j]` maps source
    /// summand `j` to target summand `i`, `None` meaning zero.
    pub fn block(
        name: impl Into<String>,
        dim: usize,
        source: ShapeSpec,
        target: ShapeSpec,
        blocks: Vec<Vec<Option<OperatorNode>>>,
    ) -> Result<OperatorNode> {
        let name = name.into();
        if blocks.len() != target.len() || blocks.iter().any(|row| row.len() != source.len()) {
            return Err(structural(format!("{name}: block layout does not match {source} → {target}")));
        }
        let mut order = 0;
        for (i, row) in blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    if b.source.parts != [source.parts[j].clone()] || b.target.parts != [target.parts[i].clone()] {
                        return Err(structural(format!("{name}: block ({i},{j}) is {b:?}")));
                    }
                    order = order.max(b.order);
                }
            }
        }
        let tgt = target.clone();
        Ok(Self::new(name, dim, source, target, order, move |x| {
            let in_order = x.iter().map(|t| t.order()).min().unwrap_or(0);
            let mut out = Vec::with_capacity(tgt.len());
            for (i, row) in blocks.iter().enumerate() {
                let mut acc: Option<TensorJet> = None;
                for (j, b) in row.iter().enumerate() {
                    if let Some(b) = b {
                        let y = b.apply(std::slice::from_ref(&x[j]))?.remove(0);
                        acc = Some(match acc {
                            Some(a) => a.try_add(&y)?,
                            None => y,
                        });
                    }
                }
                out.push(match acc {
                    Some(a) => a,
                    None => zero_part(dim, &tgt.parts[i], in_order, x.first()),
                });
            }
            Ok(out)
        }))
    }
}

fn zero_part(dim: usize, b: &Bundle, order: usize, like: Option<&TensorJet>) -> TensorJet {
    let flavor = like.map_or(crate::tensor::Flavor::Conformal, |t| t.flavor());
    TensorJet::zeros(dim, b.valence.clone(), b.weight, flavor, order)
}

fn zero_section(dim: usize, shape: &ShapeSpec, order: usize, like: Option<&TensorJet>) -> Section {
    shape.parts.iter().map(|b| zero_part(dim, b, order, like)).collect()
}

/// `max` over summands of the relative residual.
pub fn section_residual(a: &[TensorJet], b: &[TensorJet]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| x.relative_residual(y)).fold(0.0, f64::max)
}

/// `max |x|` over all summands.
pub fn section_size(x: &[TensorJet]) -> f64 {
    x.iter().map(|t| t.max_abs()).fold(0.0, f64::max)
}
