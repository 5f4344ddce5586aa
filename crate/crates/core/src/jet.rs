//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] of order `N` in `dim` variables stores every Taylor coefficient
//! `c_α` with `|α| ≤ N`. Coefficients are kept densely in a graded
//! lexicographic order, so the monomials of degree `≤ k` always form a prefix
//! of the storage and truncation is a slice operation.

use std::collections::HashMap;
use std::fmt;
use std::ops::{AddAssign, MulAssign, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::{Complex64, ComplexFloat};

use crate::error::{numeric, Error, Result};

/// Scalar field of jet coefficients: `f64` or `Complex64`.
pub trait Scalar:
    ComplexFloat<Real = f64>
    + AddAssign
    + SubAssign
    + MulAssign
    + Default
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    const IS_REAL: bool;

    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    const IS_REAL: bool = true;

    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    const IS_REAL: bool = false;

    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Monomial enumeration and precomputed product/derivative tables for one
/// `(dim, order)` pair.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    exps: Vec<u8>,
    degree_end: Vec<usize>,
    /// `(i, j, k)` with `α_i + α_j = α_k`, for every pair inside the budget.
    mul: Vec<(u32, u32, u32)>,
    /// Per variable: `(dst, src, factor)` mapping into the layout of order `N - 1`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        assert!(dim > 0, "jets need at least one variable");
        assert!(order < 256, "jet order too large");
        let mut exps: Vec<u8> = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        let mut current = vec![0u8; dim];
        for degree in 0..=order {
            push_degree(dim, degree, 0, &mut current, &mut exps);
            degree_end.push(exps.len() / dim);
        }
        let count = exps.len() / dim;
        let mut index = HashMap::with_capacity(count);
        for k in 0..count {
            index.insert(exps[k * dim..(k + 1) * dim].to_vec(), k);
        }
        let degree = |k: usize| exps[k * dim..(k + 1) * dim].iter().map(|&e| e as usize).sum::<usize>();

        let mut mul = Vec::new();
        let mut sum = vec![0u8; dim];
        for i in 0..count {
            let di = degree(i);
            for j in 0..degree_end[order - di] {
                for v in 0..dim {
                    sum[v] = exps[i * dim + v] + exps[j * dim + v];
                }
                mul.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, k)| k);

        let mut deriv = vec![Vec::new(); dim];
        if order > 0 {
            let lower = degree_end[order - 1];
            for (v, table) in deriv.iter_mut().enumerate() {
                for dst in 0..lower {
                    let mut alpha = exps[dst * dim..(dst + 1) * dim].to_vec();
                    alpha[v] += 1;
                    table.push((dst as u32, index[&alpha] as u32, alpha[v] as f64));
                }
            }
        }

        Layout {
            dim,
            order,
            exps,
            degree_end,
            mul,
            deriv,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, k: usize) -> &[u8] {
        &self.exps[k * self.dim..(k + 1) * self.dim]
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.dim || alpha.iter().sum::<usize>() > self.order {
            return None;
        }
        (0..self.len()).find(|&k| {
            self.exponent(k)
                .iter()
                .zip(alpha)
                .all(|(&e, &a)| e as usize == a)
        })
    }

    /// Number of monomials of degree at most `k`.
    pub fn count_up_to(&self, k: usize) -> usize {
        self.degree_end[k.min(self.order)]
    }
}

fn push_degree(dim: usize, remaining: usize, var: usize, current: &mut [u8], out: &mut Vec<u8>) {
    if var == dim - 1 {
        current[var] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_degree(dim, remaining - e, var + 1, current, out);
    }
    current[var] = 0;
}

/// Shared layout for `(dim, order)`.
pub fn layout(dim: usize, order: usize) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(l) = cache.lock().expect("layout cache poisoned").get(&(dim, order)) {
        return l.clone();
    }
    let built = Arc::new(Layout::build(dim, order));
    cache
        .lock()
        .expect("layout cache poisoned")
        .entry((dim, order))
        .or_insert(built)
        .clone()
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Exp,
    Ln,
    Sin,
    Cos,
    Pow(f64),
    Recip,
}

/// Truncated Taylor expansion at a base point.
#[derive(Clone)]
pub struct Jet<T: Scalar = f64> {
    layout: Arc<Layout>,
    coeffs: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<T: Scalar> Jet<T> {
    pub fn zero(dim: usize, order: usize) -> Self {
        let layout = layout(dim, order);
        let coeffs = vec![T::zero(); layout.len()];
        Jet { layout, coeffs }
    }

    pub fn constant(dim: usize, order: usize, c: T) -> Self {
        let mut j = Self::zero(dim, order);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(dim: usize, order: usize, var: usize, value: T) -> Self {
        assert!(var < dim, "variable index out of range");
        let mut j = Self::constant(dim, order, value);
        if order > 0 {
            j.coeffs[1 + var] = T::one();
        }
        j
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<T>) -> Result<Self> {
        let layout = layout(dim, order);
        if coeffs.len() != layout.len() {
            return Err(Error::DimensionMismatch(coeffs.len(), layout.len()));
        }
        Ok(Jet { layout, coeffs })
    }

    /// Builds a jet from a function of the multi-index.
    pub fn from_fn(dim: usize, order: usize, mut f: impl FnMut(&[u8]) -> T) -> Self {
        let layout = layout(dim, order);
        let coeffs = (0..layout.len()).map(|k| f(layout.exponent(k))).collect();
        Jet { layout, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    /// Taylor coefficient of the monomial `x^alpha`; zero outside the stored simplex.
    pub fn coeff(&self, alpha: &[usize]) -> T {
        self.layout
            .index_of(alpha)
            .map_or(T::zero(), |k| self.coeffs[k])
    }

    /// Value at the base point.
    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let layout = layout(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.truncate(self.order().min(other.order()));
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.truncate(self.order().min(other.order()));
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= *b;
        }
        Ok(out)
    }

    /// Truncated Cauchy product; the result has the smaller of the two orders.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let order = self.order().min(other.order());
        let layout = layout(self.dim(), order);
        let mut coeffs = vec![T::zero(); layout.len()];
        for &(i, j, k) in &layout.mul {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Ok(Jet { layout, coeffs })
    }

    /// Adds `a * b` into `self`, truncating `self` when needed.
    pub fn add_product(&mut self, a: &Self, b: &Self) -> Result<()> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        let order = self.order().min(a.order()).min(b.order());
        if order < self.order() {
            *self = self.truncate(order);
        }
        for &(i, j, k) in &self.layout.mul {
            self.coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Ok(())
    }

    /// Adds `c * other` into `self`, truncating `self` when needed.
    pub fn axpy(&mut self, c: T, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        if other.order() < self.order() {
            *self = self.truncate(other.order());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * *b;
        }
        Ok(())
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    pub fn add_constant(&self, c: T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    /// Formal partial derivative in variable `var`; the order drops by one.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.dim() {
            return Err(crate::error::structural(format!(
                "partial derivative in variable {var} of a {}-variable jet",
                self.dim()
            )));
        }
        if self.order() == 0 {
            return Err(Error::BudgetExhausted);
        }
        let layout = layout(self.dim(), self.order() - 1);
        let mut coeffs = vec![T::zero(); layout.len()];
        for &(dst, src, factor) in &self.layout.deriv[var] {
            coeffs[dst as usize] = self.coeffs[src as usize] * T::from_real(factor);
        }
        Ok(Jet { layout, coeffs })
    }

    /// Evaluates the truncated polynomial at displacement `h` from the base point.
    pub fn eval_at(&self, h: &[T]) -> T {
        assert_eq!(h.len(), self.dim());
        let mut total = T::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut term = *c;
            for (v, &e) in self.layout.exponent(k).iter().enumerate() {
                for _ in 0..e {
                    term *= h[v];
                }
            }
            total += term;
        }
        total
    }

    /// Composition `f ∘ self`, truncated at the order of `self`.
    pub fn apply(&self, f: Elementary) -> Result<Self> {
        let n = self.order();
        let a0 = self.value();
        if !a0.is_finite() {
            return Err(numeric("non-finite constant term"));
        }
        let zero = T::zero();
        let real_negative = a0.im() == 0.0 && a0.re() < 0.0;
        let mut d = vec![zero; n + 1];
        match f {
            Elementary::Exp => {
                let e = a0.exp();
                let mut fact = 1.0;
                for (k, dk) in d.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *dk = e / T::from_real(fact);
                }
            }
            Elementary::Ln => {
                if a0 == zero || (T::IS_REAL && real_negative) {
                    return Err(numeric("logarithm outside its domain"));
                }
                d[0] = a0.ln();
                let inv = a0.recip();
                let mut p = inv;
                for (k, dk) in d.iter_mut().enumerate().skip(1) {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *dk = p * T::from_real(sign / k as f64);
                    p *= inv;
                }
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, c) = (a0.sin(), a0.cos());
                let cycle = if f == Elementary::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                let mut fact = 1.0;
                for (k, dk) in d.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *dk = cycle[k % 4] / T::from_real(fact);
                }
            }
            Elementary::Pow(r) => {
                let integral = r.fract() == 0.0;
                if a0 == zero && !(integral && r >= 0.0) {
                    return Err(numeric("power of zero base"));
                }
                if T::IS_REAL && real_negative && !integral {
                    return Err(numeric("fractional power of a negative number"));
                }
                if a0 == zero {
                    // Integer power of a jet vanishing at the base point.
                    return self.integer_power(r as usize);
                }
                d[0] = if integral && T::IS_REAL {
                    a0.powi(r as i32)
                } else {
                    a0.powf(r)
                };
                let inv = a0.recip();
                for k in 1..=n {
                    d[k] = d[k - 1] * inv * T::from_real((r - (k as f64 - 1.0)) / k as f64);
                }
            }
            Elementary::Recip => {
                if a0 == zero {
                    return Err(numeric("reciprocal of a jet with zero constant term"));
                }
                let inv = a0.recip();
                d[0] = inv;
                for k in 1..=n {
                    d[k] = -d[k - 1] * inv;
                }
            }
        }
        let mut shifted = self.clone();
        shifted.coeffs[0] = zero;
        let mut acc = Jet::constant(self.dim(), n, d[n]);
        for k in (0..n).rev() {
            acc = acc.try_mul(&shifted)?;
            acc.coeffs[0] += d[k];
        }
        Ok(acc)
    }

    fn integer_power(&self, p: usize) -> Result<Self> {
        let mut acc = Jet::constant(self.dim(), self.order(), T::one());
        for _ in 0..p {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Result<Self> {
        self.apply(Elementary::Exp)
    }

    pub fn ln(&self) -> Result<Self> {
        self.apply(Elementary::Ln)
    }

    pub fn sin(&self) -> Result<Self> {
        self.apply(Elementary::Sin)
    }

    pub fn cos(&self) -> Result<Self> {
        self.apply(Elementary::Cos)
    }

    pub fn powf(&self, r: f64) -> Result<Self> {
        self.apply(Elementary::Pow(r))
    }

    pub fn recip(&self) -> Result<Self> {
        self.apply(Elementary::Recip)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.recip()?)
    }
}

impl Jet<f64> {
    pub fn to_complex(&self) -> Jet<Complex64> {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }
}

impl Jet<Complex64> {
    pub fn re(&self) -> Jet<f64> {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c.re).collect(),
        }
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<T: Scalar> std::ops::$trait<&Jet<T>> for &Jet<T> {
            type Output = Jet<T>;

            fn $method(self, rhs: &Jet<T>) -> Jet<T> {
                self.$checked(rhs).expect("jet dimension mismatch")
            }
        }
    };
}

jet_binop!(Add, add, try_add);
jet_binop!(Sub, sub, try_sub);
jet_binop!(Mul, mul, try_mul);

impl<T: Scalar> std::ops::Neg for &Jet<T> {
    type Output = Jet<T>;

    fn neg(self) -> Jet<T> {
        Jet::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(order: usize) -> Jet {
        Jet::variable(2, order, 0, 0.0)
    }

    fn y(order: usize) -> Jet {
        Jet::variable(2, order, 1, 0.0)
    }

    #[test]
    fn layout_counts_match_simplex() {
        // C(dim + order, dim)
        assert_eq!(layout(4, 6).len(), 210);
        assert_eq!(layout(3, 2).len(), 10);
        assert_eq!(layout(1, 5).len(), 6);
        assert_eq!(layout(4, 6).count_up_to(1), 5);
    }

    #[test]
    fn product_of_linear_factors() {
        let one = Jet::constant(2, 2, 1.0);
        let p = &(&one + &x(2)) * &(&one + &y(2));
        assert_eq!(p.coeff(&[0, 0]), 1.0);
        assert_eq!(p.coeff(&[1, 0]), 1.0);
        assert_eq!(p.coeff(&[0, 1]), 1.0);
        assert_eq!(p.coeff(&[1, 1]), 1.0);
        assert_eq!(p.coeff(&[2, 0]), 0.0);
        assert_eq!(p.coeff(&[0, 2]), 0.0);
    }

    #[test]
    fn product_with_one_is_identity() {
        let j = Jet::from_fn(3, 3, |a| a.iter().map(|&e| e as f64 + 0.5).product());
        let one = Jet::constant(3, 3, 1.0);
        assert_eq!((&j * &one).coeffs(), j.coeffs());
    }

    #[test]
    fn product_truncates_high_degree() {
        let a = &x(2) + &(&x(2) * &x(2));
        let p = &a * &x(2);
        assert_eq!(p.coeff(&[2, 0]), 1.0);
        assert!(p.coeffs().iter().enumerate().all(|(k, &c)| {
            let e = p.layout().exponent(k);
            c == if e == [2, 0] { 1.0 } else { 0.0 }
        }));
    }

    #[test]
    fn mixed_orders_truncate_to_minimum() {
        let a = Jet::constant(2, 5, 2.0);
        let b = Jet::constant(2, 2, 3.0);
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).order(), 2);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Jet::<f64>::constant(2, 2, 1.0);
        let b = Jet::<f64>::constant(3, 2, 1.0);
        assert!(matches!(a.try_mul(&b), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn partial_of_monomials() {
        let x2y = &(&x(3) * &x(3)) * &y(3);
        let d = x2y.partial(0).unwrap();
        assert_eq!(d.order(), 2);
        assert_eq!(d.coeff(&[1, 1]), 2.0);
        assert_eq!(d.max_abs(), 2.0);

        let c = Jet::constant(2, 2, 7.0);
        assert!(c.partial(0).unwrap().is_zero());

        let f = &x(2) + &(&y(2) * &y(2));
        let dy = f.partial(1).unwrap();
        assert_eq!(dy.order(), 1);
        assert_eq!(dy.coeff(&[0, 1]), 2.0);
        assert_eq!(dy.coeff(&[0, 0]), 0.0);
    }

    #[test]
    fn partial_of_order_zero_exhausts_budget() {
        let c = Jet::constant(2, 0, 1.0);
        assert_eq!(c.partial(0).unwrap_err(), Error::BudgetExhausted);
    }

    #[test]
    fn elementary_series() {
        let e = x(2).exp().unwrap();
        assert_eq!(e.coeffs()[..1], [1.0]);
        assert_eq!(e.coeff(&[1, 0]), 1.0);
        assert_eq!(e.coeff(&[2, 0]), 0.5);

        let one_plus_x = x(2).add_constant(1.0);
        let r = one_plus_x.recip().unwrap();
        assert_eq!(r.coeff(&[0, 0]), 1.0);
        assert_eq!(r.coeff(&[1, 0]), -1.0);
        assert_eq!(r.coeff(&[2, 0]), 1.0);

        let sq = x(1).add_constant(1.0).powf(2.0).unwrap();
        assert_eq!(sq.coeff(&[0, 0]), 1.0);
        assert_eq!(sq.coeff(&[1, 0]), 2.0);
    }

    #[test]
    fn reciprocal_of_zero_constant_term_is_an_error() {
        assert!(matches!(x(3).recip(), Err(Error::Numeric(_))));
        assert!(matches!(x(3).ln(), Err(Error::Numeric(_))));
        assert!(matches!(x(3).add_constant(-1.0).powf(0.5), Err(Error::Numeric(_))));
    }

    #[test]
    fn integer_power_of_vanishing_jet() {
        let p = x(4).powf(3.0).unwrap();
        assert_eq!(p.coeff(&[3, 0]), 1.0);
        assert_eq!(p.coeff(&[0, 0]), 0.0);
    }

    #[test]
    fn complex_jets() {
        let z = Jet::<Complex64>::variable(1, 3, 0, Complex64::new(0.0, 1.0));
        let e = z.exp().unwrap();
        let expected = Complex64::new(0.0, 1.0).exp();
        assert!((e.value() - expected).norm() < 1e-15);
        assert!((e.coeff(&[3]) - expected / 6.0).norm() < 1e-15);
    }

    #[test]
    fn sin_cos_pythagoras() {
        let a = Jet::from_fn(2, 5, |e| 0.3 / (1.0 + e[0] as f64 + 2.0 * e[1] as f64));
        let s = a.sin().unwrap();
        let c = a.cos().unwrap();
        let one = &(&s * &s) + &(&c * &c);
        assert!((one.value() - 1.0).abs() < 1e-15);
        assert!(one.coeffs()[1..].iter().all(|v| v.abs() < 1e-14));
    }
}
