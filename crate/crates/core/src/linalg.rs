//! Small dense matrices with jet entries, and numeric rank helpers.

use nalgebra::{ComplexField, DMatrix};

use crate::error::{numeric, structural, Result};
use crate::jet::Jet;

/// Row-major matrix of real jets sharing one dimension.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Jet>) -> Result<Self> {
        if data.len() != rows * cols || data.is_empty() {
            return Err(structural(format!(
                "jet matrix {rows}x{cols} given {} entries",
                data.len()
            )));
        }
        Ok(JetMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Result<Self> {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, data)
    }

    pub fn identity(n: usize, dim: usize, order: usize) -> Self {
        JetMatrix::from_fn(n, n, |i, j| {
            Jet::constant(dim, order, if i == j { 1.0 } else { 0.0 })
        })
        .expect("identity is well formed")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn dim(&self) -> usize {
        self.data[0].dim()
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn into_entries(self) -> Vec<Jet> {
        self.data
    }

    /// Base-point values.
    pub fn constant_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn transpose(&self) -> Self {
        JetMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
            .expect("transpose is well formed")
    }

    pub fn mul(&self, other: &JetMatrix) -> Result<JetMatrix> {
        if self.cols != other.rows {
            return Err(structural(format!(
                "matrix product {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let order = self.order().min(other.order());
        let dim = self.dim();
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Jet::zero(dim, order);
                for k in 0..self.cols {
                    acc.add_product(self.get(i, k), other.get(k, j))?;
                }
                data.push(acc);
            }
        }
        JetMatrix::new(self.rows, other.cols, data)
    }

    fn sub(&self, other: &JetMatrix) -> Result<JetMatrix> {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<Vec<_>>>()?;
        JetMatrix::new(self.rows, self.cols, data)
    }

    fn scale(&self, c: f64) -> JetMatrix {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|j| j.scale(c)).collect(),
        }
    }

    /// Inverse of a square jet matrix: the base-point matrix is inverted
    /// numerically and the higher coefficients follow from the Newton
    /// recursion `X ← X(2I − AX)`, which doubles the number of correct
    /// orders per step and is exact in the coefficients.
    pub fn inverse(&self) -> Result<JetMatrix> {
        if self.rows != self.cols {
            return Err(structural("inverse of a non-square jet matrix"));
        }
        let n = self.rows;
        let dim = self.dim();
        let order = self.order();
        let a0 = self.constant_part();
        let inv0 = a0
            .try_inverse()
            .ok_or_else(|| numeric("singular matrix at the base point"))?;
        if inv0.iter().any(|v| !v.is_finite()) {
            return Err(numeric("singular matrix at the base point"));
        }
        let mut x = JetMatrix::from_fn(n, n, |i, j| Jet::constant(dim, order, inv0[(i, j)]))?;
        let two = JetMatrix::identity(n, dim, order).scale(2.0);
        let mut correct = 0usize;
        while correct < order {
            let ax = self.mul(&x)?;
            x = x.mul(&two.sub(&ax)?)?;
            correct = 2 * correct + 1;
        }
        Ok(x)
    }

    /// Least-squares left inverse `(AᵀA)⁻¹Aᵀ` of a tall matrix of full column rank.
    pub fn left_inverse(&self) -> Result<JetMatrix> {
        let at = self.transpose();
        let gram = at.mul(self)?;
        gram.inverse()?.mul(&at)
    }
}

/// Singular values of a real matrix, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    sorted_singular_values(m.clone())
}

fn sorted_singular_values<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values of a complex matrix, largest first.
pub fn singular_values_complex(m: &DMatrix<num_complex::Complex64>) -> Vec<f64> {
    sorted_singular_values(m.clone())
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numeric_rank(singular: &[f64], rel_tol: f64) -> usize {
    let top = singular.first().copied().unwrap_or(0.0);
    if top <= f64::MIN_POSITIVE {
        return 0;
    }
    singular.iter().filter(|&&s| s > rel_tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize, order: usize, seed: f64) -> Jet {
        Jet::from_fn(dim, order, |e| {
            let s: f64 = e.iter().enumerate().map(|(i, &k)| (i + 1) as f64 * k as f64).sum();
            (seed + 0.37 * s).sin() / (1.0 + s)
        })
    }

    #[test]
    fn inverse_times_matrix_is_identity_to_all_orders() {
        let m = JetMatrix::from_fn(3, 3, |i, j| {
            let base = sample(2, 5, (3 * i + j) as f64);
            if i == j {
                base.add_constant(3.0)
            } else {
                base
            }
        })
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = id.get(i, j);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((e.value() - expect).abs() < 1e-13);
                assert!(e.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn left_inverse_of_tall_matrix() {
        let m = JetMatrix::from_fn(5, 2, |i, j| sample(3, 4, (i * 2 + j) as f64 + 0.5)).unwrap();
        let l = m.left_inverse().unwrap();
        let id = l.mul(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j).value() - expect).abs() < 1e-12);
                assert!(id.get(i, j).coeffs()[1..].iter().all(|c| c.abs() < 1e-10));
            }
        }
    }

    #[test]
    fn singular_base_point_is_reported() {
        let m = JetMatrix::from_fn(2, 2, |_, _| Jet::constant(2, 2, 1.0)).unwrap();
        assert!(m.inverse().is_err());
    }

    #[test]
    fn rank_counts_relative_singular_values() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(numeric_rank(&singular_values(&m), 1e-10), 1);
        assert_eq!(numeric_rank(&[0.0, 0.0], 1e-10), 0);
    }
}
