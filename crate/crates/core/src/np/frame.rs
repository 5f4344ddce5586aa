use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{structural, Result};
use crate::jet::Jet;
use crate::tensor::{Flavor, MetricPack, TensorJet, Variance};

const RELATION_TOL: f64 = 1e-10;

/// Boost and spin weight of a frame element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoostSpin {
    pub boost: i32,
    pub spin: i32,
}

/// Double-null frame `{l, n, m, m̄}` with `g(l,n) = 1`, `g(m,m̄) = −1` and all
/// other products zero. Components are contravariant in a fixed basis in
/// which the metric is `g`.
#[derive(Debug, Clone)]
pub struct NullFrame {
    pub l: [f64; 4],
    pub n: [f64; 4],
    pub m: [C; 4],
    g: [[f64; 4]; 4],
}

impl NullFrame {
    pub const L: BoostSpin = BoostSpin { boost: 1, spin: 0 };
    pub const N: BoostSpin = BoostSpin { boost: -1, spin: 0 };
    pub const M: BoostSpin = BoostSpin { boost: 0, spin: 1 };
    pub const MBAR: BoostSpin = BoostSpin { boost: 0, spin: -1 };

    /// Checks the product relations against `g`.
    pub fn new(l: [f64; 4], n: [f64; 4], m: [C; 4], g: [[f64; 4]; 4]) -> Result<Self> {
        let f = NullFrame { l, n, m, g };
        let err = f.relation_residual();
        if err > RELATION_TOL {
            return Err(structural(format!("null frame relations violated by {err:e}")));
        }
        Ok(f)
    }

    /// `l = (e₀+e₁)/√2`, `n = (e₀−e₁)/√2`, `m = (e₂+ie₃)/√2` from a basis
    /// with `g(e₀,e₀) = 1` and `g(eᵢ,eᵢ) = −1` otherwise.
    pub fn from_orthonormal(e: [[f64; 4]; 4], g: [[f64; 4]; 4]) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let l = std::array::from_fn(|i| s * (e[0][i] + e[1][i]));
        let n = std::array::from_fn(|i| s * (e[0][i] - e[1][i]));
        let m = std::array::from_fn(|i| C::new(s * e[2][i], s * e[3][i]));
        Self::new(l, n, m, g)
    }

    /// Built on the standard basis with `g = diag(1, −1, −1, −1)`.
    pub fn canonical() -> Self {
        let mut e = [[0.0; 4]; 4];
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            e[i][i] = 1.0;
            g[i][i] = if i == 0 { 1.0 } else { -1.0 };
        }
        Self::from_orthonormal(e, g).expect("canonical frame")
    }

    pub fn mbar(&self) -> [C; 4] {
        self.m.map(|z| z.conj())
    }

    /// `l → λl`, `n → λ⁻¹n`.
    pub fn boost(&self, lambda: f64) -> Result<Self> {
        Self::new(self.l.map(|x| lambda * x), self.n.map(|x| x / lambda), self.m, self.g)
    }

    /// `m → e^{iθ} m`.
    pub fn spin(&self, theta: f64) -> Result<Self> {
        let r = C::from_polar(1.0, theta);
        Self::new(self.l, self.n, self.m.map(|z| r * z), self.g)
    }

    /// The metric the frame was built against.
    pub fn metric(&self) -> [[f64; 4]; 4] {
        self.g
    }

    pub fn inner(&self, a: &[C; 4], b: &[C; 4]) -> C {
        let mut s = C::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                s += a[i] * self.g[i][j] * b[j];
            }
        }
        s
    }

    /// `max |g(eᵢ,eⱼ) − ηᵢⱼ|` over the frame `(l, n, m, m̄)`.
    pub fn relation_residual(&self) -> f64 {
        let v = self.vectors();
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let eta = match (i, j) {
                    (0, 1) | (1, 0) => 1.0,
                    (2, 3) | (3, 2) => -1.0,
                    _ => 0.0,
                };
                worst = worst.max((self.inner(&v[i], &v[j]) - eta).norm());
            }
        }
        worst
    }

    /// `[l, n, m, m̄]` as complex vectors.
    pub fn vectors(&self) -> [[C; 4]; 4] {
        [self.l.map(C::from), self.n.map(C::from), self.m, self.mbar()]
    }

    /// `g_ab v^b`.
    pub fn lower(&self, v: &[C; 4]) -> [C; 4] {
        std::array::from_fn(|a| (0..4).map(|b| self.g[a][b] * v[b]).sum())
    }

    /// `g_ab = l_a n_b + n_a l_b − m_a m̄_b − m̄_a m_b`, with the covectors
    /// obtained from the supplied metric.
    pub fn frame_metric(&self) -> [[f64; 4]; 4] {
        let [l, n, m, mb] = self.vectors().map(|v| self.lower(&v));
        std::array::from_fn(|a| std::array::from_fn(|b| (l[a] * n[b] + n[a] * l[b] - m[a] * mb[b] - mb[a] * m[b]).re))
    }

    /// Sign pattern `(positive, negative)` of the frame metric's eigenvalues.
    pub fn signature(&self) -> (usize, usize) {
        let g = nalgebra::Matrix4::from_fn(|i, j| self.frame_metric()[i][j]);
        let ev = g.symmetric_eigen().eigenvalues;
        (ev.iter().filter(|x| **x > 0.0).count(), ev.iter().filter(|x| **x < 0.0).count())
    }

    pub(crate) fn metric_pack(&self) -> MetricPack<C> {
        let g = nalgebra::Matrix4::from_fn(|i, j| self.g[i][j]);
        let ginv = g.try_inverse().expect("frame metric is nondegenerate");
        let mk = |valence: Vec<Variance>, weight: f64, f: &dyn Fn(usize, usize) -> f64| {
            TensorJet::from_fn(4, valence, weight, Flavor::Conformal, |i| Jet::constant(4, 0, C::from(f(i[0], i[1]))))
        };
        MetricPack {
            g: mk(vec![Variance::Down; 2], 2.0, &|i, j| g[(i, j)]),
            ginv: mk(vec![Variance::Up; 2], -2.0, &|i, j| ginv[(i, j)]),
        }
    }

    /// Covector `v_a` as a constant tensor.
    pub(crate) fn covector(&self, v: &[C; 4]) -> TensorJet<C> {
        let low = self.lower(v);
        TensorJet::from_fn(4, vec![Variance::Down], 0.0, Flavor::Conformal, |i| Jet::constant(4, 0, low[i[0]]))
    }

    pub(crate) fn covectors(&self) -> [TensorJet<C>; 4] {
        self.vectors().map(|v| self.covector(&v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_frame_relations_hold() {
        let f = NullFrame::canonical();
        assert!(f.relation_residual() < 1e-15);
        let (a, b) = (f.frame_metric(), f.metric());
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-15);
            }
        }
        assert_eq!(f.signature(), (1, 3));
    }

    #[test]
    fn boosts_and_spins_preserve_relations() {
        let f = NullFrame::canonical().boost(2.5).unwrap().spin(0.7).unwrap();
        assert!(f.relation_residual() < 1e-14);
    }

    #[test]
    fn wrong_metric_is_rejected() {
        let f = NullFrame::canonical();
        let mut g = f.metric();
        g[0][0] = -1.0;
        assert!(NullFrame::new(f.l, f.n, f.m, g).is_err());
    }
}
