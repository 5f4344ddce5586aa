use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::jet::Jet;

/// Real polynomial in `dim` variables, stored as `(exponents, coefficient)` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial { dim, terms: vec![(vec![0; dim], c)] }
    }

    /// Every monomial of degree `≤ degree` with a coefficient drawn from
    /// `[-amplitude, amplitude]`.
    pub fn random(dim: usize, degree: usize, amplitude: f64, rng: &mut impl Rng) -> Self {
        let terms = monomials(dim, degree)
            .into_iter()
            .map(|e| (e, rng.gen_range(-amplitude..=amplitude)))
            .collect();
        Polynomial { dim, terms }
    }

    /// `x ↦ p(x − c)`.
    pub fn shifted(&self, c: &[f64]) -> Self {
        let mut acc: std::collections::BTreeMap<Vec<u32>, f64> = std::collections::BTreeMap::new();
        for (e, coef) in &self.terms {
            // expand Π (x_i − c_i)^{k_i} one variable at a time
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![0; self.dim], *coef)];
            for (i, &k) in e.iter().enumerate() {
                let mut next = Vec::new();
                for (mono, v) in &partial {
                    let mut binom = 1.0;
                    for j in 0..=k {
                        let mut m = mono.clone();
                        m[i] = j;
                        next.push((m, v * binom * (-c[i]).powi((k - j) as i32)));
                        binom = binom * f64::from(k - j) / f64::from(j + 1);
                    }
                }
                partial = next;
            }
            for (m, v) in partial {
                *acc.entry(m).or_insert(0.0) += v;
            }
        }
        Polynomial { dim: self.dim, terms: acc.into_iter().collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Taylor jet of the polynomial about `point`.
    pub fn jet(&self, point: &[f64], order: usize) -> Jet {
        let max_deg = self.terms.iter().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0) as usize;
        let powers: Vec<Vec<Jet>> = (0..self.dim)
            .map(|i| {
                let x = Jet::variable(self.dim, order, i, point[i]);
                let mut p = vec![Jet::constant(self.dim, order, 1.0)];
                for k in 1..=max_deg {
                    p.push(&p[k - 1] * &x);
                }
                p
            })
            .collect();
        let mut acc = Jet::zero(self.dim, order);
        for (e, c) in &self.terms {
            let mut m = Jet::constant(self.dim, order, *c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &powers[i][k as usize];
                }
            }
            acc = &acc + &m;
        }
        acc
    }
}

fn monomials(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    fn rec(pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k as u32;
            rec(pos + 1, left - k, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, degree, &mut cur, &mut out);
    out
}

/// A change of scale `ĝ = e^{2Υ}g` with polynomial `Υ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalScale {
    pub upsilon: Polynomial,
}

impl ConformalScale {
    pub fn new(upsilon: Polynomial) -> Self {
        ConformalScale { upsilon }
    }

    pub fn trivial(dim: usize) -> Self {
        ConformalScale { upsilon: Polynomial::zero(dim) }
    }

    /// Random quadratic `Υ` with coefficients in `[-0.3, 0.3]`.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        ConformalScale { upsilon: Polynomial::random(dim, 2, 0.3, rng) }
    }

    pub fn jet(&self, point: &[f64], order: usize) -> Jet {
        self.upsilon.jet(point, order)
    }

    /// The same profile moved so that it is centred at `c`.
    pub fn centred_at(&self, c: &[f64]) -> Self {
        ConformalScale { upsilon: self.upsilon.shifted(c) }
    }

    /// `Υ_a = ∂_a Υ`, order reduced by one.
    pub fn gradient(&self, point: &[f64], order: usize) -> Vec<Jet> {
        let u = self.jet(point, order + 1);
        (0..self.upsilon.dim).map(|i| u.partial(i).expect("order ≥ 1")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn shift_moves_the_argument() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = Polynomial::random(3, 3, 1.0, &mut rng);
        let c = [0.4, -1.3, 2.0];
        let q = p.shifted(&c);
        for x in [[0.0, 0.0, 0.0], [1.1, 0.2, -0.7], [3.0, -2.0, 5.0]] {
            let y: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
            assert!((q.eval(&x) - p.eval(&y)).abs() < 1e-10 * (1.0 + p.eval(&y).abs()));
        }
    }

    #[test]
    fn jet_of_polynomial_matches_evaluation() {
        let p = Polynomial {
            dim: 2,
            terms: vec![(vec![2, 1], 3.0), (vec![0, 0], -1.0), (vec![1, 0], 0.5)],
        };
        let x0 = [0.4, -0.7];
        let j = p.jet(&x0, 3);
        assert!((j.value() - p.eval(&x0)).abs() < 1e-14);
        let h = [0.01, 0.02];
        let direct = p.eval(&[x0[0] + h[0], x0[1] + h[1]]);
        assert!((j.eval_at(&h) - direct).abs() < 1e-14);
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(4, 3).len(), 35);
        assert_eq!(monomials(2, 2).len(), 6);
    }
}
