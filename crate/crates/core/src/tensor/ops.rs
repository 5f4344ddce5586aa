use super::{indices, MetricPack, TensorJet, Variance};
use crate::error::{structural, Result};
use crate::jet::{Jet, Scalar};

/// All permutations of `0..k` with their signs.
pub fn permutations_with_sign(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let k = used.len();
        if prefix.len() == k {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..k {
            if used[i] {
                continue;
            }
            // Number of unused elements smaller than i gives the inversions added.
            let inv = (0..i).filter(|&j| !used[j]).count();
            used[i] = true;
            prefix.push(i);
            rec(prefix, used, if inv % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], 1.0, &mut out);
    out
}

impl<T: Scalar> TensorJet<T> {
    fn check_slots(&self, slots: &[usize]) -> Result<()> {
        let r = self.rank();
        for (i, &s) in slots.iter().enumerate() {
            if s >= r || slots[..i].contains(&s) {
                return Err(structural(format!("invalid slot list {slots:?} for rank {r}")));
            }
            if self.valence[s] != self.valence[slots[0]] {
                return Err(structural(format!("slots {slots:?} have mixed variance")));
            }
        }
        Ok(())
    }

    fn average_over_slots(&self, slots: &[usize], signed: bool) -> Result<Self> {
        self.check_slots(slots)?;
        if slots.len() < 2 {
            return Ok(self.clone());
        }
        let perms = permutations_with_sign(slots.len());
        let norm = 1.0 / perms.len() as f64;
        let order = self.order();
        let mut src = vec![0; self.rank()];
        let comps = indices(self.dim, self.rank())
            .map(|idx| {
                let mut acc = Jet::zero(self.dim, order);
                src.copy_from_slice(&idx);
                for (p, sign) in &perms {
                    for (j, &s) in slots.iter().enumerate() {
                        src[s] = idx[slots[p[j]]];
                    }
                    let c = if signed { *sign * norm } else { norm };
                    acc.axpy(T::from_real(c), self.get(&src)).expect("same dimension");
                }
                acc
            })
            .collect();
        Ok(TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            weight: self.weight,
            flavor: self.flavor,
            comps,
        })
    }

    /// Average over all permutations of `slots`.
    pub fn symmetrize(&self, slots: &[usize]) -> Result<Self> {
        self.average_over_slots(slots, false)
    }

    /// Signed average over all permutations of `slots`.
    pub fn antisymmetrize(&self, slots: &[usize]) -> Result<Self> {
        self.average_over_slots(slots, true)
    }

    /// Trace over two slots. Like-variance slots use the metric pack.
    pub fn trace(&self, i: usize, j: usize, metric: Option<&MetricPack<T>>) -> Result<Self> {
        if i == j || i >= self.rank() || j >= self.rank() {
            return Err(structural(format!("invalid trace slots {i}, {j}")));
        }
        let (vi, vj) = (self.valence[i], self.valence[j]);
        if vi != vj {
            return self.self_contract(i, j);
        }
        let mp = metric.ok_or_else(|| structural("trace over like-variance slots needs a metric"))?;
        let m = match vi {
            Variance::Down => &mp.ginv,
            Variance::Up => &mp.g,
        };
        m.contract(self, &[(0, i), (1, j)])
    }

    /// Raises slot `slot` with the inverse metric, keeping its position.
    pub fn raise(&self, slot: usize, metric: &MetricPack<T>) -> Result<Self> {
        if self.valence.get(slot) != Some(&Variance::Down) {
            return Err(structural(format!("slot {slot} is not covariant")));
        }
        metric.ginv.contract(self, &[(1, slot)])?.move_slot(0, slot)
    }

    /// Lowers slot `slot` with the metric, keeping its position.
    pub fn lower(&self, slot: usize, metric: &MetricPack<T>) -> Result<Self> {
        if self.valence.get(slot) != Some(&Variance::Up) {
            return Err(structural(format!("slot {slot} is not contravariant")));
        }
        metric.g.contract(self, &[(1, slot)])?.move_slot(0, slot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Flavor;

    fn t2(vals: [[f64; 2]; 2]) -> TensorJet {
        TensorJet::from_fn(2, TensorJet::<f64>::covariant(2), 0.0, Flavor::Conformal, |i| {
            Jet::constant(2, 1, vals[i[0]][i[1]])
        })
    }

    #[test]
    fn signs_of_permutations() {
        let p = permutations_with_sign(3);
        assert_eq!(p.len(), 6);
        let sum: f64 = p.iter().map(|x| x.1).sum();
        assert_eq!(sum, 0.0);
        assert!(p.contains(&(vec![1, 0, 2], -1.0)));
        assert!(p.contains(&(vec![1, 2, 0], 1.0)));
    }

    #[test]
    fn antisymmetrize_example() {
        let t = t2([[0.0, 1.0], [0.0, 0.0]]);
        let a = t.antisymmetrize(&[0, 1]).unwrap();
        assert_eq!(a.value(&[0, 1]), 0.5);
        assert_eq!(a.value(&[1, 0]), -0.5);
        let s = t2([[1.0, 2.0], [2.0, 5.0]]);
        assert_eq!(s.antisymmetrize(&[0, 1]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn mixed_variance_is_rejected() {
        let t = TensorJet::<f64>::zeros(2, vec![Variance::Up, Variance::Down], 0.0, Flavor::Conformal, 1);
        assert!(t.symmetrize(&[0, 1]).is_err());
        assert!(t.trace(0, 1, None).is_ok());
        let d = t2([[1.0, 0.0], [0.0, 1.0]]);
        assert!(d.trace(0, 1, None).is_err());
    }
}
