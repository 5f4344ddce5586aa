use crate::error::{structural, Result};
use crate::jet::Jet;
use crate::tensor::{Flavor, MetricPack, TensorJet, Variance};

/// A torsion-free connection given by its Christoffel symbols `Γ^a_{bc}`.
#[derive(Debug, Clone)]
pub struct Connection {
    pub gamma: TensorJet,
}

impl Connection {
    /// Levi-Civita connection of `g`; the order drops by one.
    pub fn levi_civita(mp: &MetricPack) -> Result<Self> {
        let g = &mp.g;
        let n = g.dim();
        let dg: Vec<TensorJet> = (0..n).map(|c| g.partial(c)).collect::<Result<_>>()?;
        // lowered symbols Γ_{dbc} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
        let lowered = TensorJet::from_fn(n, vec![Variance::Down; 3], 2.0, Flavor::Conformal, |i| {
            let (d, b, c) = (i[0], i[1], i[2]);
            let s = dg[b].get(&[d, c]) + dg[c].get(&[d, b]);
            (&s - dg[d].get(&[b, c])).scale(0.5)
        });
        let gamma = mp.ginv.contract(&lowered, &[(1, 0)])?.with_weight(0.0);
        Ok(Connection { gamma })
    }

    pub fn from_symbols(gamma: TensorJet) -> Result<Self> {
        if gamma.valence() != [Variance::Up, Variance::Down, Variance::Down] {
            return Err(structural("Christoffel symbols need valence (Up, Down, Down)"));
        }
        Ok(Connection { gamma })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn order(&self) -> usize {
        self.gamma.order()
    }

    /// Projective change `Γ̂^c_ab = Γ^c_ab + δ^c_a Υ_b + δ^c_b Υ_a`.
    pub fn projective_change(&self, upsilon_grad: &[Jet]) -> Result<Self> {
        let n = self.dim();
        let order = self.order().min(upsilon_grad[0].order());
        let gamma = TensorJet::try_from_fn(n, self.gamma.valence().to_vec(), 0.0, self.gamma.flavor(), |i| {
            let (c, a, b) = (i[0], i[1], i[2]);
            let mut v = self.gamma.get(i).truncate(order);
            if c == a {
                v = v.try_add(&upsilon_grad[b])?;
            }
            if c == b {
                v = v.try_add(&upsilon_grad[a])?;
            }
            Ok(v)
        })?;
        Ok(Connection { gamma })
    }

    /// Torsion `Γ^a_{bc} − Γ^a_{cb}`, as a max-abs number.
    pub fn torsion(&self) -> Result<f64> {
        Ok(self.gamma.max_abs_diff(&self.gamma.permute(&[0, 2, 1])?))
    }

    /// `R_{ab}{}^c{}_d` with `[∇_a, ∇_b]v^c = R_{ab}{}^c{}_d v^d`; order drops by one.
    pub fn riemann(&self) -> Result<TensorJet> {
        let n = self.dim();
        let gm = &self.gamma;
        let dgamma: Vec<TensorJet> = (0..n).map(|c| gm.partial(c)).collect::<Result<_>>()?;
        TensorJet::try_from_fn(
            n,
            vec![Variance::Down, Variance::Down, Variance::Up, Variance::Down],
            0.0,
            gm.flavor(),
            |i| {
                let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
                // R^c_{dab} = ∂_a Γ^c_{bd} − ∂_b Γ^c_{ad} + Γ^c_{ae} Γ^e_{bd} − Γ^c_{be} Γ^e_{ad}
                let mut v = dgamma[a].get(&[c, b, d]).try_sub(dgamma[b].get(&[c, a, d]))?;
                for e in 0..n {
                    v.add_product(gm.get(&[c, a, e]), gm.get(&[e, b, d]))?;
                    v.add_product(&gm.get(&[c, b, e]).neg(), gm.get(&[e, a, d]))?;
                }
                Ok(v)
            },
        )
    }
}

/// `∇_a t_{...}`; the derivative index is prepended and the order drops by one.
/// Weighted tensors are trivialized in the current scale, so the weight adds
/// no term.
pub fn covariant_derivative(t: &TensorJet, conn: &Connection) -> Result<TensorJet> {
    let n = t.dim();
    if conn.dim() != n {
        return Err(crate::error::Error::DimensionMismatch(conn.dim(), n));
    }
    if t.order() == 0 {
        return Err(crate::error::Error::BudgetExhausted);
    }
    let r = t.rank();
    let partials: Vec<TensorJet> = (0..n).map(|a| t.partial(a)).collect::<Result<_>>()?;
    let gamma = &conn.gamma;
    let neg_gamma = gamma.neg();
    let mut valence = Vec::with_capacity(r + 1);
    valence.push(Variance::Down);
    valence.extend_from_slice(t.valence());
    let mut src = vec![0; r];
    TensorJet::try_from_fn(n, valence, t.weight(), t.flavor(), |i| {
        let a = i[0];
        let idx = &i[1..];
        let mut v = partials[a].get(idx).clone();
        src.copy_from_slice(idx);
        for s in 0..r {
            for e in 0..n {
                src[s] = e;
                match t.valence()[s] {
                    Variance::Down => v.add_product(neg_gamma.get(&[e, a, idx[s]]), t.get(&src))?,
                    Variance::Up => v.add_product(gamma.get(&[idx[s], a, e]), t.get(&src))?,
                }
            }
            src[s] = idx[s];
        }
        Ok(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chart_by_name, metric_pack};

    #[test]
    fn metric_is_parallel() {
        let chart = chart_by_name("perturbed").unwrap();
        let mp = metric_pack(chart.as_ref(), &[0.1, -0.2, 0.05, 0.2], 4).unwrap();
        let conn = Connection::levi_civita(&mp).unwrap();
        let dg = covariant_derivative(&mp.g, &conn).unwrap();
        assert!(dg.max_abs() < 1e-12, "{}", dg.max_abs());
        assert!(conn.torsion().unwrap() < 1e-14);
    }
}
