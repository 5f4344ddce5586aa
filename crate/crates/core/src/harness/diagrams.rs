use super::{ComplexSpec, EquivalenceData, OperatorNode, SectionSampler};
use crate::error::{structural, Result};
use crate::tensor::{Bundle, ShapeSpec};

/// Operators feeding the one-solution diagram: `E0 : V0 → V1`,
/// `C1 : V1 → Λ¹`, `D1 : Λ¹ → V1`, `H'1 : Λ² → Λ¹` and the twisted
/// differentials `d̃ : Λᵏ → Λᵏ⁺¹` for `k = 0..=n`.
pub struct OnesolOperators {
    pub e0: OperatorNode,
    pub c1: OperatorNode,
    pub d1: OperatorNode,
    pub h1prime: OperatorNode,
    pub d_tilde: Vec<OperatorNode>,
}

fn single(b: &Bundle) -> ShapeSpec {
    ShapeSpec::single(b.clone())
}

fn part(s: &ShapeSpec, i: usize) -> Result<Bundle> {
    s.parts.get(i).cloned().ok_or_else(|| structural(format!("{s} has no summand {i}")))
}

/// Top row `E0 → (id − D1C1; d̃C1) → (C1 −H'1; 0 d̃) → (0 d̃) → d̃ → …`,
/// truncated past the top forms, with its equivalence to the `d̃` row.
pub fn onesol_equivalence(ops: OnesolOperators, sampler: SectionSampler) -> Result<(ComplexSpec, EquivalenceData)> {
    let n = sampler.dim;
    let dt = &ops.d_tilde;
    if dt.len() < 5 {
        return Err(structural("the one-solution diagram needs d̃ up to degree four"));
    }
    let lam: Vec<Bundle> = (0..dt.len()).map(|k| part(&dt[k].source, 0)).collect::<Result<_>>()?;
    let top_form = part(&dt[dt.len() - 1].target, 0)?;
    let v0 = part(&ops.e0.source, 0)?;
    let v1 = part(&ops.e0.target, 0)?;
    let id = |b: &Bundle| OperatorNode::identity(n, single(b));
    let w: Vec<ShapeSpec> = lam.iter().chain(std::iter::once(&top_form)).map(single).collect();
    let v = [
        single(&v0),
        single(&v1),
        ShapeSpec::sum(vec![v1.clone(), lam[2].clone()]),
        ShapeSpec::sum(vec![lam[1].clone(), lam[3].clone()]),
    ];
    let (c1, d1, h1) = (&ops.c1, &ops.d1, &ops.h1prime);

    let k1 = OperatorNode::block(
        "(id − D1C1; d̃C1)",
        n,
        v[1].clone(),
        v[2].clone(),
        vec![vec![Some(id(&v1).minus(&d1.after(c1)?)?)], vec![Some(dt[1].after(c1)?)]],
    )?;
    let k2 = OperatorNode::block(
        "(C1 −H'1; 0 d̃)",
        n,
        v[2].clone(),
        v[3].clone(),
        vec![vec![Some(c1.clone()), Some(h1.scaled(-1.0).named("−H'1"))], vec![None, Some(dt[2].clone())]],
    )?;
    let k3 = OperatorNode::block("(0 d̃)", n, v[3].clone(), w[4].clone(), vec![vec![None, Some(dt[3].clone())]])?;
    let mut top_ops = vec![ops.e0.clone(), k1, k2, k3];
    top_ops.extend(dt[4..].iter().cloned());
    let top = ComplexSpec::new("top", top_ops, sampler.clone())?;
    let bottom = ComplexSpec::new("d̃", dt.clone(), sampler)?;
    let len = top.spaces();

    let mut c = vec![
        id(&v0),
        c1.clone(),
        OperatorNode::block("(0 id)", n, v[2].clone(), w[2].clone(), vec![vec![None, Some(id(&lam[2]))]])?,
        OperatorNode::block("(0 id)", n, v[3].clone(), w[3].clone(), vec![vec![None, Some(id(&lam[3]))]])?,
    ];
    let mut d = vec![
        id(&v0),
        d1.clone(),
        OperatorNode::block(
            "(D1H'1; id − d̃H'1)",
            n,
            w[2].clone(),
            v[2].clone(),
            vec![vec![Some(d1.after(h1)?)], vec![Some(id(&lam[2]).minus(&dt[1].after(h1)?)?)]],
        )?,
        OperatorNode::block("(0; id)", n, w[3].clone(), v[3].clone(), vec![vec![None], vec![Some(id(&lam[3]))]])?,
    ];
    let mut h = vec![
        OperatorNode::zero(n, v[1].clone(), v[0].clone()),
        OperatorNode::block("(id 0)", n, v[2].clone(), v[1].clone(), vec![vec![Some(id(&v1)), None]])?,
        OperatorNode::block(
            "(D1 0; −d̃ 0)",
            n,
            v[3].clone(),
            v[2].clone(),
            vec![vec![Some(d1.clone()), None], vec![Some(dt[1].scaled(-1.0).named("−d̃")), None]],
        )?,
    ];
    let mut h_prime = vec![
        OperatorNode::zero(n, w[1].clone(), w[0].clone()),
        h1.clone(),
        OperatorNode::zero(n, w[3].clone(), w[2].clone()),
    ];
    for l in 4..len {
        c.push(OperatorNode::identity(n, w[l].clone()));
        d.push(OperatorNode::identity(n, w[l].clone()));
    }
    for l in 3..len - 1 {
        h.push(OperatorNode::zero(n, top.space(l + 1).clone(), top.space(l).clone()));
        h_prime.push(OperatorNode::zero(n, w[l + 1].clone(), w[l].clone()));
    }
    let eq = EquivalenceData::new(top.clone(), bottom, c, d, h, h_prime)?;
    Ok((top, eq))
}

/// `E0 → id − E0H0 → H0` for a left inverse `H0` of `E0`, with its
/// equivalence to the zero complex (`H = (H0, id, E0)`, `C = D = 0`).
pub fn length_three(e0: OperatorNode, h0: OperatorNode, sampler: SectionSampler) -> Result<(ComplexSpec, EquivalenceData)> {
    let n = sampler.dim;
    let v = [e0.source.clone(), e0.target.clone(), e0.target.clone(), e0.source.clone()];
    let k1 = OperatorNode::identity(n, v[1].clone()).minus(&e0.after(&h0)?)?.named("id − E0H0");
    let top = ComplexSpec::new("top", vec![e0.clone(), k1, h0.clone()], sampler.clone())?;
    let zero = ShapeSpec::zero();
    let zero_op = || OperatorNode::zero(n, zero.clone(), zero.clone());
    let bottom = ComplexSpec::new("zero", (0..3).map(|_| zero_op()).collect(), sampler)?;
    let c = v.iter().map(|s| OperatorNode::zero(n, s.clone(), zero.clone())).collect();
    let d = v.iter().map(|s| OperatorNode::zero(n, zero.clone(), s.clone())).collect();
    let h = vec![h0, OperatorNode::identity(n, v[1].clone()), e0];
    let h_prime = (0..3).map(|_| zero_op()).collect();
    let eq = EquivalenceData::new(top.clone(), bottom, c, d, h, h_prime)?;
    Ok((top, eq))
}
