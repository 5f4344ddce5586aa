use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde_json::Value;

use super::{finish, load_chart, points_for, run_points, scales, Check, Needs, PointOutcome, SuiteConfig};
use crate::error::Result;
use crate::geometry::{covariant_derivative, metric_pack, transform_density, volume_form, ChartRef, ConformalScale};
use crate::harness::{check_complex, check_equivalence, section_residual, VerificationReport};
use crate::jet::Jet;
use crate::projective::{
    build_nosol_proj_complex, build_onesol_proj_complex, c1_proj, cdcomp_correction_proj, comp_rhs_proj, d1_proj,
    d_tilde_proj, dbar_proj, e0_proj, e1_proj, h1prime_proj, ProjectivePoint,
};
use crate::tensor::{Bundle, Flavor, TensorJet, Variance};

const RANK: Check = Check::new("genericity-rank", "rank(v ↦ W_ab^c_d v^d) = n", Needs::Always);
const COMP: Check = Check::new("e1-after-e0", "E1E0σ = −W_ab^c_d ∇_cσ + Y_dab σ", Needs::Always);
const C1E0: Check = Check::new("c1-after-e0", "C1E0σ = d̃σ", Needs::Generic);
const D1DT: Check = Check::new("d1-after-dtilde", "D1d̃σ = E0σ + Φ(Z)σ", Needs::Generic);
const DTDT: Check = Check::new("dtilde-squared", "d̃d̃σ = dZ σ", Needs::Generic);
const CD: Check = Check::new(
    "c1-after-d1",
    "C1D1τ = τ − H'1d̃τ − W̄^rs_a^p (2Φ_pr τ_s + ½ dZ_rs τ_p)",
    Needs::Generic,
);
const WEYL_INV: Check = Check::new("weyl-change", "Ŵ_ab^c_d = W_ab^c_d", Needs::Always);
const Z_LAW: Check = Check::new("z-change", "Ẑ_a = Z_a − Υ_a", Needs::Generic);
const DENSITY: Check = Check::new("volume-density-parallel", "∇̂(e^{(n+1)Υ} ε) = 0", Needs::Always);
const NA_VECTOR: Check = Check::new(
    "connection-on-vectors",
    "∇̂_a φ^b = ∇_a φ^b + Υ_a φ^b + δ_a^b Υ_c φ^c",
    Needs::Always,
);
const INV_E0: Check = Check::new("invariance-E0", "Ê0(e^Υ σ) = e^Υ E0σ", Needs::Always);
const INV_DT: Check = Check::new("invariance-dtilde", "d̃̂(e^Υ τ) = e^Υ d̃τ on 0- and 1-forms", Needs::Generic);
const INV_D1: Check = Check::new("invariance-D1", "D̂1(e^Υ τ) = e^Υ D1τ", Needs::Generic);
const INV_C1: Check = Check::new("invariance-C1", "Ĉ1(e^Υ τ) = e^Υ C1τ", Needs::Generic);
const INV_DBAR: Check = Check::new("invariance-Dbar", "D̄̂(e^Υ τ) = e^Υ D̄τ", Needs::Generic);
const INV_H1: Check = Check::new("invariance-H1'", "Ĥ'1(e^Υ ψ) = e^Υ H'1ψ", Needs::Generic);
const LEFT_INVERSE: Check = Check::new("h0-after-e0", "H0E0σ = σ", Needs::Always);

const CATALOGUE: &[Check] = &[
    RANK, COMP, C1E0, D1DT, DTDT, CD, WEYL_INV, Z_LAW, DENSITY, NA_VECTOR, INV_E0, INV_DT, INV_D1, INV_C1, INV_DBAR,
    INV_H1,
];

fn sample(b: Bundle, n: usize, order: usize, rng: &mut impl Rng) -> Result<TensorJet> {
    b.random_section(n, order, Flavor::Projective, None, rng)
}

fn covector(grad: &[Jet]) -> TensorJet {
    TensorJet::from_fn(grad.len(), vec![Variance::Down], 0.0, Flavor::Projective, |i| grad[i[0]].clone())
}

fn point_checks(pp: &ProjectivePoint, cfg: &SuiteConfig, rng: &mut impl Rng, out: &mut PointOutcome) -> Result<()> {
    let (n, order) = (pp.dim(), cfg.order());
    for _ in 0..cfg.trials {
        let sigma = sample(Bundle::scalar(1.0), n, order, rng)?;
        let e0s = e0_proj(&sigma, pp)?;
        out.push(COMP.zero(e1_proj(&e0s, pp)?.relative_residual(&comp_rhs_proj(&sigma, pp)?)));
        if !pp.is_generic() {
            continue;
        }
        let ob = pp.obstruction()?;
        let dts = d_tilde_proj(&sigma, pp)?;
        out.push(C1E0.zero(c1_proj(&e0s, pp)?.relative_residual(&dts)));
        let rhs = e0s.try_add(&ob.phi.mul_scalar(&sigma)?)?;
        out.push(D1DT.zero(d1_proj(&dts, pp)?.relative_residual(&rhs)));
        out.push(DTDT.zero(d_tilde_proj(&dts, pp)?.relative_residual(&ob.dz.mul_scalar(&sigma)?)));
        let tau = sample(Bundle::form(1, 1.0), n, order, rng)?;
        let cd = c1_proj(&d1_proj(&tau, pp)?, pp)?;
        let rhs = tau
            .try_sub(&h1prime_proj(&d_tilde_proj(&tau, pp)?, pp)?)?
            .try_sub(&cdcomp_correction_proj(&tau, pp)?)?;
        out.push(CD.zero(cd.relative_residual(&rhs)));
    }
    Ok(())
}

/// Laws under `Γ̂^c_ab = Γ^c_ab + δ^c_a Υ_b + δ^c_b Υ_a`.
fn change_checks(
    chart: &ChartRef,
    p: &[f64],
    pp: &ProjectivePoint,
    scale: &ConformalScale,
    cfg: &SuiteConfig,
    rng: &mut impl Rng,
    out: &mut PointOutcome,
) -> Result<()> {
    let (n, order) = (pp.dim(), cfg.order());
    let hat = ProjectivePoint::from_chart(chart.as_ref(), p, order, Some(scale))?;
    let u = scale.jet(p, order);
    let ups = covector(&scale.gradient(p, order - 1));
    let tr = |t: &TensorJet| transform_density(t, &u.truncate(t.order()));

    out.push(WEYL_INV.zero(hat.weyl.relative_residual(&pp.weyl)));
    let vol = volume_form(&metric_pack(chart.as_ref(), p, order)?.g)?.with_flavor(Flavor::Projective);
    let weighted = vol.mul_jet(&u.truncate(vol.order()).scale((n + 1) as f64).exp()?)?;
    let d = covariant_derivative(&weighted, &hat.connection)?;
    out.push(DENSITY.zero(d.max_abs() / (1.0 + weighted.max_abs())));

    let phi = sample(Bundle::form(1, 0.0), n, order, rng)?;
    let phi = TensorJet::new(n, vec![Variance::Up], 0.0, Flavor::Projective, phi.comps().to_vec())?;
    let lhs = covariant_derivative(&phi, &hat.connection)?;
    let delta = TensorJet::from_fn(n, vec![Variance::Down, Variance::Up], 0.0, Flavor::Projective, |i| {
        Jet::constant(n, order - 1, if i[0] == i[1] { 1.0 } else { 0.0 })
    });
    let rhs = covariant_derivative(&phi, &pp.connection)?
        .try_add(&ups.outer(&phi)?)?
        .try_add(&delta.mul_scalar(&ups.contract(&phi, &[(0, 0)])?)?)?;
    out.push(NA_VECTOR.zero(lhs.relative_residual(&rhs)));

    type Op = fn(&TensorJet, &ProjectivePoint) -> Result<TensorJet>;
    let invariant = |f: Op, x: &TensorJet| -> Result<f64> { Ok(f(&tr(x)?, &hat)?.relative_residual(&tr(&f(x, pp)?)?)) };
    let sigma = sample(Bundle::scalar(1.0), n, order, rng)?;
    out.push(INV_E0.zero(invariant(e0_proj, &sigma)?));
    if !pp.is_generic() || !hat.is_generic() {
        return Ok(());
    }
    out.push(Z_LAW.zero(hat.z()?.relative_residual(&pp.z()?.try_sub(&ups)?)));
    let tau1 = sample(Bundle::form(1, 1.0), n, order, rng)?;
    let tau2 = sample(Bundle::form(2, 1.0), n, order, rng)?;
    let s = sample(Bundle::sym(1.0), n, order, rng)?;
    out.push(INV_DT.zero(invariant(d_tilde_proj, &sigma)?.max(invariant(d_tilde_proj, &tau1)?)));
    out.push(INV_D1.zero(invariant(d1_proj, &tau1)?));
    out.push(INV_C1.zero(invariant(c1_proj, &s)?));
    out.push(INV_DBAR.zero(invariant(dbar_proj, &tau2)?));
    out.push(INV_H1.zero(invariant(h1prime_proj, &tau2)?));
    Ok(())
}

/// Levi-Civita connection of the chart as a projective structure. The
/// complex is the one-solution construction for `n ≥ 3` and the Cotton
/// route in dimension two.
pub(super) fn run(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let chart = load_chart(cfg)?;
    let n = chart.dim();
    let pts = points_for(&chart, cfg)?;
    let ups = scales(n, cfg.seed);
    let order = cfg.order();
    let outcomes = run_points(cfg, &pts, |_, p, rng| {
        let pp = ProjectivePoint::from_chart(chart.as_ref(), p, order, None)?;
        let mut out = PointOutcome::default();
        out.fact("rank", pp.report.rank);
        out.fact("classification", pp.classification());
        if let Some(ob) = &pp.obstruction {
            out.fact("obstruction_size", ob.obstruction_size);
        }
        if n >= 3 {
            out.push(RANK.zero((n - pp.report.rank.min(n)) as f64).with_tol(0.0));
        }
        point_checks(&pp, cfg, rng, &mut out)?;
        for u in &ups {
            change_checks(&chart, p, &pp, &u.centred_at(p), cfg, rng, &mut out)?;
        }
        let pp = Arc::new(pp);
        let (top, eq) = if n == 2 {
            out.fact("route", "cotton");
            let (top, eq) = build_nosol_proj_complex(pp, order)?;
            let (e0, h0) = (&top.ops[0], &eq.h[0]);
            let mut worst: f64 = 0.0;
            for _ in 0..cfg.trials {
                let x = top.sampler.sample(top.space(0), rng)?;
                worst = worst.max(section_residual(&h0.apply(&e0.apply(&x)?)?, &x));
            }
            out.push(LEFT_INVERSE.zero(worst));
            (top, eq)
        } else {
            out.fact("route", "one-solution");
            build_onesol_proj_complex(pp, order)?
        };
        check_complex(&top, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        check_equivalence(&eq, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        Ok(out)
    })?;
    let mut summary = BTreeMap::new();
    let ranks: Vec<u64> = outcomes.iter().filter_map(|o| o.facts.get("rank").and_then(Value::as_u64)).collect();
    if let Some(m) = ranks.iter().min() {
        summary.insert("min_rank".into(), Value::from(*m));
    }
    let mut catalogue = CATALOGUE.to_vec();
    if n == 2 {
        catalogue.retain(|c| c.name != RANK.name);
        catalogue.push(LEFT_INVERSE);
    }
    finish(cfg, chart.name(), pts, outcomes, &catalogue, summary)
}
