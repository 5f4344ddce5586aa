use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde_json::Value;

use super::{any_wanted, finish, load_chart, points_for, run_points, scales, Check, Needs, PointOutcome, SuiteConfig};
use crate::conformal::{
    build_nosol_complex, build_onesol_complex, c1, cdcomp_correction, d1, d_tilde, dbar, e0, ek, h1prime,
    weyl_gradient_term, Classification, ConformalOps, ConformalPoint,
};
use crate::error::{structural, Result};
use crate::geometry::{covariant_derivative, transform_density, volume_form, ChartRef, ConformalScale, Rescaled};
use crate::harness::{
    check_complex, check_equivalence, lift_compatibility, section_residual, ComplexSpec, Residual,
    VerificationReport,
};
use crate::jet::Jet;
use crate::tensor::{Bundle, Flavor, TensorJet, Variance};

const COMP: Check = Check::new("e1-after-e0", "E1E0σ = W_abcd ∇^dσ + Y_cab σ", Needs::Always);
const WEYL_SQUARE: Check = Check::new("weyl-square-trace", "W^abcd W_abce = ¼ |W|² δ^d_e", Needs::FourDim);
const VOLUME: Check = Check::new("volume-form-parallel", "∇ε = 0", Needs::Always);
const C1E0: Check = Check::new("c1-after-e0", "C1E0σ = d̃σ", Needs::Generic);
const D1DT: Check = Check::new("d1-after-dtilde", "D1d̃σ = E0σ + Φ(Z)σ", Needs::Generic);
const DTDT: Check = Check::new("dtilde-squared", "d̃d̃σ = dZ σ", Needs::Generic);
const DT_C1E0: Check = Check::new("dtilde-after-c1-e0", "d̃C1E0σ = dZ σ", Needs::Generic);
const D1_C1E0: Check = Check::new("d1-after-c1-e0", "D1C1E0σ = Φ(Z)σ + E0σ", Needs::Generic);
const CD: Check = Check::new(
    "c1-after-d1",
    "C1D1τ = τ − H'1d̃τ − W̄^rsp_a (2Φ_pr τ_s + ½ dZ_rs τ_p)",
    Needs::Generic,
);
const ONESOL_H1: Check = Check::new("onesol-homotopy", "τ − C1D1τ = H'1d̃τ", Needs::OneSolution);
const WEYL_INV: Check = Check::new("weyl-rescaling", "Ŵ_abcd = e^{2Υ} W_abcd", Needs::Always);
const COTTON_LAW: Check = Check::new("cotton-rescaling", "Ŷ_abc = Y_abc + Υ^d W_dabc", Needs::Always);
const Z_LAW: Check = Check::new("z-rescaling", "Ẑ_a = Z_a − Υ_a", Needs::Generic);
const NA_DENSITY: Check = Check::new("connection-on-densities", "∇̂_a σ = ∇_a σ + Υ_a σ", Needs::Always);
const NA_FORM: Check = Check::new(
    "connection-on-covectors",
    "∇̂_a τ_b = ∇_a τ_b + (w − 1)Υ_a τ_b − Υ_b τ_a + Υ^c τ_c g_ab",
    Needs::Always,
);
const INV_E0: Check = Check::new("invariance-E0", "Ê0(e^Υ σ) = e^Υ E0σ", Needs::Always);
const INV_E1: Check = Check::new("invariance-E1", "Ê1(e^Υ τ) = e^Υ E1τ", Needs::Always);
const INV_DT: Check = Check::new("invariance-dtilde", "d̃̂(e^Υ τ) = e^Υ d̃τ on 0-, 1- and 2-forms", Needs::Generic);
const INV_D1: Check = Check::new("invariance-D1", "D̂1(e^Υ τ) = e^Υ D1τ", Needs::Generic);
const INV_C1: Check = Check::new("invariance-C1", "Ĉ1(e^Υ τ) = e^Υ C1τ", Needs::Generic);
const INV_DBAR: Check = Check::new("invariance-Dbar", "D̄̂(e^Υ τ) = e^Υ D̄τ", Needs::Generic);
const INV_H1: Check = Check::new("invariance-H1'", "Ĥ'1(e^Υ ψ) = e^Υ H'1ψ", Needs::Generic);

const IDENTITIES: &[Check] = &[
    COMP, WEYL_SQUARE, VOLUME, C1E0, D1DT, DTDT, DT_C1E0, D1_C1E0, CD, ONESOL_H1, WEYL_INV, COTTON_LAW, Z_LAW, NA_DENSITY, NA_FORM,
    INV_E0, INV_E1, INV_DT, INV_D1, INV_C1, INV_DBAR, INV_H1,
];

const GENERIC_BLOCK: &[Check] = &[C1E0, D1DT, DTDT, DT_C1E0, D1_C1E0, CD, ONESOL_H1];
const RESCALING_BLOCK: &[Check] = &[
    WEYL_INV, COTTON_LAW, Z_LAW, NA_DENSITY, NA_FORM, INV_E0, INV_E1, INV_DT, INV_D1, INV_C1, INV_DBAR, INV_H1,
];

const LIFT: Check = Check::new("lift-compatibility", "K1 = (id − K0H0 − D1C1; K'1C1)", Needs::Always);
const LEFT_INVERSE: Check = Check::new("h0-after-e0", "H0E0σ = σ", Needs::Always);

/// Base-point magnitude below which a curvature tensor counts as zero.
const FLAT_TOL: f64 = 1e-9;
const NONZERO_THRESHOLD: f64 = 1e-3;

fn facts(cp: &ConformalPoint, out: &mut PointOutcome) {
    out.fact("rank", cp.report.rank);
    out.fact("method", cp.report.method);
    out.fact("classification", cp.classification());
    if let Some(ob) = &cp.obstruction {
        out.fact("obstruction_size", ob.obstruction_size);
    }
}

fn sample(b: Bundle, cp: &ConformalPoint, order: usize, rng: &mut impl Rng) -> Result<TensorJet> {
    b.random_section(cp.dim(), order, Flavor::Conformal, Some(cp.metric()), rng)
}

fn delta(n: usize, order: usize) -> TensorJet {
    TensorJet::from_fn(n, vec![Variance::Up, Variance::Down], 0.0, Flavor::Conformal, |i| {
        Jet::constant(n, order, if i[0] == i[1] { 1.0 } else { 0.0 })
    })
}

/// `W^abcd W_abce` against `¼ |W|² δ^d_e`.
fn weyl_square_residual(cp: &ConformalPoint) -> Result<f64> {
    let w = &cp.pack.weyl;
    let up = (0..4).try_fold(w.clone(), |t, s| t.raise(s, cp.metric()))?;
    let lhs = up.contract(w, &[(0, 0), (1, 1), (2, 2)])?;
    let sq = up.contract(w, &[(0, 0), (1, 1), (2, 2), (3, 3)])?;
    let rhs = delta(4, lhs.order()).mul_scalar(&sq)?.scale_real(0.25);
    Ok(lhs.relative_residual(&rhs.with_weight(lhs.weight())))
}

fn identities_at(
    chart: &ChartRef,
    p: &[f64],
    cfg: &SuiteConfig,
    ups: &[ConformalScale],
    rng: &mut impl Rng,
) -> Result<PointOutcome> {
    let order = cfg.order();
    let n = chart.dim();
    let cp = ConformalPoint::new(chart.as_ref(), p, order)?;
    let mut out = PointOutcome::default();
    facts(&cp, &mut out);

    if n == 4 {
        out.push(WEYL_SQUARE.zero(weyl_square_residual(&cp)?).with_tol(1e-8));
    }
    let vol = volume_form(&cp.metric().g)?;
    let dvol = covariant_derivative(&vol, &cp.pack.connection)?;
    out.push(VOLUME.zero(dvol.max_abs() / (1.0 + vol.max_abs())));

    for _ in 0..cfg.trials {
        let sigma = sample(Bundle::scalar(1.0), &cp, order, rng)?;
        let e0s = e0(&sigma, &cp)?;
        out.push(COMP.zero(ek(1, &e0s, &cp)?.relative_residual(&weyl_gradient_term(&sigma, &cp)?)));
        if !cp.is_generic() || !any_wanted(cfg, GENERIC_BLOCK) {
            continue;
        }
        let ob = cp.obstruction()?;
        let dts = d_tilde(&sigma, &cp)?;
        let ce = c1(&e0s, &cp)?;
        out.push(C1E0.zero(ce.relative_residual(&dts)));
        let rhs = e0s.try_add(&ob.phi.mul_scalar(&sigma)?)?;
        let dz_sigma = ob.dz.mul_scalar(&sigma)?;
        out.push(D1DT.zero(d1(&dts, &cp)?.relative_residual(&rhs)));
        out.push(DTDT.zero(d_tilde(&dts, &cp)?.relative_residual(&dz_sigma)));
        out.push(DT_C1E0.zero(d_tilde(&ce, &cp)?.relative_residual(&dz_sigma)));
        out.push(D1_C1E0.zero(d1(&ce, &cp)?.relative_residual(&rhs)));

        let tau = sample(Bundle::form(1, 1.0), &cp, order, rng)?;
        let cd = c1(&d1(&tau, &cp)?, &cp)?;
        let h = h1prime(&d_tilde(&tau, &cp)?, &cp)?;
        let rhs = tau.try_sub(&h)?.try_sub(&cdcomp_correction(&tau, &cp)?)?;
        out.push(CD.zero(cd.relative_residual(&rhs)));
        if cp.classification() == Classification::OneSolutionCandidate {
            out.push(ONESOL_H1.zero(tau.try_sub(&cd)?.relative_residual(&h)));
        }
    }

    for u in ups.iter().filter(|_| any_wanted(cfg, RESCALING_BLOCK)) {
        rescaling_checks(chart, p, &cp, &u.centred_at(p), cfg, rng, &mut out)?;
    }
    Ok(out)
}

/// Transformation laws and invariance of the operators under `ĝ = e^{2Υ}g`.
fn rescaling_checks(
    chart: &ChartRef,
    p: &[f64],
    cp: &ConformalPoint,
    scale: &ConformalScale,
    cfg: &SuiteConfig,
    rng: &mut impl Rng,
    out: &mut PointOutcome,
) -> Result<()> {
    let order = cfg.order();
    let n = cp.dim();
    let hat = ConformalPoint::new(&Rescaled::new(Arc::clone(chart), scale.clone()), p, order)?;
    let u = scale.jet(p, order);
    let grad = scale.gradient(p, order - 1);
    let ups = TensorJet::from_fn(n, vec![Variance::Down], 0.0, Flavor::Conformal, |i| grad[i[0]].clone());
    let ups_up = ups.raise(0, cp.metric())?;
    let tr = |t: &TensorJet| transform_density(t, &u.truncate(t.order()));
    let (pk, hk) = (&cp.pack, &hat.pack);

    out.push(WEYL_INV.zero(hk.weyl.relative_residual(&tr(&pk.weyl)?)));
    let cotton = pk.cotton.try_add(&ups_up.contract(&pk.weyl, &[(0, 0)])?)?;
    out.push(COTTON_LAW.zero(hk.cotton.relative_residual(&cotton)));

    let sigma = sample(Bundle::scalar(1.0), cp, order, rng)?;
    let lhs = covariant_derivative(&tr(&sigma)?, &hk.connection)?;
    let rhs = covariant_derivative(&sigma, &pk.connection)?.try_add(&ups.mul_scalar(&sigma)?)?;
    out.push(NA_DENSITY.zero(lhs.relative_residual(&tr(&rhs)?)));
    for w in [0.0, 1.0] {
        let tau = sample(Bundle::form(1, w), cp, order, rng)?;
        let lhs = covariant_derivative(&tr(&tau)?, &hk.connection)?;
        let g = cp.metric().g.truncate(order - 1);
        let contracted = ups_up.contract(&tau, &[(0, 0)])?;
        let rhs = covariant_derivative(&tau, &pk.connection)?
            .try_add(&ups.outer(&tau)?.scale_real(w - 1.0))?
            .try_sub(&tau.outer(&ups)?)?
            .try_add(&g.mul_scalar(&contracted)?.with_weight(w))?;
        out.push(NA_FORM.zero(lhs.relative_residual(&tr(&rhs)?)));
    }

    type Op = fn(&TensorJet, &ConformalPoint) -> Result<TensorJet>;
    let invariant = |f: Op, x: &TensorJet| -> Result<f64> { Ok(f(&tr(x)?, &hat)?.relative_residual(&tr(&f(x, cp)?)?)) };
    out.push(INV_E0.zero(invariant(e0, &sigma)?));
    let s0 = sample(Bundle::sym0(1.0), cp, order, rng)?;
    out.push(INV_E1.zero(invariant(|x, c| ek(1, x, c), &s0)?));
    if !cp.is_generic() || !hat.is_generic() {
        return Ok(());
    }
    out.push(Z_LAW.zero(hat.z()?.relative_residual(&cp.z()?.try_sub(&ups)?)));
    let forms: Vec<TensorJet> =
        (0..3.min(n)).map(|k| sample(Bundle::form(k, 1.0), cp, order, rng)).collect::<Result<_>>()?;
    let worst = forms.iter().map(|x| invariant(d_tilde, x)).try_fold(0.0, |a: f64, r| r.map(|v| a.max(v)))?;
    out.push(INV_DT.zero(worst));
    out.push(INV_D1.zero(invariant(d1, &forms[1])?));
    out.push(INV_C1.zero(invariant(c1, &s0)?));
    out.push(INV_DBAR.zero(invariant(dbar, &forms[2])?));
    out.push(INV_H1.zero(invariant(h1prime, &forms[2])?));
    Ok(())
}

fn genericity_summary(outcomes: &[PointOutcome]) -> BTreeMap<String, Value> {
    let mut s = BTreeMap::new();
    let ranks: Vec<u64> = outcomes.iter().filter_map(|o| o.facts.get("rank").and_then(Value::as_u64)).collect();
    if let Some(m) = ranks.iter().min() {
        s.insert("min_rank".into(), Value::from(*m));
    }
    let generic = outcomes
        .iter()
        .filter(|o| o.facts.get("classification").and_then(Value::as_str) != Some("not-generic"))
        .count();
    s.insert("generic_points".into(), Value::from(generic));
    s
}

pub(super) fn identities(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let chart = load_chart(cfg)?;
    if chart.dim() < 3 {
        return Err(structural("the conformal identities need dimension at least 3"));
    }
    let pts = points_for(&chart, cfg)?;
    let ups = scales(chart.dim(), cfg.seed);
    let outcomes = run_points(cfg, &pts, |_, p, rng| identities_at(&chart, p, cfg, &ups, rng))?;
    let summary = genericity_summary(&outcomes);
    finish(cfg, chart.name(), pts, outcomes, IDENTITIES, summary)
}

fn worst_over<F>(trials: usize, mut f: F) -> Result<f64>
where
    F: FnMut() -> Result<f64>,
{
    (0..trials).try_fold(0.0, |a: f64, _| f().map(|v| a.max(v)))
}

pub(super) fn onesol(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let chart = load_chart(cfg)?;
    let pts = points_for(&chart, cfg)?;
    let order = cfg.order();
    let outcomes = run_points(cfg, &pts, |_, p, rng| {
        let cp = Arc::new(ConformalPoint::new(chart.as_ref(), p, order)?);
        let mut out = PointOutcome::default();
        facts(&cp, &mut out);
        let (top, eq) = build_onesol_complex(cp, order)?;
        check_complex(&top, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        check_equivalence(&eq, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        let lifted = lift_compatibility(&eq, &eq.bottom.ops[1])?;
        let worst = worst_over(cfg.trials, || {
            let x = top.sampler.sample(top.space(1), rng)?;
            Ok(section_residual(&lifted.apply(&x)?, &top.ops[1].apply(&x)?))
        })?;
        out.push(LIFT.zero(worst));
        Ok(out)
    })?;
    let summary = genericity_summary(&outcomes);
    finish(cfg, chart.name(), pts, outcomes, &[LIFT], summary)
}

pub(super) fn nosol(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let chart = load_chart(cfg)?;
    if chart.dim() < 3 {
        return Err(structural("the conformal no-solution complex needs dimension at least 3"));
    }
    let pts = points_for(&chart, cfg)?;
    let order = cfg.order();
    let outcomes = run_points(cfg, &pts, |_, p, rng| {
        let cp = Arc::new(ConformalPoint::new(chart.as_ref(), p, order)?);
        let mut out = PointOutcome::default();
        facts(&cp, &mut out);
        out.fact("route", if cp.dim() == 3 { "cotton" } else { "obstruction" });
        let (top, eq) = build_nosol_complex(cp, order)?;
        let (e0, h0) = (&top.ops[0], &eq.h[0]);
        let worst = worst_over(cfg.trials, || {
            let x = top.sampler.sample(top.space(0), rng)?;
            Ok(section_residual(&h0.apply(&e0.apply(&x)?)?, &x))
        })?;
        out.push(LEFT_INVERSE.zero(worst));
        check_complex(&top, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        check_equivalence(&eq, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        Ok(out)
    })?;
    let summary = genericity_summary(&outcomes);
    finish(cfg, chart.name(), pts, outcomes, &[LEFT_INVERSE], summary)
}

/// `E0, E1, …, E_{n−2}`; compositions vanish on conformally flat charts
/// and are expected to be nonzero elsewhere.
pub(super) fn bgg(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let chart = load_chart(cfg)?;
    let n = chart.dim();
    if n < 3 {
        return Err(structural("the BGG sequence needs dimension at least 3"));
    }
    let pts = points_for(&chart, cfg)?;
    let order = cfg.order();
    let outcomes = run_points(cfg, &pts, |_, p, rng| {
        let cp = Arc::new(ConformalPoint::new(chart.as_ref(), p, order)?);
        let curvature = cp.pack.weyl.max_abs().max(cp.pack.cotton.max_abs());
        let ops = ConformalOps::new(cp);
        let mut seq = vec![ops.e0(), ops.e1_on_sym0()];
        seq.extend((2..=n - 2).map(|k| ops.ek(k)));
        let c = ComplexSpec::new("bgg", seq, ops.sampler(order))?;
        let mut out = PointOutcome::default();
        out.fact("conformally_flat", curvature <= FLAT_TOL);
        out.fact("curvature", curvature);
        check_complex(&c, cfg.trials, rng)?.into_iter().for_each(|r| out.push(r));
        Ok(out)
    })?;
    let flat = outcomes.iter().all(|o| o.facts.get("conformally_flat") == Some(&Value::Bool(true)));
    let outcomes = if flat {
        outcomes
    } else {
        outcomes
            .into_iter()
            .map(|mut o| {
                o.residuals = o
                    .residuals
                    .into_iter()
                    .map(|r| Residual::nonzero(r.name, r.tag.replace("= 0", "≠ 0"), r.value, NONZERO_THRESHOLD))
                    .collect();
                o
            })
            .collect()
    };
    let mut summary = BTreeMap::new();
    summary.insert("conformally_flat".into(), Value::Bool(flat));
    finish(cfg, chart.name(), pts, outcomes, &[], summary)
}
