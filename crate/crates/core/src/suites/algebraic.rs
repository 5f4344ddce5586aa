use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::{finish, Check, Needs, PointOutcome, SuiteConfig};
use crate::error::Result;
use crate::harness::VerificationReport;
use crate::np::{
    boost_shifts, cubic_invariants, genericity_rank, hook_basis, np_scalars, petrov_classify, quadratic_invariant,
    reconstruct_weyl, summarize, weyl_map_matrix, weyl_symmetry_residual, NPScalars, NullFrame, PetrovType,
};
use crate::tensor::{kn_product, sym_product, Bundle, TensorJet};

const SAMPLES: usize = 100;
const ZERO_TOL: f64 = 1e-12;

const ROUND_TRIP: Check = Check::new("np-round-trip", "Ψ(W(Ψ)) = Ψ", Needs::Always);
const WEYL_SYMMETRY: Check = Check::new("reconstruction-is-weyl", "W(Ψ) has Weyl symmetries and no trace", Needs::Always);
const PURE_PSI4: Check = Check::new("pure-psi4-term", "W = −Ψ4*(ll)⊙(m̄m̄) − Ψ4(ll)⊙(mm)", Needs::Always);
const QUADRATIC: Check = Check::new("weyl-squared", "W_pqrs W^pqrs = 16 Re(Ψ0Ψ4 − 4Ψ1Ψ3 + 3Ψ2²)", Needs::Always);
const FORTY_EIGHT: Check = Check::new("weyl-squared-psi2", "|W|² = 48 for Ψ2 = 1", Needs::Always);
const CUBIC: Check = Check::new("cubic-identity", "V³_a^b = ¼ V³_r^r δ_a^b when |W|² = 0", Needs::Always);
const TYPE_III_INVARIANTS: Check = Check::new("type-iii-invariants", "|W|² = V³_r^r = 0 on Type III", Needs::Always);
const HOOK_MEMBERSHIP: Check = Check::new("hook-basis-membership", "H_(pq)r = H_[pqr] = H^p_qp = 0", Needs::Always);
const HOOK_INDEPENDENCE: Check =
    Check::new("hook-basis-independence", "σ_min/σ_max of the 16 basis tensors > 1e-3", Needs::Always);
const MAP_PATTERN: Check = Check::new("map-matrix-pattern", "W·v in the hook basis matches the block pattern", Needs::Always);
const BOOST_SHIFT: Check = Check::new("boost-shift", "pure Ψ3 shifts boost weight by 1, pure Ψ4 by 2", Needs::Always);
const RANK_III: Check = Check::new("rank-type-iii", "rank = 4 on Type III with Ψ3 ≠ 0", Needs::Always);
const RANK_N: Check = Check::new("rank-type-n", "rank < 4 on Type N", Needs::Always);
const INPUT_ROUND_TRIP: Check = Check::new("input-round-trip", "Ψ(W(Ψ)) = Ψ for the given scalars", Needs::Always);

const CATALOGUE: &[Check] = &[
    ROUND_TRIP,
    WEYL_SYMMETRY,
    PURE_PSI4,
    QUADRATIC,
    FORTY_EIGHT,
    CUBIC,
    TYPE_III_INVARIANTS,
    HOOK_MEMBERSHIP,
    HOOK_INDEPENDENCE,
    MAP_PATTERN,
    BOOST_SHIFT,
    RANK_III,
    RANK_N,
];

fn random_psi(rng: &mut impl Rng) -> NPScalars {
    NPScalars(std::array::from_fn(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

fn random_c(rng: &mut impl Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// The expected map matrix for a tensor with only `Ψ3 = a` and `Ψ4 = b`,
/// columns `(v_n, v_m̄, v_m, v_l)`.
pub fn expected_map_pattern(a: C, b: C) -> DMatrix<C> {
    let mut m = DMatrix::from_element(16, 4, C::new(0.0, 0.0));
    for (row, col, v) in [
        (7, 0, a.conj()),
        (9, 0, a),
        (10, 0, -b.conj()),
        (13, 0, -b),
        (10, 1, -a.conj()),
        (12, 1, -a),
        (15, 1, b),
        (11, 2, -a.conj()),
        (13, 2, -a),
        (14, 2, b.conj()),
        (14, 3, a.conj()),
        (15, 3, a),
    ] {
        m[(row, col)] = v;
    }
    m
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn frames(rng: &mut impl Rng) -> Result<Vec<NullFrame>> {
    let f = NullFrame::canonical();
    let moved = f.boost(rng.gen_range(0.5..2.0))?.spin(rng.gen_range(0.0..std::f64::consts::TAU))?;
    Ok(vec![f, moved])
}

fn frame_checks(f: &NullFrame, rng: &mut impl Rng, out: &mut PointOutcome) -> Result<()> {
    let g = f.metric_pack();
    for _ in 0..SAMPLES {
        let psi = random_psi(rng);
        let w = reconstruct_weyl(&psi, f)?;
        out.push(WEYL_SYMMETRY.zero(weyl_symmetry_residual(&w, f)?));
        out.push(ROUND_TRIP.zero(np_scalars(&w, f)?.max_abs_diff(&psi) / (1.0 + psi.max_abs())));
        out.push(QUADRATIC.zero(relative(quadratic_invariant(&w, f)?, psi.quadratic_invariant())));

        // Ψ0 chosen so that Ψ0Ψ4 − 4Ψ1Ψ3 + 3Ψ2² = 0
        let mut null = psi;
        let [_, p1, p2, p3, p4] = null.0;
        null.0[0] = (4.0 * p1 * p3 - 3.0 * p2 * p2) / p4;
        let cubic = cubic_invariants(&reconstruct_weyl(&null, f)?, f)?;
        out.push(CUBIC.zero(cubic.identity_residual()));
    }

    for _ in 0..SAMPLES / 10 {
        let (a, b) = (random_c(rng), random_c(rng));
        let mut psi = NPScalars::pure(3, a);
        psi.0[4] = b;
        let w = reconstruct_weyl(&psi, f)?;
        let ok = petrov_classify(&psi, ZERO_TOL) == PetrovType::III && genericity_rank(&w, f)? == 4;
        out.push(RANK_III.zero(if ok { 0.0 } else { 1.0 }));
        let quad = quadratic_invariant(&w, f)?.abs();
        let trace = cubic_invariants(&w, f)?.trace.abs();
        out.push(TYPE_III_INVARIANTS.zero(quad.max(trace)));

        let wn = reconstruct_weyl(&NPScalars::pure(4, b), f)?;
        let ok = petrov_classify(&NPScalars::pure(4, b), ZERO_TOL) == PetrovType::N && genericity_rank(&wn, f)? < 4;
        out.push(RANK_N.zero(if ok { 0.0 } else { 1.0 }));
    }

    let basis = hook_basis(f)?;
    let hook = Bundle::hook(2, 0.0);
    let mut worst: f64 = 0.0;
    for h in &basis {
        let trace = h.raise(0, &g)?.self_contract(0, 2)?.max_abs();
        let sym = h.symmetrize(&[0, 1])?.max_abs();
        let alt = h.antisymmetrize(&[0, 1, 2])?.max_abs();
        worst = worst.max(trace).max(sym).max(alt).max(hook.membership_residual(h, Some(&g))?);
    }
    out.push(HOOK_MEMBERSHIP.zero(worst));
    let m = DMatrix::from_fn(64, basis.len(), |r, c| basis[c].comps()[r].value());
    let s = crate::linalg::singular_values_complex(&m);
    let ratio = s.last().copied().unwrap_or(0.0) / s.first().copied().unwrap_or(1.0);
    out.push(HOOK_INDEPENDENCE.nonzero(ratio, 1e-3));
    Ok(())
}

/// Checks tied to the canonical frame, where the expected pattern is stated.
fn canonical_checks(rng: &mut impl Rng, out: &mut PointOutcome) -> Result<()> {
    let f = NullFrame::canonical();
    let w = reconstruct_weyl(&NPScalars::pure(2, C::new(1.0, 0.0)), &f)?;
    out.push(FORTY_EIGHT.zero((quadratic_invariant(&w, &f)? - 48.0).abs() / 48.0));

    let p4 = random_c(rng);
    let w = reconstruct_weyl(&NPScalars::pure(4, p4), &f)?;
    let [l, _, m, mb] = f.vectors().map(|v| covector(&f, &v));
    let ll = sym_product(&l, &l)?;
    let expected = kn_product(&ll, &sym_product(&mb, &mb)?)?
        .scale(-p4.conj())
        .try_add(&kn_product(&ll, &sym_product(&m, &m)?)?.scale(-p4))?;
    out.push(PURE_PSI4.zero(w.max_abs_diff(&expected) / (1.0 + expected.max_abs())));

    for _ in 0..SAMPLES / 10 {
        let (a, b) = (random_c(rng), random_c(rng));
        let mut psi = NPScalars::pure(3, a);
        psi.0[4] = b;
        let matrix = weyl_map_matrix(&reconstruct_weyl(&psi, &f)?, &f)?;
        out.push(MAP_PATTERN.zero((&matrix - expected_map_pattern(a, b)).camax()));
        let shift = |k: usize| -> Result<Vec<i32>> {
            let mm = weyl_map_matrix(&reconstruct_weyl(&NPScalars::pure(k, a), &f)?, &f)?;
            Ok(boost_shifts(&mm, ZERO_TOL))
        };
        let ok = shift(3)? == [1] && shift(4)? == [2];
        out.push(BOOST_SHIFT.zero(if ok { 0.0 } else { 1.0 }));
    }
    Ok(())
}

fn covector(f: &NullFrame, v: &[C; 4]) -> TensorJet<C> {
    let low = f.lower(v);
    TensorJet::from_fn(4, vec![crate::Variance::Down], 0.0, crate::Flavor::Conformal, |i| {
        crate::Jet::constant(4, 0, low[i[0]])
    })
}

/// Pointwise Lorentzian checks; the chart, point count and order play no part.
pub(super) fn run(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = PointOutcome::default();
    for f in frames(&mut rng)? {
        frame_checks(&f, &mut rng, &mut out)?;
    }
    canonical_checks(&mut rng, &mut out)?;
    let mut catalogue = CATALOGUE.to_vec();
    let mut summary = BTreeMap::new();
    if let Some(psi) = &cfg.psi {
        let f = NullFrame::canonical();
        let w = reconstruct_weyl(psi, &f)?;
        out.push(INPUT_ROUND_TRIP.zero(np_scalars(&w, &f)?.max_abs_diff(psi) / (1.0 + psi.max_abs())));
        catalogue.push(INPUT_ROUND_TRIP);
        summary.insert("input".into(), serde_json::to_value(summarize(psi, &f, ZERO_TOL)?).unwrap_or(Value::Null));
    }
    let mut report = finish(cfg, "frame".into(), Vec::new(), vec![out], &catalogue, summary)?;
    report.summary.remove("order");
    report.summary.remove("per_point");
    Ok(report)
}
