use c2e_core::geometry::{chart_by_name, curvature_pack};
use c2e_core::np::{
    boost_shifts, cubic_invariants, genericity_rank, hook_basis, np_scalars, petrov_classify, pointwise,
    quadratic_invariant, reconstruct_weyl, weyl_map_matrix, weyl_symmetry_residual, NPScalars, NullFrame, PetrovType,
};
use c2e_core::tensor::{kn_product, sym_product, Bundle};
use c2e_core::MetricPack;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_psi(rng: &mut ChaCha8Rng) -> NPScalars {
    NPScalars(std::array::from_fn(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

fn frames() -> Vec<NullFrame> {
    let f = NullFrame::canonical();
    vec![f.clone(), f.boost(1.7).unwrap().spin(0.4).unwrap()]
}

#[test]
fn reconstruction_round_trips_and_is_a_weyl_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in frames() {
        for _ in 0..100 {
            let psi = random_psi(&mut rng);
            let w = reconstruct_weyl(&psi, &f).unwrap();
            assert!(weyl_symmetry_residual(&w, &f).unwrap() < 1e-13);
            let imag = w.comps().iter().map(|c| c.value().im.abs()).fold(0.0, f64::max);
            assert!(imag < 1e-14, "reconstruction is not real: {imag:e}");
            let back = np_scalars(&w, &f).unwrap();
            assert!(back.max_abs_diff(&psi) < 1e-12, "{psi:?} -> {back:?}");
        }
    }
}

#[test]
fn pure_psi4_matches_the_displayed_term() {
    let f = NullFrame::canonical();
    let p4 = C::new(0.3, -1.2);
    let w = reconstruct_weyl(&NPScalars::pure(4, p4), &f).unwrap();
    let [l, _, m, mb] = [f.l.map(C::from), f.n.map(C::from), f.m, f.mbar()].map(|v| cov(&f, &v));
    let ll = sym_product(&l, &l).unwrap();
    let expected = kn_product(&ll, &sym_product(&mb, &mb).unwrap())
        .unwrap()
        .scale(-p4.conj())
        .try_add(&kn_product(&ll, &sym_product(&m, &m).unwrap()).unwrap().scale(-p4))
        .unwrap();
    assert!(w.max_abs_diff(&expected) < 1e-14);
}

fn cov(f: &NullFrame, v: &[C; 4]) -> c2e_core::TensorJet<C> {
    let low = f.lower(v);
    c2e_core::TensorJet::from_fn(4, vec![c2e_core::Variance::Down], 0.0, c2e_core::Flavor::Conformal, |i| {
        c2e_core::Jet::constant(4, 0, low[i[0]])
    })
}

#[test]
fn quadratic_invariant_agrees_with_scalar_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = NullFrame::canonical();
    for _ in 0..100 {
        let psi = random_psi(&mut rng);
        let w = reconstruct_weyl(&psi, &f).unwrap();
        let brute = quadratic_invariant(&w, &f).unwrap();
        let formula = psi.quadratic_invariant();
        assert!((brute - formula).abs() <= 1e-10 * (1.0 + formula.abs()), "{brute} vs {formula}");
    }
    let w = reconstruct_weyl(&NPScalars::pure(2, C::new(1.0, 0.0)), &f).unwrap();
    assert!((quadratic_invariant(&w, &f).unwrap() - 48.0).abs() < 1e-12);
}

#[test]
fn cubic_identity_when_quadratic_invariant_vanishes() {
    let f = NullFrame::canonical();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut saw_nonzero_trace = false;
    for _ in 0..50 {
        // choose Ψ₀ so that Re(Ψ₀Ψ₄ − 4Ψ₁Ψ₃ + 3Ψ₂²) = 0
        let mut psi = random_psi(&mut rng);
        let [_, p1, p2, p3, p4] = psi.0;
        let rest = -4.0 * p1 * p3 + 3.0 * p2 * p2;
        psi.0[0] = -rest.re * p4.conj() / p4.norm_sqr();
        assert!(psi.quadratic_invariant().abs() < 1e-12);
        let w = reconstruct_weyl(&psi, &f).unwrap();
        assert!(quadratic_invariant(&w, &f).unwrap().abs() < 1e-11);
        let cubic = cubic_invariants(&w, &f).unwrap();
        assert!(cubic.identity_residual() < 1e-11, "{}", cubic.identity_residual());
        saw_nonzero_trace |= cubic.trace.abs() > 1e-3;
    }
    assert!(saw_nonzero_trace);
}

#[test]
fn squared_weyl_is_trace_free_exactly_when_the_quadratic_invariant_vanishes() {
    let f = NullFrame::canonical();
    let g = complex_metric(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let trace_of = |psi: &NPScalars| {
        let w = reconstruct_weyl(psi, &f).unwrap();
        let c = cubic_invariants(&w, &f).unwrap();
        c.w2.raise(0, &g).unwrap().self_contract(0, 2).unwrap().max_abs()
    };
    for _ in 0..10 {
        let mut psi = random_psi(&mut rng);
        assert!(trace_of(&psi) > 1e-6);
        let [_, p1, p2, p3, p4] = psi.0;
        psi.0[0] = -(-4.0 * p1 * p3 + 3.0 * p2 * p2).re * p4.conj() / p4.norm_sqr();
        assert!(trace_of(&psi) < 1e-12);
    }
    // the cubic identity itself is dimensional and needs no assumption
    let w = reconstruct_weyl(&random_psi(&mut rng), &f).unwrap();
    assert!(cubic_invariants(&w, &f).unwrap().identity_residual() < 1e-12);
}

#[test]
fn type_three_has_no_nonzero_invariants() {
    let f = NullFrame::canonical();
    let w = reconstruct_weyl(&NPScalars::pure(3, C::new(1.0, 0.0)), &f).unwrap();
    assert!(w.max_abs() > 0.1);
    assert!(quadratic_invariant(&w, &f).unwrap().abs() < 1e-14);
    let cubic = cubic_invariants(&w, &f).unwrap();
    assert!(cubic.trace.abs() < 1e-14);
    assert!(cubic.v3.max_abs() < 1e-14);
}

#[test]
fn hook_basis_is_independent_and_in_the_bundle() {
    for f in frames() {
        let basis = hook_basis(&f).unwrap();
        assert_eq!(basis.len(), 16);
        let g = complex_metric(&f);
        for (i, h) in basis.iter().enumerate() {
            let sym = h.symmetrize(&[0, 1]).unwrap().max_abs();
            let alt = h.antisymmetrize(&[0, 1, 2]).unwrap().max_abs();
            let tr = h.raise(0, &g).unwrap().self_contract(0, 2).unwrap().max_abs();
            assert!(sym.max(alt).max(tr) < 1e-14, "element {i}: {sym:e} {alt:e} {tr:e}");
            assert!(Bundle::hook(2, 0.0).membership_residual(h, Some(&g)).unwrap() < 1e-14);
        }
        let m = DMatrix::from_fn(64, 16, |r, c| basis[c].comps()[r].value());
        let s = c2e_core::linalg::singular_values_complex(&m);
        assert!(s[15] > 1e-3 * s[0]);
    }
}

fn complex_metric(f: &NullFrame) -> MetricPack<C> {
    let g = f.metric();
    let pack = c2e_core::geometry::metric_pack_from(c2e_core::TensorJet::from_fn(
        4,
        vec![c2e_core::Variance::Down; 2],
        2.0,
        c2e_core::Flavor::Conformal,
        |i| c2e_core::Jet::constant(4, 0, g[i[0]][i[1]]),
    ))
    .unwrap();
    pack.to_complex()
}

/// The printed block pattern for a tensor with only `Ψ₃ = a`, `Ψ₄ = b`.
fn printed_matrix(a: C, b: C) -> DMatrix<C> {
    let z = C::new(0.0, 0.0);
    let mut m = DMatrix::from_element(16, 4, z);
    let mut put = |row: usize, col: usize, v: C| m[(row, col)] = v;
    put(7, 0, a.conj());
    put(9, 0, a);
    put(10, 0, -b.conj());
    put(13, 0, -b);
    put(10, 1, -a.conj());
    put(12, 1, -a);
    put(11, 2, -a.conj());
    put(13, 2, -a);
    put(15, 1, b);
    put(14, 2, b.conj());
    put(14, 3, a.conj());
    put(15, 3, a);
    m
}

#[test]
fn map_matrix_reproduces_the_printed_pattern() {
    let f = NullFrame::canonical();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let a = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let psi = NPScalars([C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), a, b]);
        let w = reconstruct_weyl(&psi, &f).unwrap();
        let m = weyl_map_matrix(&w, &f).unwrap();
        let diff = (&m - printed_matrix(a, b)).camax();
        assert!(diff < 1e-12, "matrix differs from the printed pattern by {diff:e}\n{m}");
    }
}

#[test]
fn pure_components_shift_boost_weight_by_their_own_weight() {
    let f = NullFrame::canonical();
    let one = C::new(0.8, 0.3);
    let m3 = weyl_map_matrix(&reconstruct_weyl(&NPScalars::pure(3, one), &f).unwrap(), &f).unwrap();
    let m4 = weyl_map_matrix(&reconstruct_weyl(&NPScalars::pure(4, one), &f).unwrap(), &f).unwrap();
    assert_eq!(boost_shifts(&m3, 1e-12), vec![1]);
    assert_eq!(boost_shifts(&m4, 1e-12), vec![2]);
}

#[test]
fn rank_four_exactly_when_psi3_is_nonzero_on_type_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for f in frames() {
        for _ in 0..20 {
            let mut psi = random_psi(&mut rng);
            psi.0[0] = C::new(0.0, 0.0);
            psi.0[1] = C::new(0.0, 0.0);
            psi.0[2] = C::new(0.0, 0.0);
            let w = reconstruct_weyl(&psi, &f).unwrap();
            assert_eq!(petrov_classify(&psi, 1e-12), PetrovType::III);
            assert_eq!(genericity_rank(&w, &f).unwrap(), 4);
            psi.0[3] = C::new(0.0, 0.0);
            let w = reconstruct_weyl(&psi, &f).unwrap();
            assert_eq!(petrov_classify(&psi, 1e-12), PetrovType::N);
            assert!(genericity_rank(&w, &f).unwrap() < 4);
        }
    }
}

#[test]
fn map_rejects_tensors_without_weyl_symmetries() {
    let f = NullFrame::canonical();
    let mut w = reconstruct_weyl(&NPScalars::pure(2, C::new(1.0, 0.0)), &f).unwrap();
    *w.get_mut(&[0, 1, 2, 3]) = c2e_core::Jet::constant(4, 0, C::new(5.0, 0.0));
    assert!(weyl_map_matrix(&w, &f).is_err());
    assert!(np_scalars(&w, &f).is_err());
}

#[test]
fn schwarzschild_static_frame_sees_only_psi2() {
    let chart = chart_by_name("schwarzschild").unwrap();
    for (r, th) in [(3.0, 1.1), (5.5, 0.7), (9.0, 2.0)] {
        let p = curvature_pack(chart.as_ref(), &[0.2, r, th, 0.4], 3).unwrap();
        // the chart is (−+++); the frame relations use the opposite sign
        let g = p.metric.g.truncate(0);
        let gm: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| -g.value(&[i, j])));
        let f = 1.0 - 2.0 / r;
        let mut e = [[0.0; 4]; 4];
        e[0][0] = 1.0 / f.sqrt();
        e[1][1] = f.sqrt();
        e[2][2] = 1.0 / r;
        e[3][3] = 1.0 / (r * th.sin());
        let frame = NullFrame::from_orthonormal(e, gm).unwrap();
        let w = pointwise(&p.weyl).scale_real(-1.0);
        let psi = np_scalars(&w, &frame).unwrap();
        let expected = NPScalars::pure(2, C::new(-1.0 / r.powi(3), 0.0));
        assert!(psi.max_abs_diff(&expected) < 1e-12, "{psi:?}");
        assert_eq!(petrov_classify(&psi, 1e-10), PetrovType::II);
    }
}

#[test]
fn algebraic_lorentzian_tensors_choose_the_expected_inversion() {
    use c2e_core::conformal::{invert_weyl, InversionMethod};
    let f = NullFrame::canonical();
    let g = f.metric();
    let metric = c2e_core::geometry::metric_pack_from(c2e_core::TensorJet::from_fn(
        4,
        vec![c2e_core::Variance::Down; 2],
        2.0,
        c2e_core::Flavor::Conformal,
        |i| c2e_core::Jet::constant(4, 2, g[i[0]][i[1]]),
    ))
    .unwrap();
    let real = |psi: NPScalars| {
        let w = reconstruct_weyl(&psi, &f).unwrap();
        c2e_core::TensorJet::from_fn(4, vec![c2e_core::Variance::Down; 4], 2.0, c2e_core::Flavor::Conformal, |i| {
            c2e_core::Jet::constant(4, 2, w.value(i).re)
        })
    };
    let report = invert_weyl(&real(NPScalars::pure(2, C::new(1.0, 0.0))), &metric).unwrap();
    assert_eq!(report.method, Some(InversionMethod::PreferredV));

    // |W|² = 0 with nonzero cubic trace
    let null = NPScalars::pure(2, C::from_polar(1.0, std::f64::consts::FRAC_PI_4));
    assert!(null.quadratic_invariant().abs() < 1e-12);
    let w = real(null);
    let report = invert_weyl(&w, &metric).unwrap();
    assert_eq!(report.method, Some(InversionMethod::Cubic));
    let wbar = report.wbar.as_ref().unwrap();
    let pairs = [(0, 0), (1, 1), (2, 2)];
    // W̄^{abcd} W_abce = δ^d_e
    let prod = wbar.contract(&w, &pairs).unwrap();
    for (k, c) in prod.comps().iter().enumerate() {
        let target = if k % 5 == 0 { 1.0 } else { 0.0 };
        assert!((c.value() - target).abs() < 1e-10);
    }
    // a pure trace term g_bc ξ_a − g_ac ξ_b lies outside the hook bundle
    let xi = [0.3, -1.2, 0.7, 0.4];
    let trace = c2e_core::TensorJet::from_fn(4, vec![c2e_core::Variance::Down; 3], 0.0, c2e_core::Flavor::Conformal, |i| {
        c2e_core::Jet::constant(4, 2, g[i[1]][i[2]] * xi[i[0]] - g[i[0]][i[2]] * xi[i[1]])
    });
    assert!(wbar.contract(&trace, &pairs).unwrap().max_abs() < 1e-10);

    // Type III: every invariant vanishes, only least squares is left
    let report = invert_weyl(&real(NPScalars::pure(3, C::new(0.6, -0.8))), &metric).unwrap();
    assert!(report.det_v.abs() < 1e-14);
    assert_eq!(report.rank, 4);
    assert_eq!(report.method, Some(InversionMethod::LeastSquares));

    let report = invert_weyl(&real(NPScalars::pure(4, C::new(1.0, 0.0))), &metric).unwrap();
    assert!(report.rank < 4);
    assert!(!report.is_generic());
}
