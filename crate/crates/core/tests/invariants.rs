use c2e_core::geometry::{chart_by_name, metric_pack, Polynomial};
use c2e_core::harness::sample_points;
use c2e_core::np::{np_scalars, quadratic_invariant, reconstruct_weyl, NPScalars, NullFrame};
use c2e_core::{Bundle, Flavor, Jet, MetricPack, TensorJet, Variance};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIM: usize = 3;
const ORDER: usize = 4;

fn jet(coeffs: Vec<f64>) -> Jet {
    let mut it = coeffs.into_iter().cycle();
    Jet::from_fn(DIM, ORDER, |_| it.next().unwrap_or(0.0))
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 8..16)
}

fn close(a: &Jet, b: &Jet) -> f64 {
    a.try_sub(b).unwrap().max_abs() / (1.0 + a.max_abs().max(b.max_abs()))
}

fn s2xs2_metric(p: &[f64]) -> MetricPack {
    metric_pack(chart_by_name("s2xs2").unwrap().as_ref(), p, 3).unwrap()
}

fn arbitrary(valence: Vec<Variance>, seed: u64) -> TensorJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TensorJet::from_fn(4, valence, 1.0, Flavor::Conformal, |_| {
        Jet::from_fn(4, 3, |_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5..0.5f64, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jet_product_is_a_commutative_ring(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (jet(a), jet(b), jet(c));
        let ab = a.try_mul(&b).unwrap();
        prop_assert!(close(&ab, &b.try_mul(&a).unwrap()) < 1e-14);
        let left = ab.try_mul(&c).unwrap();
        let right = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right) < 1e-13);
        let distributed = ab.try_add(&a.try_mul(&c).unwrap()).unwrap();
        prop_assert!(close(&a.try_mul(&b.try_add(&c).unwrap()).unwrap(), &distributed) < 1e-13);
    }

    #[test]
    fn derivative_obeys_leibniz(a in coeffs(), b in coeffs(), var in 0..DIM) {
        let (a, b) = (jet(a), jet(b));
        let lhs = a.try_mul(&b).unwrap().partial(var).unwrap();
        let low = ORDER - 1;
        let rhs = a.partial(var).unwrap().try_mul(&b.truncate(low)).unwrap()
            .try_add(&a.truncate(low).try_mul(&b.partial(var).unwrap()).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn exp_and_ln_are_inverse(a in coeffs(), b in coeffs()) {
        let (a, b) = (jet(a), jet(b));
        prop_assert!(close(&a.exp().unwrap().ln().unwrap(), &a) < 1e-12);
        let sum = a.try_add(&b).unwrap().exp().unwrap();
        let product = a.exp().unwrap().try_mul(&b.exp().unwrap()).unwrap();
        prop_assert!(close(&sum, &product) < 1e-12);
    }

    #[test]
    fn projections_are_idempotent_and_land_in_the_bundle(p in point(), seed in any::<u64>()) {
        let g = s2xs2_metric(&p);
        let down = |k: usize| vec![Variance::Down; k];
        for (bundle, rank) in [
            (Bundle::form(2, 1.0), 2),
            (Bundle::sym0(1.0), 2),
            (Bundle::hook(1, 1.0), 2),
            (Bundle::hook(2, 1.0), 3),
        ] {
            let t = arbitrary(down(rank), seed);
            let once = bundle.project(&t, Some(&g)).unwrap();
            let twice = bundle.project(&once, Some(&g)).unwrap();
            prop_assert!(twice.relative_residual(&once) < 1e-11);
            prop_assert!(bundle.membership_residual(&once, Some(&g)).unwrap() < 1e-11);
        }
    }

    #[test]
    fn shifted_polynomial_moves_its_argument(seed in any::<u64>(), c in point(), x in point()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = Polynomial::random(4, 3, 1.0, &mut rng);
        let moved: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
        let expected = poly.eval(&moved);
        prop_assert!((poly.shifted(&c).eval(&x) - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn np_scalars_round_trip(parts in prop::array::uniform10(-2.0..2.0f64), boost in 0.5..2.0f64, spin in 0.0..6.2f64) {
        let psi = NPScalars(std::array::from_fn(|k| C::new(parts[2 * k], parts[2 * k + 1])));
        let frame = NullFrame::canonical().boost(boost).unwrap().spin(spin).unwrap();
        let w = reconstruct_weyl(&psi, &frame).unwrap();
        prop_assert!(np_scalars(&w, &frame).unwrap().max_abs_diff(&psi) < 1e-12 * (1.0 + psi.max_abs()));
        let q = quadratic_invariant(&w, &frame).unwrap();
        prop_assert!((q - psi.quadratic_invariant()).abs() < 1e-10 * (1.0 + q.abs()));
    }

    #[test]
    fn sample_points_are_reproducible_and_inside(seed in any::<u64>(), count in 1..20usize) {
        let bounds = [(-1.0, 1.0), (2.0, 5.0), (0.0, 0.5)];
        let a = sample_points(&bounds, count, seed, 0.8);
        prop_assert_eq!(&a, &sample_points(&bounds, count, seed, 0.8));
        prop_assert_eq!(a.len(), count);
        for p in &a {
            for (x, (lo, hi)) in p.iter().zip(bounds) {
                prop_assert!(*x >= lo && *x <= hi);
            }
        }
    }
}
