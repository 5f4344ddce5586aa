use std::sync::Arc;

use c2e_core::conformal::*;
use c2e_core::geometry::chart_by_name;
use c2e_core::harness::{check_complex, check_equivalence, section_residual, Residual};
use c2e_core::{Bundle, Flavor, Variance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn point(name: &str) -> Vec<f64> {
    match name {
        "schwarzschild" => vec![0.2, 4.5, 1.1, 0.3],
        "perturbed" => vec![0.1, -0.05, 0.12, 0.2],
        "perturbed3" => vec![0.1, -0.05, 0.12],
        _ => vec![0.1, -0.2, 0.3, 0.15],
    }
}

fn at(name: &str, order: usize) -> ConformalPoint {
    ConformalPoint::new(chart_by_name(name).unwrap().as_ref(), &point(name), order).unwrap()
}

fn worst(rs: &[Residual]) -> (f64, String) {
    rs.iter().fold((0.0, String::new()), |(v, n), r| if r.value > v { (r.value, r.name.clone()) } else { (v, n) })
}

#[test]
fn compositions_on_generic_charts() {
    for name in ["s2xs2", "s2xs2-rescaled", "perturbed", "schwarzschild"] {
        let cp = at(name, 6);
        assert!(cp.is_generic(), "{name}");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Some(cp.metric());
        let sigma = Bundle::scalar(1.0).random_section(4, 6, Flavor::Conformal, m, &mut rng).unwrap();
        let tau = Bundle::form(1, 1.0).random_section(4, 6, Flavor::Conformal, m, &mut rng).unwrap();
        let e0s = e0(&sigma, &cp).unwrap();
        let comp = ek(1, &e0s, &cp).unwrap().relative_residual(&weyl_gradient_term(&sigma, &cp).unwrap());
        assert!(comp < TOL, "{name}: E1E0 {comp:e}");
        let dts = d_tilde(&sigma, &cp).unwrap();
        let r = c1(&e0s, &cp).unwrap().relative_residual(&dts);
        assert!(r < TOL, "{name}: C1E0 {r:e}");
        let ob = cp.obstruction().unwrap();
        let rhs = e0s.try_add(&ob.phi.mul_scalar(&sigma).unwrap()).unwrap();
        let r = d1(&dts, &cp).unwrap().relative_residual(&rhs);
        assert!(r < TOL, "{name}: D1d̃ {r:e}");
        let r = d_tilde(&dts, &cp).unwrap().relative_residual(&ob.dz.mul_scalar(&sigma).unwrap());
        assert!(r < TOL, "{name}: d̃d̃ {r:e}");
        let cd = c1(&d1(&tau, &cp).unwrap(), &cp).unwrap();
        let rhs = tau
            .try_sub(&h1prime(&d_tilde(&tau, &cp).unwrap(), &cp).unwrap())
            .unwrap()
            .try_sub(&cdcomp_correction(&tau, &cp).unwrap())
            .unwrap();
        let r = cd.relative_residual(&rhs);
        assert!(r < TOL, "{name}: C1D1 {r:e}");
    }
}

#[test]
fn lorentzian_chart_is_inverted_through_v() {
    let chart = chart_by_name("schwarzschild").unwrap();
    for p in [[0.2, 4.5, 1.1, 0.3], [0.1, 7.0, 2.0, 1.0], [-0.3, 3.2, 1.4, -0.8]] {
        let cp = ConformalPoint::new(chart.as_ref(), &p, 5).unwrap();
        assert_eq!(cp.report.method, Some(InversionMethod::PreferredV), "{p:?}");
    }
}

#[test]
fn left_inverse_lives_on_the_hook_bundle() {
    for name in ["s2xs2", "perturbed", "schwarzschild"] {
        let cp = at(name, 4);
        let wbar = cp.wbar().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let raw = Bundle::new(vec![Variance::Down; 3], c2e_core::Symmetry::None, 0.0)
            .unwrap()
            .random_section(4, 4, Flavor::Conformal, None, &mut rng)
            .unwrap();
        let hook = Bundle::hook(2, 0.0).project(&raw, Some(cp.metric())).unwrap();
        let pairs = [(0, 0), (1, 1), (2, 2)];
        let full = wbar.contract(&raw, &pairs).unwrap();
        let projected = wbar.contract(&hook, &pairs).unwrap();
        let r = full.relative_residual(&projected);
        assert!(r < TOL, "{name}: complement not annihilated {r:e}");

        // W̄^{abc}_d W_abce = g_de
        let product = wbar.contract(&cp.pack.weyl, &pairs).unwrap();
        let r = product.relative_residual(&cp.metric().g);
        assert!(r < TOL, "{name}: W̄·W ≠ g {r:e}");
    }
}

#[test]
fn one_solution_complex_on_rescaled_product() {
    let cp = Arc::new(at("s2xs2-rescaled", 6));
    assert_eq!(cp.classification(), Classification::OneSolutionCandidate);
    let (top, eq) = build_onesol_complex(cp, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (v, n) = worst(&check_complex(&top, 2, &mut rng).unwrap());
    assert!(v < 1e-8, "{n}: {v:e}");
    let (v, n) = worst(&check_equivalence(&eq, 2, &mut rng).unwrap());
    assert!(v < 1e-8, "{n}: {v:e}");
}

#[test]
fn no_solution_complexes_in_four_and_three_dimensions() {
    for (name, order) in [("perturbed", 8), ("perturbed3", 7)] {
        let cp = Arc::new(at(name, order));
        let (top, eq) = build_nosol_complex(cp, order).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = top.sampler.sample(top.space(0), &mut rng).unwrap();
        let back = eq.h[0].apply(&top.ops[0].apply(&x).unwrap()).unwrap();
        assert!(section_residual(&back, &x) < 1e-8, "{name}: H0E0");
        let (v, n) = worst(&check_complex(&top, 2, &mut rng).unwrap());
        assert!(v < 1e-8, "{name} {n}: {v:e}");
        let (v, n) = worst(&check_equivalence(&eq, 2, &mut rng).unwrap());
        assert!(v < 1e-8, "{name} {n}: {v:e}");
    }
}

#[test]
fn one_solution_needs_a_generic_metric() {
    let cp = Arc::new(at("flat", 5));
    assert!(!cp.is_generic());
    assert!(matches!(build_onesol_complex(cp, 5), Err(c2e_core::Error::NotGeneric(_))));
}
