use std::sync::Arc;

use c2e_core::geometry::{chart_by_name, ConformalScale};
use c2e_core::harness::{check_complex, check_equivalence, Residual};
use c2e_core::projective::*;
use c2e_core::{Bundle, Flavor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn worst(rs: &[Residual]) -> (f64, String) {
    rs.iter().fold((0.0, String::new()), |(v, n), r| if r.value > v { (r.value, r.name.clone()) } else { (v, n) })
}

#[test]
fn schwarzschild_connection_before_and_after_a_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chart = chart_by_name("schwarzschild").unwrap();
    let pt = [0.2, 5.0, 1.2, 0.7];
    let ups = ConformalScale::random(4, &mut rng).centred_at(&pt);
    for change in [None, Some(&ups)] {
        let pp = ProjectivePoint::from_chart(chart.as_ref(), &pt, 6, change).unwrap();
        assert_eq!(pp.report.rank, 4);
        let sigma = Bundle::scalar(1.0).random_section(4, 6, Flavor::Projective, None, &mut rng).unwrap();
        let e0s = e0_proj(&sigma, &pp).unwrap();
        let r = e1_proj(&e0s, &pp).unwrap().relative_residual(&comp_rhs_proj(&sigma, &pp).unwrap());
        assert!(r < 1e-9, "E1E0 {r:e}");
        let r = c1_proj(&e0s, &pp).unwrap().relative_residual(&d_tilde_proj(&sigma, &pp).unwrap());
        assert!(r < 1e-9, "C1E0 {r:e}");
        let tau = Bundle::form(1, 1.0).random_section(4, 6, Flavor::Projective, None, &mut rng).unwrap();
        let cd = c1_proj(&d1_proj(&tau, &pp).unwrap(), &pp).unwrap();
        let rhs = tau
            .try_sub(&h1prime_proj(&d_tilde_proj(&tau, &pp).unwrap(), &pp).unwrap())
            .unwrap()
            .try_sub(&cdcomp_correction_proj(&tau, &pp).unwrap())
            .unwrap();
        let r = cd.relative_residual(&rhs);
        assert!(r < 1e-9, "C1D1 {r:e}");

        let (top, eq) = build_onesol_proj_complex(Arc::new(pp), 6).unwrap();
        let (v, n) = worst(&check_complex(&top, 2, &mut rng).unwrap());
        assert!(v < 1e-8, "{n}: {v:e}");
        let (v, n) = worst(&check_equivalence(&eq, 2, &mut rng).unwrap());
        assert!(v < 1e-8, "{n}: {v:e}");
    }
}

#[test]
fn surfaces_use_the_cotton_route() {
    let chart = chart_by_name("perturbed2").unwrap();
    let pp = ProjectivePoint::from_chart(chart.as_ref(), &[0.1, 0.05], 7, None).unwrap();
    let (top, eq) = build_nosol_proj_complex(Arc::new(pp), 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (v, n) = worst(&check_complex(&top, 2, &mut rng).unwrap());
    assert!(v < 1e-8, "{n}: {v:e}");
    let (v, n) = worst(&check_equivalence(&eq, 2, &mut rng).unwrap());
    assert!(v < 1e-8, "{n}: {v:e}");
}
