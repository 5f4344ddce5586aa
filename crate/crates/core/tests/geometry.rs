use c2e_core::geometry::{chart_by_name, curvature_pack};
use c2e_core::tensor::TensorJet;

fn rel(a: &TensorJet, b: &TensorJet) -> f64 {
    a.max_abs_diff(b) / (1.0 + a.max_abs().max(b.max_abs()))
}

#[test]
fn flat_chart_has_no_curvature() {
    let chart = chart_by_name("flat").unwrap();
    let p = curvature_pack(chart.as_ref(), &[0.1, 0.2, 0.3, 0.4], 5).unwrap();
    for t in [&p.riemann, &p.weyl, &p.schouten, &p.cotton] {
        assert_eq!(t.max_abs(), 0.0);
    }
}

#[test]
fn product_of_spheres_is_einstein() {
    let chart = chart_by_name("s2xs2").unwrap();
    let p = curvature_pack(chart.as_ref(), &[0.3, -0.2, 0.5, 0.1], 5).unwrap();
    assert!(rel(&p.ricci, &p.metric.g.truncate(3).with_weight(0.0)) < 1e-12);
    assert!((p.j.value(&[]) - 2.0 / 3.0).abs() < 1e-12);
    let sixth = p.metric.g.truncate(3).scale_real(1.0 / 6.0).with_weight(0.0);
    assert!(rel(&p.schouten, &sixth) < 1e-12);
    assert!(p.weyl.max_abs() > 0.1);
}

#[test]
fn schwarzschild_is_ricci_flat() {
    let chart = chart_by_name("schwarzschild").unwrap();
    let p = curvature_pack(chart.as_ref(), &[0.0, 4.0, 1.2, 0.3], 5).unwrap();
    assert!(p.ricci.max_abs() < 1e-12 * p.riemann.max_abs().max(1.0), "{}", p.ricci.max_abs());
    assert!(p.weyl.max_abs() > 1e-3);
}

#[test]
fn conformally_flat_chart_has_no_weyl() {
    let chart = chart_by_name("conf-flat").unwrap();
    let p = curvature_pack(chart.as_ref(), &[0.1, -0.3, 0.2, 0.0], 5).unwrap();
    assert!(p.weyl.max_abs() < 1e-9 * (1.0 + p.riemann.max_abs()), "{}", p.weyl.max_abs());
    assert!(p.riemann.max_abs() > 1e-3);
}
