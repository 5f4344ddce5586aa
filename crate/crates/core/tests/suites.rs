use c2e_core::harness::Status;
use c2e_core::suites::{run_suite, Suite, SuiteConfig};
use c2e_core::Error;

fn small(suite: Suite, chart: Option<&str>) -> SuiteConfig {
    let mut c = SuiteConfig::new(suite);
    c.chart = chart.map(str::to_string);
    c.points = 2;
    c.trials = 2;
    c
}

fn assert_passes(cfg: &SuiteConfig) {
    let r = run_suite(cfg).unwrap();
    let failed: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Fail).map(|c| (&c.name, c.max_residual)).collect();
    assert!(r.passed(), "{} on {}: {failed:?}", r.suite, r.chart);
}

#[test]
fn every_suite_passes_on_its_default_chart() {
    for s in Suite::ALL {
        assert_passes(&small(s, None));
    }
}

#[test]
fn identities_on_other_charts() {
    for chart in ["schwarzschild", "perturbed:3", "flat", "perturbed3"] {
        assert_passes(&small(Suite::Identities, Some(chart)));
    }
}

#[test]
fn generic_checks_are_not_applicable_on_flat_space() {
    let r = run_suite(&small(Suite::Identities, Some("flat"))).unwrap();
    let status = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap().status;
    assert_eq!(status("e1-after-e0"), Status::Pass);
    assert_eq!(status("c1-after-e0"), Status::NotApplicable);
    assert_eq!(r.summary["generic_points"], 0);
}

#[test]
fn curved_bgg_compositions_do_not_vanish() {
    let r = run_suite(&small(Suite::BggFlat, Some("s2xs2"))).unwrap();
    assert_eq!(r.summary["conformally_flat"], false);
    assert!(r.checks.iter().all(|c| c.max_residual > 1e-3));
    assert!(r.passed());
}

#[test]
fn preconditions_are_errors() {
    let err = run_suite(&small(Suite::Onesol, Some("flat"))).unwrap_err();
    assert!(matches!(err, Error::NotGeneric(_)), "{err}");
    assert!(err.to_string().contains("not generic"));
    let err = run_suite(&small(Suite::Nosol, Some("s2xs2"))).unwrap_err();
    assert!(matches!(err, Error::Classification(_)), "{err}");
    assert!(matches!(run_suite(&small(Suite::Proj, Some("torus"))), Err(Error::UnknownChart(_))));
}

#[test]
fn runs_are_deterministic() {
    for s in [Suite::Identities, Suite::Proj, Suite::Np] {
        let cfg = small(s, None);
        let a = serde_json::to_string(&run_suite(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(&cfg).unwrap()).unwrap();
        assert_eq!(a, b, "{s}");
    }
}

#[test]
fn seed_changes_the_sample() {
    let mut cfg = small(Suite::Identities, None);
    let a = run_suite(&cfg).unwrap();
    cfg.seed = 1;
    let b = run_suite(&cfg).unwrap();
    assert_ne!(a.points, b.points);
}

#[test]
fn only_restricts_the_report() {
    let mut cfg = small(Suite::Identities, Some("schwarzschild"));
    cfg.only = vec!["e1-after-e0".into()];
    let r = run_suite(&cfg).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].samples, 4);
    cfg.only = vec!["no-such-check".into()];
    assert!(run_suite(&cfg).is_err());
}
