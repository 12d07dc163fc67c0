mod common;

use common::{chart, parse};
use twistprod::products::verify_proposition1;
use twistprod::theorems::{
    check_totally_geodesic_characterization, moore_forward_check, verify_connection_axioms, verify_corollary_chen,
    verify_corollary_doubly_warped, verify_hphi_decomposition, verify_lemma_decomposition, verify_minimality,
    verify_thm31_inequality, Block, Which,
};
use twistprod::{
    DoublyTwistedImmersionScenario, DoublyTwistedProduct, Error, ImmersionSetup, MetricField, SmoothMap, Verdict,
    VerificationReport,
};

const SAMPLES: usize = 20;
const TOL: f64 = 1e-8;

/// Target `(P, g_P) ×_{ρ₁,ρ₂} (line)` with `φ₁` given by `phi1` from the
/// parameter `s` and `φ₂` the identity of the line `w`.
fn plane_times_line(target_metric: [&str; 2], rho1: &str, rho2: &str, phi1: [&str; 2]) -> DoublyTwistedImmersionScenario {
    let p = chart(&[("a", 0.05, 1.5), ("b", -1.5, 1.5)]);
    let line = chart(&[("w", -1.0, 1.0)]);
    let s = chart(&[("s", -1.2, 1.2)]);
    let target = DoublyTwistedProduct::new(
        MetricField::parse_diagonal(p.clone(), &target_metric).unwrap(),
        MetricField::euclidean(line.clone()),
        &parse(rho1, &["a", "b", "w"]),
        &parse(rho2, &["a", "b", "w"]),
    )
    .unwrap();
    let src = chart(&[("v", -1.0, 1.0)]);
    DoublyTwistedImmersionScenario::from_target(
        MetricField::euclidean(s.clone()),
        MetricField::euclidean(src.clone()),
        target,
        SmoothMap::parse(s, p, &phi1).unwrap(),
        SmoothMap::identity(src, line).unwrap(),
    )
    .unwrap()
}

/// Unit circle in the plane with `ρ₂ = 1/r`: the first factor of the target
/// is then the cylinder `dr²/r² + dθ²` and the circle is one of its
/// geodesics, while in the flat plane it is not.
fn inverse_radius_circle() -> DoublyTwistedImmersionScenario {
    plane_times_line(["1", "1"], "1", "1/sqrt(a^2 + b^2)", ["cos(s)", "sin(s)"])
}

fn doubly_warped_circles() -> DoublyTwistedImmersionScenario {
    let s = chart(&[("s", -3.0, 3.0)]);
    let t = chart(&[("t", -3.0, 3.0)]);
    let p = chart(&[("a", -1.5, 1.5), ("b", -1.5, 1.5)]);
    let q = chart(&[("c", -1.5, 1.5), ("d", -1.5, 1.5)]);
    let vars = ["a", "b", "c", "d"];
    let target = DoublyTwistedProduct::new(
        MetricField::euclidean(p.clone()),
        MetricField::euclidean(q.clone()),
        &parse("exp(a^2 + b^2 - 1)", &vars),
        &parse("exp(c^2 + d^2 - 1)", &vars),
    )
    .unwrap();
    DoublyTwistedImmersionScenario::from_target(
        MetricField::euclidean(s.clone()),
        MetricField::euclidean(t.clone()),
        target,
        SmoothMap::parse(s, p, &["cos(s)", "sin(s)"]).unwrap(),
        SmoothMap::parse(t, q, &["cos(t)", "sin(t)"]).unwrap(),
    )
    .unwrap()
}

fn twisted_identity() -> DoublyTwistedImmersionScenario {
    let a = chart(&[("x", -1.0, 1.0), ("y", -1.0, 1.0)]);
    let b = chart(&[("u", -1.0, 1.0), ("v", -1.0, 1.0)]);
    let vars = ["x", "y", "u", "v"];
    let target = DoublyTwistedProduct::new(
        MetricField::euclidean(a.clone()),
        MetricField::euclidean(b.clone()),
        &parse("exp(0.3*x*v) + 0.1*u^2", &vars),
        &parse("cosh(0.5*u) + 0.1*y^2", &vars),
    )
    .unwrap();
    DoublyTwistedImmersionScenario::from_target(
        MetricField::euclidean(a.clone()),
        MetricField::euclidean(b.clone()),
        target,
        SmoothMap::identity(a.clone(), a).unwrap(),
        SmoothMap::identity(b.clone(), b).unwrap(),
    )
    .unwrap()
}

fn max_summary(r: &VerificationReport, key: &str) -> f64 {
    *r.summary.get(key).unwrap_or_else(|| panic!("{}: no summary key {key}", r.suite))
}

#[test]
fn circle_with_inverse_radius_twist_is_geodesic_in_the_first_factor() {
    let sc = inverse_radius_circle();
    for x in sc.sample_points(SAMPLES, 1) {
        let p = sc.at(&x).unwrap();
        // h restricted to the first factor vanishes...
        assert!(p.h_phi_block_max(Block::First) < 1e-12, "{}", p.h_phi_block_max(Block::First));
        // ...although the circle has curvature one in the flat factor
        assert!((p.h0_block_max(Block::First) - 1.0).abs() < 1e-12);
        // h⁰ is cancelled by −g·D ln ρ₂
        let t = p.h0_trace(Block::First);
        let d = &p.d_ln_rho2.df;
        assert!(t.iter().zip(d).all(|(a, b)| (a - b).abs() < 1e-12));
    }
    let tg1 = check_totally_geodesic_characterization(&sc, Which::First, SAMPLES, 1, TOL);
    assert_eq!(tg1.verdict, Verdict::Fail);
    assert!(!tg1.all_passed("n1.iff"));
    assert!(tg1.all_passed("n1.derived"));
    // the partial mean curvature vanishes but φ₁ is not minimal
    let min = verify_minimality(&sc, SAMPLES, 1, TOL);
    assert!(min.all_passed("n1.derived"));
    assert!(max_summary(&min, "max.n1.derived") < 1e-12);
}

#[test]
fn geodesic_factors_give_equality_in_the_warped_bound_whatever_the_warping() {
    // ρ = e^a grows along the image, ρ = e^b across it
    for (rho, d_norm) in [("exp(a)", 0.0), ("exp(b)", 1.0)] {
        let sc = plane_times_line(["1", "1"], rho, "1", ["s + 0.2", "0"]);
        let r = verify_corollary_chen(&sc, SAMPLES, 2, TOL);
        assert_eq!(r.verdict, Verdict::Pass, "{rho}: {:?}", r.error);
        assert!(max_summary(&r, "max.gap").abs() < 1e-12, "{rho}");
        assert!((max_summary(&r, "max.d_ln_rho") - d_norm).abs() < 1e-12, "{rho}");
    }
}

#[test]
fn curved_first_factor_makes_the_warped_bound_strict() {
    let sc = plane_times_line(["1", "1"], "exp(a^2 + b^2 - 1)", "1", ["cos(s)", "sin(s)"]);
    let r = verify_corollary_chen(&sc, SAMPLES, 3, TOL);
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.error);
    assert!((max_summary(&r, "min.gap") - 1.0).abs() < 1e-12);
    assert!((max_summary(&r, "min.d_ln_rho") - 2.0).abs() < 1e-12);
}

#[test]
fn doubly_warped_circles_have_slack_two() {
    let sc = doubly_warped_circles();
    let r = verify_thm31_inequality(&sc, SAMPLES, 4, TOL);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((max_summary(&r, "min.slack") - 2.0).abs() < 1e-12);
    assert!((max_summary(&r, "max.slack") - 2.0).abs() < 1e-12);
    assert!((max_summary(&r, "max.h_phi_norm2") - 10.0).abs() < 1e-12);
    let dw = verify_corollary_doubly_warped(&sc, SAMPLES, 4, TOL);
    assert_eq!(dw.verdict, Verdict::Pass, "{:?}", dw.error);
    for x in sc.sample_points(5, 4) {
        let v = sc.at(&x).unwrap().psi();
        assert!((v.derived - v.cross).abs() < 1e-12);
    }
}

#[test]
fn expansion_and_bound_hold_on_a_twisted_identity() {
    let sc = twisted_identity();
    let r = verify_thm31_inequality(&sc, SAMPLES, 5, TOL);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(max_summary(&r, "max.h_phi_norm2") < 1e-20);
    // the block formulas carry tangential terms that a codimension-zero map cannot match
    let h = verify_hphi_decomposition(&sc, SAMPLES, 5, TOL);
    assert_eq!(h.verdict, Verdict::Fail);
    assert!(h.all_passed("hphi1.normal") && h.all_passed("hphi2.normal") && h.all_passed("hphi3"));
}

#[test]
fn specialized_suites_refuse_general_products() {
    let sc = twisted_identity();
    for r in [
        verify_corollary_chen(&sc, SAMPLES, 6, TOL),
        verify_corollary_doubly_warped(&sc, SAMPLES, 6, TOL),
    ] {
        assert_eq!(r.verdict, Verdict::Errored);
        assert!(r.error.as_deref().unwrap().contains("not"), "{:?}", r.error);
    }
    // doubly warped circles are doubly warped but not warped
    let r = verify_corollary_chen(&doubly_warped_circles(), SAMPLES, 6, TOL);
    assert_eq!(r.verdict, Verdict::Errored);
}

#[test]
fn lemma_and_twist_matching_hold() {
    for sc in [doubly_warped_circles(), inverse_radius_circle(), twisted_identity()] {
        let r = verify_lemma_decomposition(&sc, SAMPLES, 7, TOL);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(sc.validate(SAMPLES, 7).is_ok());
    }
}

#[test]
fn mismatched_twists_are_reported() {
    let sc = doubly_warped_circles();
    // a source whose twists do not factor through the map
    let s = sc.source();
    let vars = ["s", "t"];
    let bad = DoublyTwistedProduct::new(s.g1().clone(), s.g2().clone(), &parse("1 + 0.1*s^2", &vars), &parse("1", &vars)).unwrap();
    let bad = DoublyTwistedImmersionScenario::new(bad, sc.target().clone(), sc.phi1().clone(), sc.phi2().clone()).unwrap();
    let err = bad.validate(SAMPLES, 8).unwrap_err();
    assert!(matches!(err, Error::TwistMismatch { .. } | Error::NotIsometric { .. }), "{err}");
    assert_eq!(verify_thm31_inequality(&bad, SAMPLES, 8, TOL).verdict, Verdict::Errored);
}

#[test]
fn product_connection_on_warped_and_twisted_products() {
    let warped = doubly_warped_circles();
    let r = verify_proposition1(warped.target(), SAMPLES, 9, TOL);
    assert_eq!(r.verdict, Verdict::Pass);
    let twisted = twisted_identity();
    let r = verify_proposition1(twisted.target(), SAMPLES, 9, TOL);
    // the four-term mixed formula only holds for doubly warped twists
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.all_passed("d1xd1") && r.all_passed("d2xd2") && !r.all_passed("mixed"));
    assert!(max_summary(&r, "max.mixed.levi_civita") < 1e-12);
}

#[test]
fn connection_axioms_hold_for_assembled_metrics() {
    for sc in [doubly_warped_circles(), twisted_identity()] {
        for g in [sc.target().assembled(), sc.source().assembled()] {
            let r = verify_connection_axioms(g, 10, 10, TOL);
            assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.failing_checks().next());
            assert_eq!(max_summary(&r, "max.torsion"), 0.0);
        }
    }
}

fn flat_setup(components: [&str; 3], split: (usize, usize), target_split: Option<(usize, usize)>) -> ImmersionSetup {
    let s = chart(&[("s", -1.0, 1.0), ("t", -1.0, 1.0)]);
    let t = chart(&[("x", -3.0, 3.0), ("y", -3.0, 3.0), ("z", -3.0, 3.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &components).unwrap();
    let setup = ImmersionSetup::new(MetricField::euclidean(s), MetricField::euclidean(t), map, split).unwrap();
    match target_split {
        Some((a, b)) => setup.with_target_split(a, b).unwrap(),
        None => setup,
    }
}

#[test]
fn product_maps_into_flat_space_are_mixed_totally_geodesic() {
    // a plane curve times a line, isometric for the flat source
    let setup = flat_setup(["cos(s)", "sin(s)", "t"], (1, 1), Some((2, 1)));
    let r = moore_forward_check(&setup, SAMPLES, 11, TOL);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(max_summary(&r, "max.mixed") < 1e-14);
}

#[test]
fn moore_check_requires_flat_target_and_nonempty_blocks() {
    let s = chart(&[("s", -1.0, 1.0), ("t", -1.0, 1.0)]);
    let t = chart(&[("x", -3.0, 3.0), ("y", 0.5, 3.0), ("z", -3.0, 3.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &["s", "1 + 0.1*t", "0"]).unwrap();
    let curved = ImmersionSetup::new(
        MetricField::parse_diagonal(s.clone(), &["1", "0.01/(1 + 0.1*t)^2"]).unwrap(),
        MetricField::parse_diagonal(t, &["1", "1/y^2", "1"]).unwrap(),
        map,
        (1, 1),
    )
    .unwrap();
    let r = moore_forward_check(&curved, 5, 12, TOL);
    assert_eq!(r.verdict, Verdict::Errored);
    assert!(r.error.unwrap().contains("not flat"));
    let degenerate = flat_setup(["cos(s)", "sin(s)", "t"], (2, 0), None);
    assert_eq!(moore_forward_check(&degenerate, 5, 12, TOL).verdict, Verdict::Errored);
}

#[test]
fn reports_are_reproducible_from_the_seed() {
    let sc = doubly_warped_circles();
    let a = serde_json::to_string(&verify_minimality(&sc, SAMPLES, 13, TOL)).unwrap();
    let b = serde_json::to_string(&verify_minimality(&sc, SAMPLES, 13, TOL)).unwrap();
    let c = serde_json::to_string(&verify_minimality(&sc, SAMPLES, 14, TOL)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
