mod common;

use common::{chart, fd_second_fundamental_form, inner, max_abs_diff};
use twistprod::immersion::{isometry_residual, mean_curvature, partial_traces, second_fundamental_form, umbilicity_residual};
use twistprod::{Error, ImmersionSetup, MetricField, SmoothMap, VectorField};

fn sphere(r: f64) -> ImmersionSetup {
    let s = chart(&[("t", 0.3, 2.8), ("p", -3.0, 3.0)]);
    let t = chart(&[("x", -3.0, 3.0), ("y", -3.0, 3.0), ("z", -3.0, 3.0)]);
    let map = SmoothMap::parse(
        s.clone(),
        t.clone(),
        &[&format!("{r}*sin(t)*cos(p)"), &format!("{r}*sin(t)*sin(p)"), &format!("{r}*cos(t)")],
    )
    .unwrap();
    let g = MetricField::parse_diagonal(s, &[&format!("{}", r * r), &format!("{}*sin(t)^2", r * r)]).unwrap();
    ImmersionSetup::new(g, MetricField::euclidean(t), map, (1, 1)).unwrap()
}

fn clifford_torus() -> ImmersionSetup {
    let s = chart(&[("s", -3.0, 3.0), ("t", -3.0, 3.0)]);
    let t = chart(&[("a", -2.0, 2.0), ("b", -2.0, 2.0), ("c", -2.0, 2.0), ("d", -2.0, 2.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &["cos(s)", "sin(s)", "cos(t)", "sin(t)"]).unwrap();
    ImmersionSetup::new(MetricField::euclidean(s), MetricField::euclidean(t), map, (1, 1))
        .unwrap()
        .with_target_split(2, 2)
        .unwrap()
}

/// A parabola in the hyperbolic half-plane with its induced metric, so the
/// target Christoffel symbols contribute.
fn hyperbolic_parabola() -> ImmersionSetup {
    let s = chart(&[("t", -1.0, 1.0)]);
    let t = chart(&[("x", -2.0, 2.0), ("y", 0.2, 3.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &["t", "1 + 0.3*t^2"]).unwrap();
    let g = MetricField::parse_diagonal(s, &["(1 + 0.36*t^2) / (1 + 0.3*t^2)^2"]).unwrap();
    let h = MetricField::parse_diagonal(t, &["1/y^2", "1/y^2"]).unwrap();
    ImmersionSetup::new(g, h, map, (1, 0)).unwrap()
}

/// A non-product graph surface in a curved 3-dimensional target.
fn curved_graph() -> ImmersionSetup {
    let s = chart(&[("u", -0.8, 0.8), ("v", -0.8, 0.8)]);
    let t = chart(&[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &["u", "v", "0.4*u*v + 0.2*u^2"]).unwrap();
    // target metric diag(1, e^{x}, 1 + z^2) pulled back by hand
    let g = MetricField::parse_rows(
        s,
        &[
            &["1 + (1 + (0.4*u*v + 0.2*u^2)^2)*(0.4*v + 0.4*u)^2", "(1 + (0.4*u*v + 0.2*u^2)^2)*(0.4*v + 0.4*u)*(0.4*u)"],
            &["(1 + (0.4*u*v + 0.2*u^2)^2)*(0.4*v + 0.4*u)*(0.4*u)", "exp(u) + (1 + (0.4*u*v + 0.2*u^2)^2)*(0.4*u)^2"],
        ],
    )
    .unwrap();
    let h = MetricField::parse_diagonal(t, &["1", "exp(x)", "1 + z^2"]).unwrap();
    ImmersionSetup::new(g, h, map, (1, 1)).unwrap()
}

fn fixtures() -> Vec<(&'static str, ImmersionSetup)> {
    vec![
        ("sphere", sphere(1.7)),
        ("torus", clifford_torus()),
        ("hyperbolic", hyperbolic_parabola()),
        ("curved_graph", curved_graph()),
    ]
}

#[test]
fn fixtures_are_isometric() {
    for (name, s) in fixtures() {
        let r = isometry_residual(&s, 30, 1).unwrap();
        assert!(r < 1e-12, "{name}: {r}");
    }
}

#[test]
fn second_fundamental_form_matches_brute_force() {
    for (name, s) in fixtures() {
        for x in s.sample_points(8, 2) {
            let p = s.at(&x).unwrap();
            let scale = 1.0 + p.squared_norm().sqrt();
            for i in 0..s.dim() {
                for j in 0..s.dim() {
                    let fd = fd_second_fundamental_form(&s, &x, i, j);
                    let d = max_abs_diff(p.h_coordinate(i, j), &fd);
                    assert!(d < 1e-5 * scale, "{name} h({i},{j}) at {x:?}: off by {d}");
                }
            }
        }
    }
}

#[test]
fn second_fundamental_form_is_symmetric_and_normal() {
    for (name, s) in fixtures() {
        for x in s.sample_points(10, 3) {
            let p = s.at(&x).unwrap();
            let gm = s.target().metric_at(&p.y).unwrap();
            for i in 0..s.dim() {
                for j in 0..s.dim() {
                    assert!(max_abs_diff(p.h_coordinate(i, j), p.h_coordinate(j, i)) < 1e-14, "{name}");
                    for k in 0..s.dim() {
                        let t: Vec<f64> = p.jacobian.column(k).iter().copied().collect();
                        assert!(inner(&gm, p.h_coordinate(i, j), &t).abs() < 1e-12, "{name}");
                    }
                }
            }
        }
    }
}

#[test]
fn field_form_agrees_with_coordinate_form() {
    let s = curved_graph();
    let c = s.source().chart().clone();
    let u = VectorField::parse(c.clone(), &["1 + v", "u*v"]).unwrap();
    let w = VectorField::parse(c.clone(), &["sin(u)", "2"]).unwrap();
    for x in s.sample_points(6, 4) {
        let p = s.at(&x).unwrap();
        let h = second_fundamental_form(&s, &u, &w, &x).unwrap();
        let expect = p.h(&u.at(&x).unwrap(), &w.at(&x).unwrap());
        assert!(max_abs_diff(&h.components, &expect) < 1e-12);
        assert!(p.gauss_residual() < 1e-10);
    }
}

#[test]
fn mean_curvature_splits_into_partial_traces() {
    for (name, s) in fixtures() {
        let (n1, n2) = s.split();
        if n1 == 0 || n2 == 0 {
            assert!(matches!(partial_traces(&s, &s.sample_points(1, 0)[0]), Err(Error::DegenerateSplit { .. })));
            continue;
        }
        for x in s.sample_points(10, 5) {
            let (h, _) = mean_curvature(&s, &x).unwrap();
            let t = partial_traces(&s, &x).unwrap();
            let n = (n1 + n2) as f64;
            let combo: Vec<f64> = (0..h.components.len())
                .map(|a| (n1 as f64 * t.h1[a] + n2 as f64 * t.h2[a]) / n)
                .collect();
            assert!(max_abs_diff(&h.components, &combo) < 1e-13, "{name}");
        }
    }
}

#[test]
fn round_sphere_is_umbilical_with_mean_curvature_one_over_radius() {
    let r = 1.7;
    let s = sphere(r);
    for x in s.sample_points(10, 6) {
        let u = umbilicity_residual(&s, &x).unwrap();
        assert!(u.residual < 1e-12);
        assert!((u.lambda.unwrap() - 1.0).abs() < 1e-12);
        let (_, h2) = mean_curvature(&s, &x).unwrap();
        assert!((h2.sqrt() - 1.0 / r).abs() < 1e-12);
    }
}

#[test]
fn clifford_torus_traces_and_mixed_part() {
    let s = clifford_torus();
    for x in s.sample_points(10, 7) {
        let p = s.at(&x).unwrap();
        let t = p.partial_traces().unwrap();
        let expect1 = [-x[0].cos(), -x[0].sin(), 0.0, 0.0];
        let expect2 = [0.0, 0.0, -x[1].cos(), -x[1].sin()];
        assert!(max_abs_diff(&t.trace1, &expect1) < 1e-13);
        assert!(max_abs_diff(&t.trace2, &expect2) < 1e-13);
        assert!(p.mixed_residual() < 1e-14);
        // not umbilical: h(e1,e1) and h(e2,e2) point in different directions
        assert!(p.umbilicity().residual > 0.5);
    }
}

#[test]
fn rank_deficient_maps_are_reported() {
    let s = chart(&[("u", -1.0, 1.0), ("v", -1.0, 1.0)]);
    let t = chart(&[("x", -2.0, 2.0), ("y", -2.0, 2.0), ("z", -2.0, 2.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &["u + v", "u + v", "0"]).unwrap();
    let setup = ImmersionSetup::new(MetricField::euclidean(s), MetricField::euclidean(t), map, (1, 1)).unwrap();
    assert!(matches!(setup.at(&[0.1, 0.2]), Err(Error::RankDeficient { .. })));
}

#[test]
fn nonisometric_maps_fail_the_gauss_cross_check() {
    let s = chart(&[("t", -1.0, 1.0)]);
    let t = chart(&[("a", -3.0, 3.0), ("b", -3.0, 3.0)]);
    let map = SmoothMap::parse(s.clone(), t.clone(), &["cos(t)", "sin(t)"]).unwrap();
    // a constant rescaling keeps the connection, so the source metric has to vary
    let g = MetricField::parse_diagonal(s.clone(), &["1 + t^2"]).unwrap();
    let setup = ImmersionSetup::new(g, MetricField::euclidean(t), map, (1, 0)).unwrap();
    assert!(isometry_residual(&setup, 5, 0).unwrap() > 0.01);
    let e = VectorField::coordinate(&s, 0);
    let err = second_fundamental_form(&setup, &e, &e, &[0.3]).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}
