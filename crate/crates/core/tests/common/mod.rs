//! Test-side oracles: random expressions and finite-difference versions of
//! the quantities the library computes with jets.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use twistprod::{ChartDomain, Expression, ImmersionSetup, MetricField};

/// `|a − b| / max(|a|, |b|, 1)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Random smooth expression over `vars`, finite and well inside every
/// function's domain on `[-1, 1]^n`.
pub fn random_expression(rng: &mut impl Rng, vars: &[&str], depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.7) {
            vars[rng.random_range(0..vars.len())].to_string()
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0))
        };
    }
    let a = random_expression(rng, vars, depth - 1);
    match rng.random_range(0..14) {
        0 => format!("({a} + {})", random_expression(rng, vars, depth - 1)),
        1 => format!("({a} - {})", random_expression(rng, vars, depth - 1)),
        2 => format!("({a}) * ({})", random_expression(rng, vars, depth - 1)),
        3 => format!("({a}) / (2.5 + cos({}))", random_expression(rng, vars, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(0.3*tanh({a}))"),
        7 => format!("ln(2 + sin({a}))"),
        8 => format!("sqrt(1 + ({a})^2)"),
        9 => format!("tanh({a})"),
        10 => format!("-({a})^3"),
        11 => format!("(1.5 + sin({a}))^0.7"),
        12 => format!("pow(1.2 + cos({a}), {})", random_expression(rng, vars, 0)),
        _ => format!("cosh(0.5*sin({a})) * sinh(0.2*{a})"),
    }
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += h;
    y
}

pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| (f(&shifted(x, i, h)) - f(&shifted(x, i, -h))) / (2.0 * h))
        .collect()
}

/// Second differences of values only, row-major.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    let f0 = f(x);
    for i in 0..n {
        out[i * n + i] = (f(&shifted(x, i, h)) - 2.0 * f0 + f(&shifted(x, i, -h))) / (h * h);
        for j in 0..i {
            let pp = f(&shifted(&shifted(x, i, h), j, h));
            let pm = f(&shifted(&shifted(x, i, h), j, -h));
            let mp = f(&shifted(&shifted(x, i, -h), j, h));
            let mm = f(&shifted(&shifted(x, i, -h), j, -h));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

pub fn chart(spec: &[(&str, f64, f64)]) -> ChartDomain {
    ChartDomain::from_triples(spec).unwrap()
}

pub fn parse(src: &str, vars: &[&str]) -> Expression {
    Expression::parse(src, vars).unwrap()
}

/// Γ^k_ij from central differences of the metric entries, `[k][i][j]`.
pub fn fd_christoffel(g: &MetricField, x: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = g.dim();
    let gm = g.metric_at(x).unwrap();
    let inv = gm.clone().try_inverse().unwrap();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| (g.metric_at(&shifted(x, l, h)).unwrap() - g.metric_at(&shifted(x, l, -h)).unwrap()) / (2.0 * h))
        .collect();
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[k][i][j] = 0.5 * s;
            }
        }
    }
    out
}

/// `h(∂_i, ∂_j)` by brute force: finite-difference second derivatives of
/// the map, finite-difference Christoffel symbols of the target, and the
/// normal part taken through a `g_M`-orthonormal basis of `ker(Jᵀ G)`.
pub fn fd_second_fundamental_form(setup: &ImmersionSetup, x: &[f64], i: usize, j: usize) -> Vec<f64> {
    let h = 1e-4;
    let map = setup.map();
    let y = map.value(x).unwrap();
    let m = y.len();
    let n = x.len();
    let phi = |p: &[f64], a: usize| map.value(p).unwrap()[a];
    let mut jac = DMatrix::zeros(m, n);
    for a in 0..m {
        let g = fd_gradient(|p| phi(p, a), x, 1e-6);
        for c in 0..n {
            jac[(a, c)] = g[c];
        }
    }
    let second: Vec<f64> = (0..m).map(|a| fd_hessian(|p| phi(p, a), x, h)[i * n + j]).collect();
    let gamma = fd_christoffel(setup.target(), &y, 1e-6);
    let mut w = second;
    for (k, wk) in w.iter_mut().enumerate() {
        for a in 0..m {
            for b in 0..m {
                *wk += gamma[k][a][b] * jac[(a, i)] * jac[(b, j)];
            }
        }
    }
    let gm = setup.target().metric_at(&y).unwrap();
    let constraint = jac.transpose() * &gm;
    // Euclidean complement of the row space of Jᵀ G is its kernel, the
    // g_M-normal space
    let q = constraint.transpose().qr().q();
    let mut normals: Vec<Vec<f64>> = Vec::new();
    for c in 0..m {
        let mut e = nalgebra::DVector::zeros(m);
        e[c] = 1.0;
        let r = &e - &q * (q.transpose() * &e);
        let mut v: Vec<f64> = r.iter().copied().collect();
        for u in &normals {
            let d = inner(&gm, &v, u);
            for k in 0..m {
                v[k] -= d * u[k];
            }
        }
        let nrm = inner(&gm, &v, &v).sqrt();
        if nrm > 1e-6 && normals.len() < m - n {
            v.iter_mut().for_each(|c| *c /= nrm);
            normals.push(v);
        }
    }
    let mut out = vec![0.0; m];
    for u in &normals {
        let d = inner(&gm, &w, u);
        for c in 0..m {
            out[c] += d * u[c];
        }
    }
    out
}

pub fn inner(g: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * g[(i, j)] * b[j];
        }
    }
    s
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
