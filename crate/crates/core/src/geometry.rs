//! Single-chart Riemannian geometry.
//!
//! A manifold is represented by one coordinate chart with a box of sampling
//! bounds. Metric entries are expressions in the chart coordinates; their
//! derivatives come from jets, never from finite differences.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg;

/// Default lower bound for Cholesky pivots.
pub const DEFAULT_SPD_TOLERANCE: f64 = 1e-12;

/// Open interval of a chart coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Named coordinates with a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    coords: Vec<String>,
    bounds: Vec<Interval>,
}

impl ChartDomain {
    pub fn new(coords: Vec<String>, bounds: Vec<Interval>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidChart("a chart needs at least one coordinate".into()));
        }
        if coords.len() != bounds.len() {
            return Err(Error::DimensionMismatch {
                context: "chart bounds".into(),
                expected: coords.len(),
                found: bounds.len(),
            });
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::InvalidChart(format!("coordinate `{c}` declared twice")));
            }
        }
        for (c, b) in coords.iter().zip(&bounds) {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi) {
                return Err(Error::InvalidChart(format!(
                    "interval for `{c}` is empty or unbounded: ({}, {})",
                    b.lo, b.hi
                )));
            }
        }
        Ok(Self { coords, bounds })
    }

    /// Convenience constructor from `(name, lo, hi)` triples.
    pub fn from_triples(spec: &[(&str, f64, f64)]) -> Result<Self> {
        Self::new(
            spec.iter().map(|(n, _, _)| n.to_string()).collect(),
            spec.iter().map(|&(_, lo, hi)| Interval { lo, hi }).collect(),
        )
    }

    /// Cartesian product; coordinates of `a` come first.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        Self::new(
            a.coords.iter().chain(&b.coords).cloned().collect(),
            a.bounds.iter().chain(&b.bounds).copied().collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.bounds).all(|(v, b)| b.lo < *v && *v < b.hi)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "point".into(),
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `count` uniform points in the box, reproducible from `seed`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|b| {
                let x = rng.random_range(b.lo..b.hi);
                if x == b.lo {
                    0.5 * (b.lo + b.hi)
                } else {
                    x
                }
            })
            .collect()
    }

    /// Cell-centred grid with `per_axis` points along each coordinate.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(1);
        let n = self.dim();
        let total = per_axis.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|k| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        let b = self.bounds[k];
                        b.lo + (i as f64 + 0.5) * (b.hi - b.lo) / per_axis as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// A grid of at most a few thousand points.
    pub fn probe_grid(&self) -> Vec<Vec<f64>> {
        let per_axis = match self.dim() {
            1 => 64,
            2 => 24,
            3 => 10,
            4 => 6,
            5 => 4,
            _ => 3,
        };
        self.grid(per_axis)
    }

    /// Parses an expression over this chart's coordinates.
    pub fn parse(&self, source: &str) -> Result<Expression> {
        Ok(Expression::parse(source, &self.coords)?)
    }

    pub(crate) fn adopt(&self, expr: &Expression) -> Result<Expression> {
        if expr.variables() == self.coords.as_slice() {
            Ok(expr.clone())
        } else {
            Ok(expr.remap(&self.coords)?)
        }
    }
}

/// A point together with a vector in the chart's coordinate basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Vec<f64>, components: Vec<f64>) -> Result<Self> {
        if base.len() != components.len() {
            return Err(Error::DimensionMismatch {
                context: "tangent vector".into(),
                expected: base.len(),
                found: components.len(),
            });
        }
        Ok(Self { base, components })
    }

    pub fn coordinate(base: &[f64], i: usize) -> Self {
        let mut components = vec![0.0; base.len()];
        components[i] = 1.0;
        Self {
            base: base.to_vec(),
            components,
        }
    }
}

/// A scalar function on a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    chart: ChartDomain,
    expr: Expression,
}

impl ScalarField {
    pub fn new(chart: ChartDomain, expr: &Expression) -> Result<Self> {
        let expr = chart.adopt(expr)?;
        Ok(Self { chart, expr })
    }

    pub fn parse(chart: ChartDomain, source: &str) -> Result<Self> {
        let expr = chart.parse(source)?;
        Ok(Self { chart, expr })
    }

    pub fn chart(&self) -> &ChartDomain {
        &self.chart
    }

    pub fn expr(&self) -> &Expression {
        &self.expr
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.expr.eval(x)?)
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet2> {
        Ok(self.expr.eval_jet2(x)?)
    }

    /// Jet of `ln f`.
    pub fn ln_jet(&self, x: &[f64]) -> Result<Jet2> {
        let j = self.jet(x)?;
        j.ln().map_err(|_| {
            Error::Eval(crate::expr::EvalError::Domain {
                function: "ln",
                argument: j.value(),
                subexpr: self.expr.to_string(),
            })
        })
    }
}

/// A vector field given by component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: ChartDomain,
    components: Vec<Expression>,
}

impl VectorField {
    pub fn new(chart: ChartDomain, components: &[Expression]) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                context: "vector field components".into(),
                expected: chart.dim(),
                found: components.len(),
            });
        }
        let components = components
            .iter()
            .map(|c| chart.adopt(c))
            .collect::<Result<_>>()?;
        Ok(Self { chart, components })
    }

    pub fn parse(chart: ChartDomain, sources: &[&str]) -> Result<Self> {
        let exprs = sources.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>>>()?;
        Self::new(chart, &exprs)
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(chart: &ChartDomain, i: usize) -> Self {
        let components = (0..chart.dim())
            .map(|k| Expression::constant(if k == i { 1.0 } else { 0.0 }, chart.coords()))
            .collect();
        Self {
            chart: chart.clone(),
            components,
        }
    }

    pub fn chart(&self) -> &ChartDomain {
        &self.chart
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| Ok(c.eval(x)?)).collect()
    }

    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        self.components.iter().map(|c| Ok(c.eval_jet2(x)?)).collect()
    }

    /// Indices of components that are not the constant zero.
    pub fn support(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.constant_value() != Some(0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

/// `Γ^k_ij` stored as `data[(k * n + i) * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Γ^k_ij u^i v^j` for every `k`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    if u[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        s += self.get(k, i, j) * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.data)
    }
}

/// Everything about a metric at one point.
#[derive(Debug, Clone)]
pub struct MetricAt {
    pub point: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg[l][(i, j)] = ∂_l g_ij`.
    pub dg: Vec<DMatrix<f64>>,
    pub christoffel: Christoffel,
}

impl MetricAt {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        linalg::inner(&self.g, u, v)
    }

    pub fn norm2(&self, u: &[f64]) -> f64 {
        linalg::norm2(&self.g, u)
    }

    /// Raises an index: `g^{ij} w_j`.
    pub fn sharp(&self, covector: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.g_inv, covector)
    }
}

/// A Riemannian metric on a chart: a symmetric matrix of expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    chart: ChartDomain,
    /// Row-major `n × n`; the lower triangle is a copy of the upper.
    components: Vec<Expression>,
    spd_tolerance: f64,
}

impl MetricField {
    /// Builds a metric from a full component matrix. Entries below the
    /// diagonal must match their mirror.
    pub fn new(chart: ChartDomain, rows: &[Vec<Expression>]) -> Result<Self> {
        let n = chart.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "metric components".into(),
                expected: n,
                found: rows.len(),
            });
        }
        let mut adopted = Vec::with_capacity(n * n);
        for row in rows {
            for e in row {
                adopted.push(chart.adopt(e)?);
            }
        }
        for i in 0..n {
            for j in 0..i {
                if adopted[i * n + j] != adopted[j * n + i] {
                    return Err(Error::AsymmetricMetric { i, j });
                }
            }
        }
        Ok(Self {
            chart,
            components: adopted,
            spd_tolerance: DEFAULT_SPD_TOLERANCE,
        })
    }

    pub fn diagonal(chart: ChartDomain, diag: &[Expression]) -> Result<Self> {
        let n = chart.dim();
        if diag.len() != n {
            return Err(Error::DimensionMismatch {
                context: "metric diagonal".into(),
                expected: n,
                found: diag.len(),
            });
        }
        let zero = Expression::constant(0.0, chart.coords());
        let rows: Vec<Vec<Expression>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i].clone() } else { zero.clone() })
                    .collect()
            })
            .collect();
        Self::new(chart, &rows)
    }

    pub fn parse_diagonal(chart: ChartDomain, diag: &[&str]) -> Result<Self> {
        let exprs = diag.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>>>()?;
        Self::diagonal(chart, &exprs)
    }

    pub fn parse_rows(chart: ChartDomain, rows: &[&[&str]]) -> Result<Self> {
        let exprs = rows
            .iter()
            .map(|r| r.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(chart, &exprs)
    }

    pub fn euclidean(chart: ChartDomain) -> Self {
        let one = Expression::constant(1.0, chart.coords());
        let diag = vec![one; chart.dim()];
        Self::diagonal(chart, &diag).expect("identity metric is well formed")
    }

    pub fn with_spd_tolerance(mut self, tol: f64) -> Self {
        self.spd_tolerance = tol;
        self
    }

    pub fn spd_tolerance(&self) -> f64 {
        self.spd_tolerance
    }

    pub fn chart(&self) -> &ChartDomain {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.components[i * self.dim() + j]
    }

    fn check_spd(&self, x: &[f64], g: &DMatrix<f64>) -> Result<()> {
        let pivot = linalg::smallest_pivot(g);
        if !(pivot >= self.spd_tolerance) {
            return Err(Error::NotPositiveDefinite {
                point: x.to_vec(),
                pivot,
            });
        }
        Ok(())
    }

    /// `g_ij(x)`, checked symmetric positive definite.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.chart.check_point(x)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.component(i, j).eval(x)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        self.check_spd(x, &g)?;
        Ok(g)
    }

    /// Jets of the upper triangle, mirrored.
    pub fn component_jets(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        self.chart.check_point(x)?;
        let n = self.dim();
        let mut out = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let jet = self.component(i, j).eval_jet2(x)?;
                out[j * n + i] = Some(jet.clone());
                out[i * n + j] = Some(jet);
            }
        }
        Ok(out.into_iter().map(|j| j.expect("filled")).collect())
    }

    /// Metric, inverse, first derivatives and Christoffel symbols at `x`.
    pub fn at(&self, x: &[f64]) -> Result<MetricAt> {
        let n = self.dim();
        let jets = self.component_jets(x)?;
        let g = DMatrix::from_fn(n, n, |i, j| jets[i * n + j].value());
        self.check_spd(x, &g)?;
        let g_inv = g
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::NotPositiveDefinite {
                point: x.to_vec(),
                pivot: linalg::smallest_pivot(&g),
            })?;
        let g_inv = DMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                g_inv[(i, j)]
            } else {
                g_inv[(j, i)]
            }
        });
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|l| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].grad()[l]))
            .collect();
        // first-kind symbols Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij), i ≤ j
        let mut gamma = Christoffel::zeros(n);
        for i in 0..n {
            for j in i..n {
                let first: Vec<f64> = (0..n)
                    .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                    .collect();
                for k in 0..n {
                    let v: f64 = (0..n).map(|l| g_inv[(k, l)] * first[l]).sum();
                    gamma.data[(k * n + i) * n + j] = v;
                    gamma.data[(k * n + j) * n + i] = v;
                }
            }
        }
        Ok(MetricAt {
            point: x.to_vec(),
            g,
            g_inv,
            dg,
            christoffel: gamma,
        })
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        Ok(self.at(x)?.christoffel)
    }
}

/// `Γ^k_ij(x)` of the Levi-Civita connection.
pub fn christoffel(g: &MetricField, x: &[f64]) -> Result<Christoffel> {
    g.christoffel(x)
}

pub fn metric_at(g: &MetricField, x: &[f64]) -> Result<DMatrix<f64>> {
    g.metric_at(x)
}

/// Riemannian gradient `g^{ij} ∂_j f`.
pub fn gradient(f: &ScalarField, g: &MetricField, x: &[f64]) -> Result<TangentVector> {
    let m = g.at(x)?;
    let df = f.jet(x)?;
    Ok(TangentVector {
        base: x.to_vec(),
        components: m.sharp(df.grad()),
    })
}

/// `(∇_X Y)^k = X^i ∂_i Y^k + Γ^k_ij X^i Y^j`.
pub fn covariant_derivative(
    g: &MetricField,
    x_field: &VectorField,
    y_field: &VectorField,
    x: &[f64],
) -> Result<TangentVector> {
    let m = g.at(x)?;
    covariant_derivative_at(&m, x_field, y_field)
}

pub(crate) fn covariant_derivative_at(
    m: &MetricAt,
    x_field: &VectorField,
    y_field: &VectorField,
) -> Result<TangentVector> {
    let x = &m.point;
    let xv = x_field.at(x)?;
    let yj = y_field.jets(x)?;
    let yv: Vec<f64> = yj.iter().map(Jet2::value).collect();
    let mut out = m.christoffel.contract(&xv, &yv);
    for (k, o) in out.iter_mut().enumerate() {
        *o += yj[k].directional(&xv);
    }
    Ok(TangentVector {
        base: x.clone(),
        components: out,
    })
}

/// Gram–Schmidt on the coordinate basis, in coordinate order.
pub fn orthonormal_frame(g: &MetricField, x: &[f64]) -> Result<Vec<TangentVector>> {
    let m = g.metric_at(x)?;
    Ok(orthonormal_frame_from(&m)
        .into_iter()
        .map(|components| TangentVector {
            base: x.to_vec(),
            components,
        })
        .collect())
}

pub(crate) fn orthonormal_frame_from(g: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = g.nrows();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        // two passes keep the Gram matrix at rounding level
        for _ in 0..2 {
            for e in &frame {
                let c = linalg::inner(g, e, &v);
                linalg::axpy(-c, e, &mut v);
            }
        }
        let norm = linalg::norm2(g, &v).sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        frame.push(v);
    }
    frame
}

/// `X g(Y,Z) − g(∇_X Y, Z) − g(Y, ∇_X Z)`.
pub fn metric_compatibility_residual(
    g: &MetricField,
    x_field: &VectorField,
    y_field: &VectorField,
    z_field: &VectorField,
    x: &[f64],
) -> Result<f64> {
    let m = g.at(x)?;
    let n = g.dim();
    let gj = g.component_jets(x)?;
    let yj = y_field.jets(x)?;
    let zj = z_field.jets(x)?;
    let mut gyz = Jet2::constant(0.0, n);
    for i in 0..n {
        for j in 0..n {
            gyz = &gyz + &(&(&yj[i] * &gj[i * n + j]) * &zj[j]);
        }
    }
    let xv = x_field.at(x)?;
    let lhs = gyz.directional(&xv);
    let dy = covariant_derivative_at(&m, x_field, y_field)?;
    let dz = covariant_derivative_at(&m, x_field, z_field)?;
    let yv: Vec<f64> = yj.iter().map(Jet2::value).collect();
    let zv: Vec<f64> = zj.iter().map(Jet2::value).collect();
    Ok(lhs - m.inner(&dy.components, &zv) - m.inner(&yv, &dz.components))
}

/// `∇_X Y − ∇_Y X − [X, Y]`.
pub fn torsion(
    g: &MetricField,
    x_field: &VectorField,
    y_field: &VectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    let m = g.at(x)?;
    let a = covariant_derivative_at(&m, x_field, y_field)?;
    let b = covariant_derivative_at(&m, y_field, x_field)?;
    let xj = x_field.jets(x)?;
    let yj = y_field.jets(x)?;
    let xv: Vec<f64> = xj.iter().map(Jet2::value).collect();
    let yv: Vec<f64> = yj.iter().map(Jet2::value).collect();
    Ok((0..g.dim())
        .map(|k| {
            let bracket = yj[k].directional(&xv) - xj[k].directional(&yv);
            a.components[k] - b.components[k] - bracket
        })
        .collect())
}
