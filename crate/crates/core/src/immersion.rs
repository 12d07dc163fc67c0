//! Extrinsic geometry of an isometric immersion `φ: (N, g_N) → (M, g_M)`.
//!
//! Everything is computed pointwise in coordinates. The second fundamental
//! form on coordinate fields is
//!
//! ```text
//! h(∂_i, ∂_j) = P_N( ∂_i∂_j φ + Γ̄(∂_i φ, ∂_j φ) )
//! ```
//!
//! where `Γ̄` are the target Christoffel symbols at `φ(x)` and `P_N` is the
//! `g_M`-orthogonal projector onto the normal space. `P_T = J (JᵀG J)⁻¹ JᵀG`
//! comes from a weighted least-squares solve, so no normal frame is ever
//! chosen.

use nalgebra::DMatrix;

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{
    covariant_derivative_at, orthonormal_frame_from, ChartDomain, MetricAt, MetricField,
    ScalarField, TangentVector, VectorField,
};
use crate::linalg;

/// Smallest Jacobian singular value accepted as an immersion.
pub const RANK_TOLERANCE: f64 = 1e-8;
/// Isometry acceptance threshold.
pub const ISOMETRY_TOLERANCE: f64 = 1e-8;
/// Gauss-formula cross-check threshold.
pub const GAUSS_TOLERANCE: f64 = 1e-8;

/// A smooth map between charts, one expression per target coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    source: ChartDomain,
    target: ChartDomain,
    components: Vec<Expression>,
}

impl SmoothMap {
    pub fn new(source: ChartDomain, target: ChartDomain, components: &[Expression]) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                context: "map components".into(),
                expected: target.dim(),
                found: components.len(),
            });
        }
        if target.dim() < source.dim() {
            return Err(Error::DimensionMismatch {
                context: "immersion target dimension (at least the source dimension)".into(),
                expected: source.dim(),
                found: target.dim(),
            });
        }
        let components = components
            .iter()
            .map(|c| source.adopt(c))
            .collect::<Result<_>>()?;
        Ok(Self {
            source,
            target,
            components,
        })
    }

    pub fn parse(source: ChartDomain, target: ChartDomain, components: &[&str]) -> Result<Self> {
        let exprs = components
            .iter()
            .map(|c| source.parse(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, &exprs)
    }

    /// The map sending coordinate `i` of `source` to coordinate `i` of `target`.
    pub fn identity(source: ChartDomain, target: ChartDomain) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                context: "identity map".into(),
                expected: source.dim(),
                found: target.dim(),
            });
        }
        let comps = source
            .coords()
            .iter()
            .map(|c| source.parse(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, &comps)
    }

    /// `φ₁ × φ₂` on the product charts.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        let source = ChartDomain::product(&a.source, &b.source)?;
        let target = ChartDomain::product(&a.target, &b.target)?;
        let comps = a
            .components
            .iter()
            .chain(&b.components)
            .map(|c| c.remap(source.coords()).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, &comps)
    }

    pub fn source(&self) -> &ChartDomain {
        &self.source
    }

    pub fn target(&self) -> &ChartDomain {
        &self.target
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.source.check_point(x)?;
        self.components.iter().map(|c| Ok(c.eval(x)?)).collect()
    }

    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        self.source.check_point(x)?;
        self.components.iter().map(|c| Ok(c.eval_jet2(x)?)).collect()
    }

    /// `m × n` Jacobian.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let jets = self.jets(x)?;
        Ok(jacobian_of(&jets, self.source.dim()))
    }

    /// Pulls a target scalar back along the map, keeping derivatives.
    pub fn pull_back_jet(&self, f: &Expression, x: &[f64]) -> Result<Jet2> {
        let f = self.target.adopt(f)?;
        Ok(f.eval_on_jets(&self.jets(x)?)?)
    }
}

fn jacobian_of(jets: &[Jet2], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(jets.len(), n, |a, i| jets[a].grad()[i])
}

/// A vector in the target tangent space at `φ(x)`, normal to the image.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalVector {
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

/// Source metric, target metric, map and the factor split of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSetup {
    source: MetricField,
    target: MetricField,
    map: SmoothMap,
    split: (usize, usize),
    target_split: Option<(usize, usize)>,
}

impl ImmersionSetup {
    pub fn new(
        source: MetricField,
        target: MetricField,
        map: SmoothMap,
        split: (usize, usize),
    ) -> Result<Self> {
        if map.source.dim() != source.dim() {
            return Err(Error::DimensionMismatch {
                context: "map source vs source metric".into(),
                expected: source.dim(),
                found: map.source.dim(),
            });
        }
        if map.target.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                context: "map target vs target metric".into(),
                expected: target.dim(),
                found: map.target.dim(),
            });
        }
        if split.0 + split.1 != source.dim() {
            return Err(Error::DimensionMismatch {
                context: "source split".into(),
                expected: source.dim(),
                found: split.0 + split.1,
            });
        }
        Ok(Self {
            source,
            target,
            map,
            split,
            target_split: None,
        })
    }

    pub fn with_target_split(mut self, m1: usize, m2: usize) -> Result<Self> {
        if m1 + m2 != self.target.dim() {
            return Err(Error::DimensionMismatch {
                context: "target split".into(),
                expected: self.target.dim(),
                found: m1 + m2,
            });
        }
        self.target_split = Some((m1, m2));
        Ok(self)
    }

    pub fn source(&self) -> &MetricField {
        &self.source
    }

    pub fn target(&self) -> &MetricField {
        &self.target
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn split(&self) -> (usize, usize) {
        self.split
    }

    pub fn target_split(&self) -> Option<(usize, usize)> {
        self.target_split
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn codim(&self) -> usize {
        self.target.dim() - self.source.dim()
    }

    pub fn sample_points(&self, samples: usize, seed: u64) -> Vec<Vec<f64>> {
        self.source.chart().sample_points(samples, seed)
    }

    /// All pointwise data at `x`.
    pub fn at(&self, x: &[f64]) -> Result<ImmersionPoint> {
        ImmersionPoint::new(self, x)
    }
}

/// Cached immersion data at one source point.
#[derive(Debug, Clone)]
pub struct ImmersionPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `m × n`.
    pub jacobian: DMatrix<f64>,
    /// `∂_i∂_j φ^a`, indexed `[a][(i, j)]`.
    pub map_hessians: Vec<DMatrix<f64>>,
    pub source: MetricAt,
    pub target: MetricAt,
    pub proj_tangent: DMatrix<f64>,
    pub proj_normal: DMatrix<f64>,
    /// Source orthonormal frame (Gram–Schmidt in coordinate order).
    pub frame: Vec<Vec<f64>>,
    /// Ambient derivative `∂_i∂_j φ + Γ̄(∂_i φ, ∂_j φ)` per coordinate pair,
    /// indexed `i * n + j`.
    ambient: Vec<Vec<f64>>,
    /// Normal part of `ambient`.
    h: Vec<Vec<f64>>,
    split: (usize, usize),
}

impl ImmersionPoint {
    fn new(setup: &ImmersionSetup, x: &[f64]) -> Result<Self> {
        let n = setup.dim();
        let m = setup.target.dim();
        let jets = setup.map.jets(x)?;
        let jacobian = jacobian_of(&jets, n);
        let y: Vec<f64> = jets.iter().map(Jet2::value).collect();
        let smallest = jacobian
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if !(smallest >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient {
                point: x.to_vec(),
                singular: smallest,
            });
        }
        let map_hessians = jets
            .iter()
            .map(|j| DMatrix::from_row_slice(n, n, j.hess()))
            .collect();
        let source = setup.source.at(x)?;
        let target = setup.target.at(&y)?;
        let g = &target.g;
        // P_T = J (Jᵀ G J)⁻¹ Jᵀ G
        let jtg = jacobian.transpose() * g;
        let gram = &jtg * &jacobian;
        let solved = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::RankDeficient {
                point: x.to_vec(),
                singular: smallest,
            })?
            .solve(&jtg);
        let proj_tangent = &jacobian * solved;
        let proj_normal = DMatrix::identity(m, m) - &proj_tangent;
        let frame = orthonormal_frame_from(&source.g);
        let mut p = Self {
            x: x.to_vec(),
            y,
            jacobian,
            map_hessians,
            source,
            target,
            proj_tangent,
            proj_normal,
            frame,
            ambient: Vec::new(),
            h: Vec::new(),
            split: setup.split,
        };
        let mut ambient = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                ambient.push(p.ambient_coordinate(i, j));
            }
        }
        p.h = ambient.iter().map(|a| p.normal_part(a)).collect();
        p.ambient = ambient;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn m(&self) -> usize {
        self.jacobian.nrows()
    }

    fn column(&self, i: usize) -> Vec<f64> {
        self.jacobian.column(i).iter().copied().collect()
    }

    fn ambient_coordinate(&self, i: usize, j: usize) -> Vec<f64> {
        let (ci, cj) = (self.column(i), self.column(j));
        let mut out = self.target.christoffel.contract(&ci, &cj);
        for (a, o) in out.iter_mut().enumerate() {
            *o += self.map_hessians[a][(i, j)];
        }
        out
    }

    pub fn pushforward(&self, v: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.jacobian, v)
    }

    pub fn normal_part(&self, w: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.proj_normal, w)
    }

    pub fn tangent_part(&self, w: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.proj_tangent, w)
    }

    /// `g_M` at `φ(x)`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.target.inner(a, b)
    }

    pub fn norm2(&self, a: &[f64]) -> f64 {
        self.target.norm2(a)
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.norm2(a).max(0.0).sqrt()
    }

    /// `h(∂_i, ∂_j)`.
    pub fn h_coordinate(&self, i: usize, j: usize) -> &[f64] {
        &self.h[i * self.n() + j]
    }

    /// `h(u, v)` for source vectors `u`, `v`.
    pub fn h(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; self.m()];
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                linalg::axpy(u[i] * v[j], &self.h[i * n + j], &mut out);
            }
        }
        out
    }

    /// `h(e_a, e_b)` on the orthonormal frame.
    pub fn h_frame(&self, a: usize, b: usize) -> Vec<f64> {
        self.h(&self.frame[a], &self.frame[b])
    }

    /// Tangential part of the ambient derivative minus `φ_*(∇_{∂i}∂_j)`,
    /// maximised over coordinate pairs.
    pub fn gauss_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let tangential = self.tangent_part(&self.ambient[i * n + j]);
                let gamma: Vec<f64> = (0..n).map(|k| self.source.christoffel.get(k, i, j)).collect();
                let intrinsic = self.pushforward(&gamma);
                worst = worst.max(linalg::max_abs(&linalg::sub(&tangential, &intrinsic)));
            }
        }
        worst
    }

    /// Sum of `h(e_a, e_a)` over frame indices `range`.
    pub fn trace_over(&self, range: std::ops::Range<usize>) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for a in range {
            linalg::axpy(1.0, &self.h_frame(a, a), &mut out);
        }
        out
    }

    /// `Σ_ab ‖h(e_a, e_b)‖²` over frame indices in `rows × cols`.
    pub fn squared_norm_over(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
        let mut s = 0.0;
        for a in rows {
            for b in cols.clone() {
                s += self.norm2(&self.h_frame(a, b));
            }
        }
        s
    }

    pub fn squared_norm(&self) -> f64 {
        self.squared_norm_over(0..self.n(), 0..self.n())
    }

    pub fn mean_curvature(&self) -> Vec<f64> {
        let n = self.n();
        let mut t = self.trace_over(0..n);
        t.iter_mut().for_each(|v| *v /= n as f64);
        t
    }

    pub fn split(&self) -> (usize, usize) {
        self.split
    }

    /// Riemannian gradient of a target function at `φ(x)`.
    pub fn target_gradient(&self, f: &ScalarField) -> Result<Vec<f64>> {
        let j = f.jet(&self.y)?;
        Ok(self.target.sharp(j.grad()))
    }
}

/// `φ_* v`.
pub fn pushforward(setup: &ImmersionSetup, v: &TangentVector) -> Result<TangentVector> {
    let y = setup.map.value(&v.base)?;
    let j = setup.map.jacobian(&v.base)?;
    Ok(TangentVector {
        base: y,
        components: linalg::mat_vec(&j, &v.components),
    })
}

/// `|Jᵀ G_M J − G_N|` at one point, entrywise maximum.
pub fn isometry_residual_at(setup: &ImmersionSetup, x: &[f64]) -> Result<f64> {
    let j = setup.map.jacobian(x)?;
    let y = setup.map.value(x)?;
    let gm = setup.target.metric_at(&y)?;
    let gn = setup.source.metric_at(x)?;
    let pull = j.transpose() * gm * j;
    Ok((pull - gn).amax())
}

/// Largest isometry defect over seeded samples.
pub fn isometry_residual(setup: &ImmersionSetup, samples: usize, seed: u64) -> Result<f64> {
    setup
        .sample_points(samples, seed)
        .iter()
        .try_fold(0.0_f64, |w, x| Ok(w.max(isometry_residual_at(setup, x)?)))
}

/// `(P_T, P_N)` at `φ(x)`.
pub fn tangent_normal_projectors(
    setup: &ImmersionSetup,
    x: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let p = setup.at(x)?;
    Ok((p.proj_tangent, p.proj_normal))
}

/// Both sides of the Gauss formula for fields `X`, `Y`: the normal part of
/// the ambient derivative and `∇̄_{φ*X} φ*Y − φ*(∇_X Y)`.
pub fn second_fundamental_form_pair(
    setup: &ImmersionSetup,
    x_field: &VectorField,
    y_field: &VectorField,
    x: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = setup.at(x)?;
    let n = p.n();
    let xv = x_field.at(x)?;
    let yj = y_field.jets(x)?;
    let yv: Vec<f64> = yj.iter().map(Jet2::value).collect();
    // ∂_X (J Y) = X^i (∂_i∂_j φ) Y^j + J (X^i ∂_i Y)
    let dy: Vec<f64> = yj.iter().map(|c| c.directional(&xv)).collect();
    let mut ambient = p.pushforward(&dy);
    for (a, amb) in ambient.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                *amb += xv[i] * p.map_hessians[a][(i, j)] * yv[j];
            }
        }
    }
    let (jx, jy) = (p.pushforward(&xv), p.pushforward(&yv));
    linalg::axpy(1.0, &p.target.christoffel.contract(&jx, &jy), &mut ambient);
    let projected = p.normal_part(&ambient);
    let nabla = covariant_derivative_at(&p.source, x_field, y_field)?;
    let gauss = linalg::sub(&ambient, &p.pushforward(&nabla.components));
    Ok((projected, gauss))
}

/// `h(X, Y)` at `x`, cross-checked against the Gauss formula.
pub fn second_fundamental_form(
    setup: &ImmersionSetup,
    x_field: &VectorField,
    y_field: &VectorField,
    x: &[f64],
) -> Result<NormalVector> {
    let (h, gauss) = second_fundamental_form_pair(setup, x_field, y_field, x)?;
    let scale = 1.0_f64.max(linalg::max_abs(&h));
    let r = linalg::max_abs(&linalg::sub(&h, &gauss));
    if r > GAUSS_TOLERANCE * scale {
        return Err(Error::Precondition(format!(
            "Gauss formula cross-check off by {r:e}; is the map isometric?"
        )));
    }
    Ok(NormalVector {
        base: setup.map.value(x)?,
        components: h,
    })
}

/// `A_η X`, defined by `g_N(A_η X, Y) = g_M(h(X, Y), η)`.
pub fn shape_operator(
    setup: &ImmersionSetup,
    eta: &NormalVector,
    v: &TangentVector,
    x: &[f64],
) -> Result<TangentVector> {
    let p = setup.at(x)?;
    let mut out = vec![0.0; p.n()];
    for e in &p.frame {
        let c = p.inner(&p.h(&v.components, e), &eta.components);
        linalg::axpy(c, e, &mut out);
    }
    Ok(TangentVector {
        base: x.to_vec(),
        components: out,
    })
}

/// `H` and `‖H‖²`.
pub fn mean_curvature(setup: &ImmersionSetup, x: &[f64]) -> Result<(NormalVector, f64)> {
    let p = setup.at(x)?;
    let h = p.mean_curvature();
    let n2 = p.norm2(&h);
    Ok((
        NormalVector {
            base: p.y.clone(),
            components: h,
        },
        n2,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialTraces {
    pub trace1: Vec<f64>,
    pub trace2: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

impl ImmersionPoint {
    pub fn partial_traces(&self) -> Result<PartialTraces> {
        let (n1, n2) = self.split;
        if n1 == 0 || n2 == 0 {
            return Err(Error::DegenerateSplit { n1, n2 });
        }
        let trace1 = self.trace_over(0..n1);
        let trace2 = self.trace_over(n1..n1 + n2);
        let h1 = trace1.iter().map(|v| v / n1 as f64).collect();
        let h2 = trace2.iter().map(|v| v / n2 as f64).collect();
        Ok(PartialTraces {
            trace1,
            trace2,
            h1,
            h2,
        })
    }
}

/// Traces of `h` over the two blocks of the adapted frame, and `H₁`, `H₂`.
pub fn partial_traces(setup: &ImmersionSetup, x: &[f64]) -> Result<PartialTraces> {
    setup.at(x)?.partial_traces()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalGradient {
    /// `P_N grad f`.
    pub df: Vec<f64>,
    /// `P_N` of the gradient restricted to the first target block.
    pub d1f: Vec<f64>,
    pub d2f: Vec<f64>,
    /// `‖Df − D₁f − D₂f‖` in `g_M`.
    pub residual: f64,
}

impl ImmersionPoint {
    pub fn normal_gradient_split(&self, f: &ScalarField, m1: usize) -> Result<NormalGradient> {
        let grad = self.target_gradient(f)?;
        let mut g1 = grad.clone();
        let mut g2 = grad.clone();
        g1[m1..].iter_mut().for_each(|v| *v = 0.0);
        g2[..m1].iter_mut().for_each(|v| *v = 0.0);
        let df = self.normal_part(&grad);
        let d1f = self.normal_part(&g1);
        let d2f = self.normal_part(&g2);
        let mut r = df.clone();
        linalg::axpy(-1.0, &d1f, &mut r);
        linalg::axpy(-1.0, &d2f, &mut r);
        let residual = self.norm(&r);
        Ok(NormalGradient {
            df,
            d1f,
            d2f,
            residual,
        })
    }
}

/// Normal component of `grad f` and its split along the target factors.
pub fn normal_gradient_split(
    setup: &ImmersionSetup,
    f: &ScalarField,
    x: &[f64],
) -> Result<NormalGradient> {
    let (m1, _) = setup.target_split.ok_or(Error::MissingTargetSplit)?;
    setup.at(x)?.normal_gradient_split(f, m1)
}

impl ImmersionPoint {
    /// `max ‖h(∂_i, ∂_α)‖` over mixed coordinate pairs.
    pub fn mixed_residual(&self) -> f64 {
        let (n1, n2) = self.split;
        let mut worst = 0.0_f64;
        for i in 0..n1 {
            for a in n1..n1 + n2 {
                worst = worst.max(self.norm(self.h_coordinate(i, a)));
            }
        }
        worst
    }
}

/// Largest mixed second fundamental form over seeded samples.
pub fn mixed_totally_geodesic_residual(
    setup: &ImmersionSetup,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let (n1, n2) = setup.split;
    if n1 == 0 || n2 == 0 {
        return Err(Error::DegenerateSplit { n1, n2 });
    }
    setup
        .sample_points(samples, seed)
        .iter()
        .try_fold(0.0_f64, |w, x| Ok(w.max(setup.at(x)?.mixed_residual())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Umbilicity {
    /// `max ‖h(e_i, e_j) − λ δ_ij H‖`.
    pub residual: f64,
    /// Least-squares `λ`; `None` when `H = 0` but `h ≠ 0`.
    pub lambda: Option<f64>,
}

/// Threshold below which `H` and `h` are treated as zero.
const UMBILIC_ZERO: f64 = 1e-12;

impl ImmersionPoint {
    pub fn umbilicity(&self) -> Umbilicity {
        let n = self.n();
        let hm = self.mean_curvature();
        let h_norm2 = self.norm2(&hm);
        let pairs: Vec<(usize, usize, Vec<f64>)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.h_frame(i, j)))
            .collect();
        let worst_h = pairs.iter().map(|(_, _, h)| self.norm(h)).fold(0.0, f64::max);
        if h_norm2.sqrt() <= UMBILIC_ZERO {
            return Umbilicity {
                residual: worst_h,
                lambda: (worst_h <= UMBILIC_ZERO).then_some(0.0),
            };
        }
        let num: f64 = (0..n).map(|i| self.inner(&pairs[i * n + i].2, &hm)).sum();
        let lambda = num / (n as f64 * h_norm2);
        let residual = pairs
            .iter()
            .map(|(i, j, h)| {
                let mut r = h.clone();
                if i == j {
                    linalg::axpy(-lambda, &hm, &mut r);
                }
                self.norm(&r)
            })
            .fold(0.0, f64::max);
        Umbilicity {
            residual,
            lambda: Some(lambda),
        }
    }
}

/// Distance from being totally umbilical at `x`.
pub fn umbilicity_residual(setup: &ImmersionSetup, x: &[f64]) -> Result<Umbilicity> {
    Ok(setup.at(x)?.umbilicity())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(spec: &[(&str, f64, f64)]) -> ChartDomain {
        ChartDomain::from_triples(spec).unwrap()
    }

    fn circle() -> ImmersionSetup {
        let s = chart(&[("t", -3.0, 3.0)]);
        let t = chart(&[("a", -2.0, 2.0), ("b", -2.0, 2.0)]);
        let map = SmoothMap::parse(s.clone(), t.clone(), &["cos(t)", "sin(t)"]).unwrap();
        ImmersionSetup::new(MetricField::euclidean(s), MetricField::euclidean(t), map, (1, 0)).unwrap()
    }

    fn torus() -> ImmersionSetup {
        let s = chart(&[("s", -3.0, 3.0), ("t", -3.0, 3.0)]);
        let t = chart(&[("a", -2.0, 2.0), ("b", -2.0, 2.0), ("c", -2.0, 2.0), ("d", -2.0, 2.0)]);
        let map =
            SmoothMap::parse(s.clone(), t.clone(), &["cos(s)", "sin(s)", "cos(t)", "sin(t)"]).unwrap();
        ImmersionSetup::new(MetricField::euclidean(s), MetricField::euclidean(t), map, (1, 1))
            .unwrap()
            .with_target_split(2, 2)
            .unwrap()
    }

    #[test]
    fn circle_basics() {
        let c = circle();
        let v = pushforward(&c, &TangentVector::coordinate(&[0.0], 0)).unwrap();
        assert_eq!(v.components, vec![0.0, 1.0]);
        assert!(isometry_residual(&c, 50, 1).unwrap() <= 1e-12);
        let (pt, pn) = tangent_normal_projectors(&c, &[0.0]).unwrap();
        assert!((pn[(0, 0)] - 1.0).abs() < 1e-15 && pn[(1, 1)].abs() < 1e-15);
        assert!((&pt * &pt - &pt).amax() < 1e-10);
        let dt = VectorField::coordinate(c.source().chart(), 0);
        let t = 0.7_f64;
        let h = second_fundamental_form(&c, &dt, &dt, &[t]).unwrap();
        assert!((h.components[0] + t.cos()).abs() < 1e-14);
        assert!((h.components[1] + t.sin()).abs() < 1e-14);
        let a = shape_operator(&c, &h, &TangentVector::coordinate(&[t], 0), &[t]).unwrap();
        assert!((a.components[0] - 1.0).abs() < 1e-14);
        let (_, hn2) = mean_curvature(&c, &[t]).unwrap();
        assert!((hn2 - 1.0).abs() < 1e-14);
        assert!(umbilicity_residual(&c, &[t]).unwrap().residual < 1e-14);
        assert!(matches!(partial_traces(&c, &[t]), Err(Error::DegenerateSplit { n1: 1, n2: 0 })));
    }

    #[test]
    fn torus_curvatures() {
        let tor = torus();
        let (s, t) = (0.4_f64, -1.1_f64);
        let p = tor.at(&[s, t]).unwrap();
        assert!((p.norm2(&p.mean_curvature()) - 0.5).abs() < 1e-14);
        let tr = p.partial_traces().unwrap();
        let want1 = [-s.cos(), -s.sin(), 0.0, 0.0];
        let want2 = [0.0, 0.0, -t.cos(), -t.sin()];
        for k in 0..4 {
            assert!((tr.trace1[k] - want1[k]).abs() < 1e-14);
            assert!((tr.trace2[k] - want2[k]).abs() < 1e-14);
        }
        assert!(p.mixed_residual() <= 1e-14);
        assert!(p.umbilicity().residual > 0.1);
        let f = ScalarField::parse(tor.target().chart().clone(), "a*c + exp(b)").unwrap();
        assert!(normal_gradient_split(&tor, &f, &[s, t]).unwrap().residual <= 1e-14);
    }

    #[test]
    fn nonproduct_map_is_not_mixed_geodesic() {
        let s = chart(&[("s", -1.0, 1.0), ("t", -1.0, 1.0)]);
        let t = chart(&[("a", -2.0, 2.0), ("b", -2.0, 2.0), ("c", -2.0, 2.0)]);
        let g = MetricField::parse_rows(s.clone(), &[&["1 + t^2", "s*t"], &["s*t", "1 + s^2"]]).unwrap();
        let map = SmoothMap::parse(s, t.clone(), &["s", "t", "s*t"]).unwrap();
        let setup = ImmersionSetup::new(g, MetricField::euclidean(t), map, (1, 1)).unwrap();
        assert!(isometry_residual(&setup, 20, 3).unwrap() < 1e-14);
        let p = setup.at(&[0.3, -0.5]).unwrap();
        let want = 1.0 / (1.0_f64 + 0.09 + 0.25).sqrt();
        assert!((p.mixed_residual() - want).abs() < 1e-13);
    }

    #[test]
    fn identity_is_totally_geodesic() {
        let c = chart(&[("x", 0.5, 2.0), ("y", -1.0, 1.0)]);
        let g = MetricField::parse_diagonal(c.clone(), &["1/x^2", "exp(y)"]).unwrap();
        let map = SmoothMap::identity(c.clone(), c.clone()).unwrap();
        let setup = ImmersionSetup::new(g.clone(), g, map, (1, 1)).unwrap();
        let p = setup.at(&[1.2, 0.3]).unwrap();
        assert!(p.proj_normal.amax() < 1e-14);
        assert!(p.squared_norm() < 1e-24);
        assert!(p.gauss_residual() < 1e-13);
        assert_eq!(p.umbilicity().lambda, Some(0.0));
    }

    #[test]
    fn rank_deficiency_detected() {
        let s = chart(&[("t", -1.0, 1.0)]);
        let t = chart(&[("a", -2.0, 2.0), ("b", -2.0, 2.0)]);
        let map = SmoothMap::parse(s.clone(), t.clone(), &["t^3", "t^2"]).unwrap();
        let setup =
            ImmersionSetup::new(MetricField::euclidean(s), MetricField::euclidean(t), map, (1, 0)).unwrap();
        assert!(matches!(setup.at(&[0.0]), Err(Error::RankDeficient { .. })));
    }
}
