//! Doubly twisted products `N₁ ×_(σ₁,σ₂) N₂`.
//!
//! The product chart carries the metric `g = σ₂² g₁ ⊕ σ₁² g₂`, where the
//! twisting functions `σ₁, σ₂ > 0` may depend on all coordinates. Direct,
//! warped, twisted and doubly warped products are the usual special cases.
//! Vectors tangent to the first factor (zero in the second block) span the
//! distribution `D₁`, and likewise `D₂`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expression, Node};
use crate::geometry::{
    covariant_derivative_at, ChartDomain, MetricAt, MetricField, ScalarField, TangentVector,
    VectorField,
};
use crate::linalg;
use crate::report::{ReportBuilder, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    /// Both twisting functions constant.
    Direct,
    /// `σ₂ ≡ 1`, `σ₁` a function on the first factor.
    Warped,
    /// `σ₂ ≡ 1`.
    Twisted,
    /// `σ₁` on the first factor, `σ₂` on the second.
    DoublyWarped,
    DoublyTwisted,
}

impl ProductKind {
    pub const ALL: [ProductKind; 5] = [
        ProductKind::Direct,
        ProductKind::Warped,
        ProductKind::Twisted,
        ProductKind::DoublyWarped,
        ProductKind::DoublyTwisted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProductKind::Direct => "direct",
            ProductKind::Warped => "warped",
            ProductKind::Twisted => "twisted",
            ProductKind::DoublyWarped => "doubly_warped",
            ProductKind::DoublyTwisted => "doubly_twisted",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which factor a vector or field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Form of the same-block correction `c(X,Y)·grad ln σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SameBlockTerm {
    /// `g_N(X,Y)·grad_{g_N} ln σ`.
    ProductMetric,
    /// Factor metric `g_{N_i}(X,Y)` with the gradient taken in the direct
    /// product metric `g₀`.
    FactorMetric,
}

/// Form of the correction for `X ∈ D₁`, `V ∈ D₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedTerm {
    /// `X(ln σ₁)V − V(ln σ₁)X + V(ln σ₂)X − X(ln σ₂)V`.
    FourTerm,
    /// `X(ln σ₁)V + V(ln σ₂)X`.
    TwoTerm,
}

/// A choice of correction terms relating `∇` to the direct-product `∇⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionReading {
    pub same_block: SameBlockTerm,
    pub mixed: MixedTerm,
}

impl ConnectionReading {
    /// Same-block terms in the product metric, four-term mixed formula.
    pub const STATED: Self = Self {
        same_block: SameBlockTerm::ProductMetric,
        mixed: MixedTerm::FourTerm,
    };
    /// Factor metric and `g₀` gradient in the same-block terms.
    pub const FACTOR_METRIC: Self = Self {
        same_block: SameBlockTerm::FactorMetric,
        mixed: MixedTerm::FourTerm,
    };
    /// The reading that agrees with the Levi-Civita connection of any
    /// doubly twisted product.
    pub const LEVI_CIVITA: Self = Self {
        same_block: SameBlockTerm::ProductMetric,
        mixed: MixedTerm::TwoTerm,
    };
}

impl Default for ConnectionReading {
    fn default() -> Self {
        Self::STATED
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublyTwistedProduct {
    g1: MetricField,
    g2: MetricField,
    sigma1: ScalarField,
    sigma2: ScalarField,
    chart: ChartDomain,
    assembled: MetricField,
    direct: MetricField,
}

fn scaled(factor: &Expression, entry: &Expression, coords: &[String]) -> Result<Expression> {
    let entry = entry.remap(coords)?;
    if entry.constant_value() == Some(0.0) {
        return Ok(entry);
    }
    if factor.constant_value() == Some(1.0) {
        return Ok(entry);
    }
    Ok(Expression::from_node(
        Node::Binary(
            BinOp::Mul,
            Box::new(factor.squared().root().clone()),
            Box::new(entry.root().clone()),
        ),
        coords,
    ))
}

/// Builds `σ₂² g₁ ⊕ σ₁² g₂` on the product chart.
pub fn build_doubly_twisted(
    g1: MetricField,
    g2: MetricField,
    sigma1: &Expression,
    sigma2: &Expression,
) -> Result<DoublyTwistedProduct> {
    DoublyTwistedProduct::new(g1, g2, sigma1, sigma2)
}

impl DoublyTwistedProduct {
    pub fn new(
        g1: MetricField,
        g2: MetricField,
        sigma1: &Expression,
        sigma2: &Expression,
    ) -> Result<Self> {
        let chart = ChartDomain::product(g1.chart(), g2.chart())?;
        let sigma1 = ScalarField::new(chart.clone(), sigma1)?;
        let sigma2 = ScalarField::new(chart.clone(), sigma2)?;
        for p in chart.probe_grid() {
            for (name, s) in [("sigma1", &sigma1), ("sigma2", &sigma2)] {
                let v = s.value(&p)?;
                if !(v > 0.0) {
                    return Err(Error::NonPositiveTwist {
                        field: name.into(),
                        point: p,
                        value: v,
                    });
                }
            }
        }
        let (n1, n) = (g1.dim(), chart.dim());
        let coords = chart.coords();
        let zero = Expression::constant(0.0, coords);
        let one = Expression::constant(1.0, coords);
        let mut twisted = vec![vec![zero.clone(); n]; n];
        let mut direct = vec![vec![zero.clone(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let (factor, entry) = match (i < n1, j < n1) {
                    (true, true) => (sigma2.expr(), g1.component(i, j)),
                    (false, false) => (sigma1.expr(), g2.component(i - n1, j - n1)),
                    _ => continue,
                };
                twisted[i][j] = scaled(factor, entry, coords)?;
                direct[i][j] = scaled(&one, entry, coords)?;
            }
        }
        let tol = g1.spd_tolerance().min(g2.spd_tolerance());
        let assembled = MetricField::new(chart.clone(), &twisted)?.with_spd_tolerance(tol);
        let direct = MetricField::new(chart.clone(), &direct)?.with_spd_tolerance(tol);
        Ok(Self {
            g1,
            g2,
            sigma1,
            sigma2,
            chart,
            assembled,
            direct,
        })
    }

    pub fn n1(&self) -> usize {
        self.g1.dim()
    }

    pub fn n2(&self) -> usize {
        self.g2.dim()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn chart(&self) -> &ChartDomain {
        &self.chart
    }

    pub fn g1(&self) -> &MetricField {
        &self.g1
    }

    pub fn g2(&self) -> &MetricField {
        &self.g2
    }

    pub fn sigma1(&self) -> &ScalarField {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &ScalarField {
        &self.sigma2
    }

    /// `σ₂² g₁ ⊕ σ₁² g₂`.
    pub fn assembled(&self) -> &MetricField {
        &self.assembled
    }

    /// `g₁ ⊕ g₂`.
    pub fn direct(&self) -> &MetricField {
        &self.direct
    }

    /// Sets the SPD tolerance of both assembled metrics.
    pub fn with_spd_tolerance(mut self, tol: f64) -> Self {
        self.assembled = self.assembled.with_spd_tolerance(tol);
        self.direct = self.direct.with_spd_tolerance(tol);
        self
    }

    fn factor_of(&self, var: usize) -> Factor {
        if var < self.n1() {
            Factor::First
        } else {
            Factor::Second
        }
    }

    /// First variable of `field` that lies outside `allowed`.
    fn stray_variable(&self, field: &ScalarField, allowed: Factor) -> Option<String> {
        field
            .expr()
            .used_variables()
            .into_iter()
            .find(|&v| self.factor_of(v) != allowed)
            .map(|v| self.chart.coords()[v].clone())
    }

    /// Checks the structural conditions of `kind` by variable occurrence.
    pub fn satisfies(&self, kind: ProductKind) -> Result<()> {
        let fail = |field: &str, reason: String| {
            Err(Error::Specialization {
                kind,
                field: field.into(),
                reason,
            })
        };
        let is_one = |s: &ScalarField| s.expr().constant_value() == Some(1.0);
        let depends_only = |s: &ScalarField, f: Factor| self.stray_variable(s, f);
        match kind {
            ProductKind::DoublyTwisted => Ok(()),
            ProductKind::Direct => {
                for (name, s) in [("sigma1", &self.sigma1), ("sigma2", &self.sigma2)] {
                    if let Some(v) = s.expr().used_variable_names().first() {
                        return fail(name, format!("depends on variable `{v}`"));
                    }
                }
                Ok(())
            }
            ProductKind::Twisted | ProductKind::Warped => {
                if !is_one(&self.sigma2) {
                    return fail("sigma2", format!("must be 1, found `{}`", self.sigma2.expr()));
                }
                if kind == ProductKind::Warped {
                    if let Some(v) = depends_only(&self.sigma1, Factor::First) {
                        return fail(
                            "sigma1",
                            format!("depends on second-factor variable `{v}`"),
                        );
                    }
                }
                Ok(())
            }
            ProductKind::DoublyWarped => {
                if let Some(v) = depends_only(&self.sigma1, Factor::First) {
                    return fail("sigma1", format!("depends on second-factor variable `{v}`"));
                }
                if let Some(v) = depends_only(&self.sigma2, Factor::Second) {
                    return fail("sigma2", format!("depends on first-factor variable `{v}`"));
                }
                Ok(())
            }
        }
    }

    /// The most specific kind this product satisfies.
    pub fn kind(&self) -> ProductKind {
        [
            ProductKind::Direct,
            ProductKind::Warped,
            ProductKind::Twisted,
            ProductKind::DoublyWarped,
        ]
        .into_iter()
        .find(|&k| self.satisfies(k).is_ok())
        .unwrap_or(ProductKind::DoublyTwisted)
    }

    /// Places a factor vector into its block of the product tangent space.
    pub fn lift(&self, v: &TangentVector, which: Factor, base: &[f64]) -> Result<TangentVector> {
        self.chart.check_point(base)?;
        let (offset, dim) = match which {
            Factor::First => (0, self.n1()),
            Factor::Second => (self.n1(), self.n2()),
        };
        if v.components.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "lifted vector".into(),
                expected: dim,
                found: v.components.len(),
            });
        }
        let mut components = vec![0.0; self.dim()];
        components[offset..offset + dim].copy_from_slice(&v.components);
        Ok(TangentVector {
            base: base.to_vec(),
            components,
        })
    }

    /// The block a field lives in, `None` for the zero field.
    pub fn block_of(&self, field: &VectorField) -> Result<Option<Factor>> {
        let support = field.support();
        let Some(&first) = support.first() else {
            return Ok(None);
        };
        let f = self.factor_of(first);
        if support.iter().any(|&i| self.factor_of(i) != f) {
            return Err(Error::MixedBlockField);
        }
        Ok(Some(f))
    }

    /// `∇_A B` as predicted from `∇⁰_A B` and the twisting functions.
    pub fn predicted_connection(
        &self,
        a: &VectorField,
        b: &VectorField,
        x: &[f64],
        reading: ConnectionReading,
    ) -> Result<TangentVector> {
        let ctx = PointData::new(self, x)?;
        let (fa, fb) = (self.block_of(a)?, self.block_of(b)?);
        let nabla0 = covariant_derivative_at(&ctx.direct, a, b)?;
        let av = a.at(x)?;
        let bv = b.at(x)?;
        let mut out = nabla0.components;
        let corr = ctx.correction(fa, &av, fb, &bv, reading);
        linalg::axpy(1.0, &corr, &mut out);
        Ok(TangentVector {
            base: x.to_vec(),
            components: out,
        })
    }
}

/// Metric data of a product at one point.
struct PointData {
    twisted: MetricAt,
    direct: MetricAt,
    ln_sigma1: Jet2,
    ln_sigma2: Jet2,
    n1: usize,
}

impl PointData {
    fn new(p: &DoublyTwistedProduct, x: &[f64]) -> Result<Self> {
        Ok(Self {
            twisted: p.assembled.at(x)?,
            direct: p.direct.at(x)?,
            ln_sigma1: p.sigma1.ln_jet(x)?,
            ln_sigma2: p.sigma2.ln_jet(x)?,
            n1: p.n1(),
        })
    }

    fn same_block(&self, l: &Jet2, a: &[f64], b: &[f64], term: SameBlockTerm) -> Vec<f64> {
        let (c, grad) = match term {
            SameBlockTerm::ProductMetric => (self.twisted.inner(a, b), self.twisted.sharp(l.grad())),
            SameBlockTerm::FactorMetric => (self.direct.inner(a, b), self.direct.sharp(l.grad())),
        };
        let mut out = vec![0.0; a.len()];
        linalg::axpy(l.directional(a), b, &mut out);
        linalg::axpy(l.directional(b), a, &mut out);
        linalg::axpy(-c, &grad, &mut out);
        out
    }

    fn mixed(&self, x: &[f64], v: &[f64], term: MixedTerm) -> Vec<f64> {
        let (l1, l2) = (&self.ln_sigma1, &self.ln_sigma2);
        let mut out = vec![0.0; x.len()];
        linalg::axpy(l1.directional(x), v, &mut out);
        linalg::axpy(l2.directional(v), x, &mut out);
        if term == MixedTerm::FourTerm {
            linalg::axpy(-l1.directional(v), x, &mut out);
            linalg::axpy(-l2.directional(x), v, &mut out);
        }
        out
    }

    fn correction(
        &self,
        fa: Option<Factor>,
        a: &[f64],
        fb: Option<Factor>,
        b: &[f64],
        reading: ConnectionReading,
    ) -> Vec<f64> {
        match (fa, fb) {
            (None, _) | (_, None) => vec![0.0; a.len()],
            (Some(Factor::First), Some(Factor::First)) => {
                self.same_block(&self.ln_sigma2, a, b, reading.same_block)
            }
            (Some(Factor::Second), Some(Factor::Second)) => {
                self.same_block(&self.ln_sigma1, a, b, reading.same_block)
            }
            (Some(Factor::First), Some(Factor::Second)) => self.mixed(a, b, reading.mixed),
            (Some(Factor::Second), Some(Factor::First)) => self.mixed(b, a, reading.mixed),
        }
    }

    fn unit(&self, i: usize) -> (Option<Factor>, Vec<f64>) {
        let n = self.twisted.g.nrows();
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let f = if i < self.n1 { Factor::First } else { Factor::Second };
        (Some(f), e)
    }

    /// Largest componentwise residual between the Levi-Civita `∇_{∂i}∂_j`
    /// and the prediction, per case family.
    fn family_residuals(&self, reading: ConnectionReading) -> [f64; 3] {
        let n = self.twisted.g.nrows();
        let mut worst = [0.0_f64; 3];
        for i in 0..n {
            for j in 0..n {
                let (fa, a) = self.unit(i);
                let (fb, b) = self.unit(j);
                let corr = self.correction(fa, &a, fb, &b, reading);
                let r = (0..n)
                    .map(|k| {
                        let predicted = self.direct.christoffel.get(k, i, j) + corr[k];
                        (self.twisted.christoffel.get(k, i, j) - predicted).abs()
                    })
                    .fold(0.0, f64::max);
                let family = match (i < self.n1, j < self.n1) {
                    (true, true) => 0,
                    (false, false) => 1,
                    _ => 2,
                };
                worst[family] = worst[family].max(r);
            }
        }
        worst
    }
}

pub const FAMILY_NAMES: [&str; 3] = ["d1xd1", "d2xd2", "mixed"];

/// Compares the Christoffel connection of the assembled metric with the
/// predicted connection over coordinate lifts at seeded sample points.
///
/// Gating records use [`ConnectionReading::STATED`]. The factor-metric and
/// Levi-Civita readings are recorded alongside for comparison.
pub fn verify_proposition1(
    p: &DoublyTwistedProduct,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> VerificationReport {
    let mut b = ReportBuilder::new("prop1", tolerance, seed, samples);
    let readings = [
        ("", ConnectionReading::STATED, true),
        (".factor_metric", ConnectionReading::FACTOR_METRIC, false),
        (".levi_civita", ConnectionReading::LEVI_CIVITA, false),
    ];
    let mut worst = [[0.0_f64; 3]; 3];
    for (s, x) in p.chart.sample_points(samples, seed).iter().enumerate() {
        let ctx = match PointData::new(p, x) {
            Ok(c) => c,
            Err(e) => {
                b.error(&e);
                break;
            }
        };
        for (r, (suffix, reading, gating)) in readings.iter().enumerate() {
            let res = ctx.family_residuals(*reading);
            for (f, name) in FAMILY_NAMES.iter().enumerate() {
                let applies = match f {
                    0 => p.n1() > 0,
                    1 => p.n2() > 0,
                    _ => p.n1() > 0 && p.n2() > 0,
                };
                if !applies {
                    continue;
                }
                b.vanishes(&format!("{name}{suffix}"), s, x, res[f], tolerance, *gating);
                worst[r][f] = worst[r][f].max(res[f]);
            }
        }
    }
    for (r, (suffix, _, _)) in readings.iter().enumerate() {
        for (f, name) in FAMILY_NAMES.iter().enumerate() {
            b.summary(&format!("max.{name}{suffix}"), worst[r][f]);
        }
    }
    b.note(format!("product kind: {}", p.kind()));
    b.finish()
}
