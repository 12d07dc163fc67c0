//! Verification suites for doubly twisted product immersions.
//!
//! A [`DoublyTwistedImmersionScenario`] is a product immersion
//! `φ = φ₁ × φ₂: N₁ ×_(σ₁,σ₂) N₂ → M₁ ×_(ρ₁,ρ₂) M₂` with `σᵢ = ρᵢ ∘ φ`.
//! Every suite evaluates both the twisted immersion (second fundamental
//! form `h^φ`) and the same map between the direct products (`h⁰`) on a
//! `g_N`-orthonormal frame adapted to the split, with target vectors
//! measured in `g_M`.
//!
//! Suites produce a [`VerificationReport`]; precondition failures give an
//! `ERRORED` report rather than a failing one.

mod characterizations;
mod corollaries;
mod minimality;
mod structure;

use std::ops::Range;

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::expr::Func;
use crate::geometry::ScalarField;
use crate::immersion::{isometry_residual_at, ImmersionPoint, ImmersionSetup, NormalGradient, SmoothMap};
use crate::linalg;
use crate::products::DoublyTwistedProduct;
use crate::report::{ReportBuilder, VerificationReport};

pub use characterizations::{
    check_totally_geodesic_characterization, verify_hphi_decomposition, verify_thm31_inequality, Which,
};
pub use corollaries::{verify_corollary_chen, verify_corollary_doubly_warped};
pub use minimality::verify_minimality;
pub use structure::{
    moore_forward_check, verify_connection_axioms, verify_immersion_isometry, verify_isometry,
    verify_lemma_decomposition, FLATNESS_TOLERANCE,
};

/// Tolerance for `σᵢ = ρᵢ ∘ φ`.
pub const TWIST_MATCH_TOLERANCE: f64 = 1e-10;
/// Tolerance for the vanishing of the mixed second fundamental form.
pub const MIXED_TOLERANCE: f64 = 1e-10;
/// Tolerance for the normal-gradient decomposition.
pub const LEMMA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DoublyTwistedImmersionScenario {
    source: DoublyTwistedProduct,
    target: DoublyTwistedProduct,
    phi1: SmoothMap,
    phi2: SmoothMap,
    map: SmoothMap,
    twisted: ImmersionSetup,
    direct: ImmersionSetup,
    factor1: ImmersionSetup,
    factor2: ImmersionSetup,
    ln_rho1: ScalarField,
    ln_rho2: ScalarField,
}

impl DoublyTwistedImmersionScenario {
    pub fn new(
        source: DoublyTwistedProduct,
        target: DoublyTwistedProduct,
        phi1: SmoothMap,
        phi2: SmoothMap,
    ) -> Result<Self> {
        let map = SmoothMap::product(&phi1, &phi2)?;
        let split = (source.n1(), source.n2());
        let tsplit = (target.n1(), target.n2());
        let twisted = ImmersionSetup::new(
            source.assembled().clone(),
            target.assembled().clone(),
            map.clone(),
            split,
        )?
        .with_target_split(tsplit.0, tsplit.1)?;
        let direct = ImmersionSetup::new(
            source.direct().clone(),
            target.direct().clone(),
            map.clone(),
            split,
        )?
        .with_target_split(tsplit.0, tsplit.1)?;
        let factor1 = ImmersionSetup::new(
            source.g1().clone(),
            target.g1().clone(),
            phi1.clone(),
            (source.n1(), 0),
        )?;
        let factor2 = ImmersionSetup::new(
            source.g2().clone(),
            target.g2().clone(),
            phi2.clone(),
            (source.n2(), 0),
        )?;
        let ln_rho1 = ScalarField::new(target.chart().clone(), &target.sigma1().expr().apply(Func::Ln))?;
        let ln_rho2 = ScalarField::new(target.chart().clone(), &target.sigma2().expr().apply(Func::Ln))?;
        Ok(Self {
            source,
            target,
            phi1,
            phi2,
            map,
            twisted,
            direct,
            factor1,
            factor2,
            ln_rho1,
            ln_rho2,
        })
    }

    /// Builds the source product with `σᵢ = ρᵢ ∘ (φ₁ × φ₂)`.
    pub fn from_target(
        g1: crate::geometry::MetricField,
        g2: crate::geometry::MetricField,
        target: DoublyTwistedProduct,
        phi1: SmoothMap,
        phi2: SmoothMap,
    ) -> Result<Self> {
        let map = SmoothMap::product(&phi1, &phi2)?;
        let target_exprs = |s: &ScalarField| -> Result<crate::expr::Expression> {
            Ok(s.expr().compose(map.components())?)
        };
        let sigma1 = target_exprs(target.sigma1())?;
        let sigma2 = target_exprs(target.sigma2())?;
        let source = DoublyTwistedProduct::new(g1, g2, &sigma1, &sigma2)?;
        Self::new(source, target, phi1, phi2)
    }

    pub fn source(&self) -> &DoublyTwistedProduct {
        &self.source
    }

    pub fn target(&self) -> &DoublyTwistedProduct {
        &self.target
    }

    pub fn phi1(&self) -> &SmoothMap {
        &self.phi1
    }

    pub fn phi2(&self) -> &SmoothMap {
        &self.phi2
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    /// The immersion between the twisted products.
    pub fn twisted_setup(&self) -> &ImmersionSetup {
        &self.twisted
    }

    /// The same map between the direct products.
    pub fn direct_setup(&self) -> &ImmersionSetup {
        &self.direct
    }

    pub fn factor_setups(&self) -> (&ImmersionSetup, &ImmersionSetup) {
        (&self.factor1, &self.factor2)
    }

    pub fn ln_rho1(&self) -> &ScalarField {
        &self.ln_rho1
    }

    pub fn ln_rho2(&self) -> &ScalarField {
        &self.ln_rho2
    }

    pub fn sample_points(&self, samples: usize, seed: u64) -> Vec<Vec<f64>> {
        self.source.chart().sample_points(samples, seed)
    }

    /// Largest `|σᵢ − ρᵢ ∘ φ|` at `x`.
    pub fn twist_mismatch_at(&self, x: &[f64]) -> Result<f64> {
        let y = self.map.value(x)?;
        let d1 = self.source.sigma1().value(x)? - self.target.sigma1().value(&y)?;
        let d2 = self.source.sigma2().value(x)? - self.target.sigma2().value(&y)?;
        Ok(d1.abs().max(d2.abs()))
    }

    /// Checks isometry of the twisted immersion and `σᵢ = ρᵢ ∘ φ` at the
    /// samples, returning the two largest defects.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<(f64, f64)> {
        let mut iso = 0.0_f64;
        let mut twist = 0.0_f64;
        for x in self.sample_points(samples.max(1), seed) {
            iso = iso.max(isometry_residual_at(&self.twisted, &x)?);
            twist = twist.max(self.twist_mismatch_at(&x)?);
        }
        if !(twist <= TWIST_MATCH_TOLERANCE) {
            return Err(Error::TwistMismatch { residual: twist });
        }
        if !(iso <= crate::immersion::ISOMETRY_TOLERANCE) {
            return Err(Error::NotIsometric { residual: iso });
        }
        Ok((iso, twist))
    }

    /// All quantities the suites need at one source point.
    pub fn at(&self, x: &[f64]) -> Result<ScenarioPoint> {
        ScenarioPoint::new(self, x)
    }
}

/// Pointwise data of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioPoint {
    pub x: Vec<f64>,
    /// The twisted immersion.
    pub tw: ImmersionPoint,
    /// The direct-product immersion of the same map.
    pub di: ImmersionPoint,
    pub n1: usize,
    pub n2: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    /// `ln ρᵢ ∘ φ` with source derivatives.
    pub ln_rho1_pulled: Jet2,
    pub ln_rho2_pulled: Jet2,
    pub d_ln_rho1: NormalGradient,
    pub d_ln_rho2: NormalGradient,
}

/// A factor block of the source frame. The first block is governed by `ρ₂`,
/// the second by `ρ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    First,
    Second,
}

impl ScenarioPoint {
    fn new(s: &DoublyTwistedImmersionScenario, x: &[f64]) -> Result<Self> {
        let tw = s.twisted.at(x)?;
        let di = s.direct.at(x)?;
        let m1 = s.target.n1();
        let d_ln_rho1 = tw.normal_gradient_split(&s.ln_rho1, m1)?;
        let d_ln_rho2 = tw.normal_gradient_split(&s.ln_rho2, m1)?;
        Ok(Self {
            x: x.to_vec(),
            n1: s.source.n1(),
            n2: s.source.n2(),
            sigma1: s.source.sigma1().value(x)?,
            sigma2: s.source.sigma2().value(x)?,
            ln_rho1_pulled: s.map.pull_back_jet(s.ln_rho1.expr(), x)?,
            ln_rho2_pulled: s.map.pull_back_jet(s.ln_rho2.expr(), x)?,
            d_ln_rho1,
            d_ln_rho2,
            tw,
            di,
        })
    }

    pub fn range(&self, b: Block) -> Range<usize> {
        match b {
            Block::First => 0..self.n1,
            Block::Second => self.n1..self.n1 + self.n2,
        }
    }

    pub fn n_of(&self, b: Block) -> usize {
        match b {
            Block::First => self.n1,
            Block::Second => self.n2,
        }
    }

    /// `ln ρ₂ ∘ φ` for the first block, `ln ρ₁ ∘ φ` for the second.
    pub(crate) fn governing_ln(&self, b: Block) -> &Jet2 {
        match b {
            Block::First => &self.ln_rho2_pulled,
            Block::Second => &self.ln_rho1_pulled,
        }
    }

    /// `D ln ρ₂` for the first block, `D ln ρ₁` for the second.
    pub(crate) fn governing_d(&self, b: Block) -> &NormalGradient {
        match b {
            Block::First => &self.d_ln_rho2,
            Block::Second => &self.d_ln_rho1,
        }
    }

    pub fn frame(&self, a: usize) -> &[f64] {
        &self.tw.frame[a]
    }

    pub fn h_phi(&self, a: usize, b: usize) -> Vec<f64> {
        self.tw.h_frame(a, b)
    }

    pub fn h0(&self, a: usize, b: usize) -> Vec<f64> {
        self.tw_frame_h0(a, b)
    }

    fn tw_frame_h0(&self, a: usize, b: usize) -> Vec<f64> {
        self.di.h(self.frame(a), self.frame(b))
    }

    /// `g_N(e_a, e_b)`, which equals `g_M(φ_* e_a, φ_* e_b)`.
    pub fn g(&self, a: usize, b: usize) -> f64 {
        self.tw.source.inner(self.frame(a), self.frame(b))
    }

    /// `e_a(ln ρ) φ_* e_b + e_b(ln ρ) φ_* e_a`.
    pub(crate) fn tangent_term(&self, l: &Jet2, a: usize, b: usize) -> Vec<f64> {
        let (ea, eb) = (self.frame(a), self.frame(b));
        let mut out = vec![0.0; self.tw.m()];
        linalg::axpy(l.directional(ea), &self.tw.pushforward(eb), &mut out);
        linalg::axpy(l.directional(eb), &self.tw.pushforward(ea), &mut out);
        out
    }

    /// `Σ e_a(ln ρ) φ_* e_a` over the block, for frame vectors `frame`.
    pub(crate) fn gradient_sum(&self, l: &Jet2, frame: &[Vec<f64>], b: Block) -> Vec<f64> {
        let mut out = vec![0.0; self.tw.m()];
        for a in self.range(b) {
            let e = &frame[a];
            linalg::axpy(l.directional(e), &self.tw.pushforward(e), &mut out);
        }
        out
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.tw.inner(u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.tw.norm(u)
    }

    pub fn norm2(&self, u: &[f64]) -> f64 {
        self.tw.norm2(u)
    }

    /// `Σ_{a,b ∈ block} ‖h⁰(e_a, e_b)‖²`.
    pub fn h0_block_norm2(&self, b: Block) -> f64 {
        let r = self.range(b);
        let mut s = 0.0;
        for a in r.clone() {
            for c in r.clone() {
                s += self.norm2(&self.h0(a, c));
            }
        }
        s
    }

    /// `Σ_{a ∈ block} h⁰(e_a, e_a)` on the `g_N` frame.
    pub fn h0_trace(&self, b: Block) -> Vec<f64> {
        let mut out = vec![0.0; self.tw.m()];
        for a in self.range(b) {
            linalg::axpy(1.0, &self.h0(a, a), &mut out);
        }
        out
    }

    /// Largest `‖v‖` over pairs in `rows × cols` of `f(a, b)`.
    pub(crate) fn max_norm_over(
        &self,
        rows: Range<usize>,
        cols: Range<usize>,
        f: impl Fn(usize, usize) -> Vec<f64>,
    ) -> f64 {
        let mut worst = 0.0_f64;
        for a in rows {
            for b in cols.clone() {
                worst = worst.max(self.norm(&f(a, b)));
            }
        }
        worst
    }

    /// Largest `‖h^φ(e_a, e_b)‖` within a block.
    pub fn h_phi_block_max(&self, b: Block) -> f64 {
        self.max_norm_over(self.range(b), self.range(b), |a, c| self.h_phi(a, c))
    }

    pub fn h0_block_max(&self, b: Block) -> f64 {
        self.max_norm_over(self.range(b), self.range(b), |a, c| self.h0(a, c))
    }

    pub fn h_phi_mixed_max(&self) -> f64 {
        self.max_norm_over(self.range(Block::First), self.range(Block::Second), |a, c| {
            self.h_phi(a, c)
        })
    }

    /// `X(ln ρ)Y + Y(ln ρ)X − g(X,Y) D ln ρ` over frame pairs of a block,
    /// largest norm.
    pub fn correction_max(&self, b: Block) -> f64 {
        let l = self.governing_ln(b);
        let d = &self.governing_d(b).df;
        self.max_norm_over(self.range(b), self.range(b), |a, c| {
            let mut v = self.tangent_term(l, a, c);
            linalg::axpy(-self.g(a, c), d, &mut v);
            v
        })
    }
}

/// Both versions of the remainder term and the pieces of the expansion of
/// `‖h^φ‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiValues {
    /// The six-sum display, evaluated as written.
    pub printed: f64,
    /// `‖h^φ‖² − ‖h⁰₁‖² − ‖h⁰₂‖² − n₁‖D ln ρ₂‖² − n₂‖D ln ρ₁‖²`.
    pub derived: f64,
    /// `−2⟨trace h⁰₁, D ln ρ₂⟩ − 2⟨trace h⁰₂, D ln ρ₁⟩`, the closed form of
    /// `derived`.
    pub cross: f64,
    pub h_phi_norm2: f64,
    pub h0_1_norm2: f64,
    pub h0_2_norm2: f64,
    pub d_ln_rho1_norm2: f64,
    pub d_ln_rho2_norm2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl PsiValues {
    /// `‖h^φ‖² − n₁‖D ln ρ₂‖² − n₂‖D ln ρ₁‖² − Ψ` with `Ψ = derived`.
    pub fn slack(&self) -> f64 {
        self.h_phi_norm2 - self.bound_without_psi() - self.derived
    }

    /// Same with the printed `Ψ`.
    pub fn printed_slack(&self) -> f64 {
        self.h_phi_norm2 - self.bound_without_psi() - self.printed
    }

    pub fn bound_without_psi(&self) -> f64 {
        self.n1 as f64 * self.d_ln_rho2_norm2 + self.n2 as f64 * self.d_ln_rho1_norm2
    }
}

impl ScenarioPoint {
    /// Three sums of the printed display for one block, with leading
    /// coefficient `lead` on the `⟨h⁰, T⟩` sum.
    fn printed_block(&self, b: Block, lead: f64) -> f64 {
        let l = self.governing_ln(b);
        let d = &self.governing_d(b).df;
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for i in self.range(b) {
            for j in self.range(b) {
                let h0 = self.h0(i, j);
                let t = self.tangent_term(l, i, j);
                s1 += self.inner(&h0, &t);
                s2 += self.norm2(&t);
                let mut ht = h0;
                linalg::axpy(1.0, &t, &mut ht);
                let gd: Vec<f64> = d.iter().map(|v| self.g(i, j) * v).collect();
                s3 += self.inner(&ht, &gd);
            }
        }
        lead * s1 + s2 - 2.0 * s3
    }

    pub fn psi(&self) -> PsiValues {
        let h_phi_norm2 = self.tw.squared_norm_over(0..self.n1 + self.n2, 0..self.n1 + self.n2);
        let h0_1_norm2 = self.h0_block_norm2(Block::First);
        let h0_2_norm2 = self.h0_block_norm2(Block::Second);
        let d1 = self.norm2(&self.d_ln_rho1.df);
        let d2 = self.norm2(&self.d_ln_rho2.df);
        let derived = h_phi_norm2
            - h0_1_norm2
            - h0_2_norm2
            - self.n1 as f64 * d2
            - self.n2 as f64 * d1;
        let cross = -2.0 * self.inner(&self.h0_trace(Block::First), &self.d_ln_rho2.df)
            - 2.0 * self.inner(&self.h0_trace(Block::Second), &self.d_ln_rho1.df);
        // the first factor carries "2 Σ 2 g_N(…)", the second "2 Σ g_N(…)"
        let printed = self.printed_block(Block::First, 4.0) + self.printed_block(Block::Second, 2.0);
        PsiValues {
            printed,
            derived,
            cross,
            h_phi_norm2,
            h0_1_norm2,
            h0_2_norm2,
            d_ln_rho1_norm2: d1,
            d_ln_rho2_norm2: d2,
            n1: self.n1,
            n2: self.n2,
        }
    }
}

/// `Ψ` (printed and derived) at `x`.
pub fn psi(scenario: &DoublyTwistedImmersionScenario, x: &[f64]) -> Result<PsiValues> {
    Ok(scenario.at(x)?.psi())
}

/// Runs `body` at every sample after validating the scenario; errors end
/// the suite as ERRORED.
pub(crate) fn run_scenario_suite(
    name: &str,
    scenario: &DoublyTwistedImmersionScenario,
    samples: usize,
    seed: u64,
    tolerance: f64,
    precondition: impl FnOnce(&DoublyTwistedImmersionScenario) -> Result<()>,
    mut body: impl FnMut(&mut ReportBuilder, usize, &ScenarioPoint),
) -> VerificationReport {
    let mut b = ReportBuilder::new(name, tolerance, seed, samples);
    if let Err(e) = precondition(scenario).and_then(|_| scenario.validate(samples, seed).map(|_| ())) {
        b.error(&e);
        return b.finish();
    }
    for (s, x) in scenario.sample_points(samples, seed).iter().enumerate() {
        match scenario.at(x) {
            Ok(p) => body(&mut b, s, &p),
            Err(e) => {
                b.error(&e);
                break;
            }
        }
    }
    b.finish()
}
