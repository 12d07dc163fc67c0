//! Suite selection and execution over a loaded scene.

use std::fmt::Write as _;

use serde::Serialize;
use twistprod::products::{verify_proposition1, ProductKind};
use twistprod::report::{ReportBuilder, Verdict, VerificationReport};
use twistprod::theorems::{
    check_totally_geodesic_characterization, moore_forward_check, verify_connection_axioms,
    verify_corollary_chen, verify_corollary_doubly_warped, verify_hphi_decomposition, verify_immersion_isometry,
    verify_isometry, verify_lemma_decomposition, verify_minimality, verify_thm31_inequality, Which,
};
use twistprod::{DoublyTwistedImmersionScenario, Error};

use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Prop1,
    Connection,
    Hphi,
    Thm31,
    Tg1,
    Tg2,
    Tg,
    Minimality,
    DoublyWarped,
    Chen,
    Lemma,
    Moore,
    Isometry,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Prop1,
        Suite::Connection,
        Suite::Hphi,
        Suite::Thm31,
        Suite::Tg1,
        Suite::Tg2,
        Suite::Tg,
        Suite::Minimality,
        Suite::DoublyWarped,
        Suite::Chen,
        Suite::Lemma,
        Suite::Moore,
        Suite::Isometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Connection => "connection",
            Suite::Hphi => "hphi",
            Suite::Thm31 => "thm31",
            Suite::Tg1 => "tg1",
            Suite::Tg2 => "tg2",
            Suite::Tg => "tg",
            Suite::Minimality => "minimality",
            Suite::DoublyWarped => "doubly_warped",
            Suite::Chen => "chen",
            Suite::Lemma => "lemma",
            Suite::Moore => "moore",
            Suite::Isometry => "isometry",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Prop1 => "Levi-Civita connection of the product against the predicted block formulas",
            Suite::Connection => "torsion and metric compatibility for every metric of the scene",
            Suite::Hphi => "h^phi against h^0 plus twist corrections on frame pairs",
            Suite::Thm31 => "norm expansion and lower bound for |h^phi|^2",
            Suite::Tg1 => "first-factor geodesy iff phi_1 geodesic and the correction identity",
            Suite::Tg2 => "second-factor geodesy iff phi_2 geodesic and the correction identity",
            Suite::Tg => "both partial characterizations and total geodesy",
            Suite::Minimality => "partial and full minimality against the stated side conditions",
            Suite::DoublyWarped => "doubly warped special case",
            Suite::Chen => "warped special case",
            Suite::Lemma => "normal gradient splits along the target factors",
            Suite::Moore => "product maps into flat space are mixed totally geodesic",
            Suite::Isometry => "isometry, Gauss formula and twist matching",
        }
    }
}

/// Run parameters after merging flags, environment and scene defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

/// Suites run by `--suite all`: the scene's `[run].suites` if given,
/// otherwise everything the scene has the objects for.
pub fn default_suites(scene: &Scene) -> Vec<Suite> {
    if let Some(list) = &scene.run.suites {
        return list.iter().filter_map(|s| Suite::from_name(s)).collect();
    }
    let mut out = Vec::new();
    if scene.primary_product().is_some() {
        out.push(Suite::Prop1);
    }
    if !scene.all_metrics().is_empty() {
        out.push(Suite::Connection);
    }
    if let Some(sc) = &scene.scenario {
        out.extend([
            Suite::Hphi,
            Suite::Thm31,
            Suite::Tg1,
            Suite::Tg2,
            Suite::Tg,
            Suite::Minimality,
        ]);
        let both = |k| sc.source().satisfies(k).is_ok() && sc.target().satisfies(k).is_ok();
        if both(ProductKind::DoublyWarped) {
            out.push(Suite::DoublyWarped);
        }
        if both(ProductKind::Warped) {
            out.push(Suite::Chen);
        }
        out.push(Suite::Lemma);
    }
    if scene.immersion.is_some() {
        out.push(Suite::Moore);
    }
    if scene.scenario.is_some() || scene.immersion.is_some() {
        out.push(Suite::Isometry);
    }
    out
}

fn missing(suite: Suite, o: &RunOptions, what: &str) -> VerificationReport {
    let e = Error::Precondition(format!("scene declares no {what}"));
    ReportBuilder::errored(suite.name(), o.tolerance, o.seed, o.samples, &e)
}

fn with_scenario(
    scene: &Scene,
    suite: Suite,
    o: &RunOptions,
    f: impl FnOnce(&DoublyTwistedImmersionScenario) -> VerificationReport,
) -> VerificationReport {
    match &scene.scenario {
        Some(s) => f(s),
        None => missing(suite, o, "[scenario]"),
    }
}

pub fn run_suite(scene: &Scene, suite: Suite, o: &RunOptions) -> VerificationReport {
    let (n, seed, tol) = (o.samples, o.seed, o.tolerance);
    match suite {
        Suite::Prop1 => match scene.primary_product() {
            Some(p) => verify_proposition1(p, n, seed, tol),
            None => missing(suite, o, "product (set [run].product)"),
        },
        Suite::Connection => {
            let parts = scene
                .all_metrics()
                .into_iter()
                .map(|(name, g)| (name, verify_connection_axioms(g, n, seed, tol)))
                .collect();
            VerificationReport::merge(suite.name(), tol, seed, n, parts)
        }
        Suite::Hphi => with_scenario(scene, suite, o, |s| verify_hphi_decomposition(s, n, seed, tol)),
        Suite::Thm31 => with_scenario(scene, suite, o, |s| verify_thm31_inequality(s, n, seed, tol)),
        Suite::Tg1 => with_scenario(scene, suite, o, |s| {
            check_totally_geodesic_characterization(s, Which::First, n, seed, tol)
        }),
        Suite::Tg2 => with_scenario(scene, suite, o, |s| {
            check_totally_geodesic_characterization(s, Which::Second, n, seed, tol)
        }),
        Suite::Tg => with_scenario(scene, suite, o, |s| {
            check_totally_geodesic_characterization(s, Which::Both, n, seed, tol)
        }),
        Suite::Minimality => with_scenario(scene, suite, o, |s| verify_minimality(s, n, seed, tol)),
        Suite::DoublyWarped => with_scenario(scene, suite, o, |s| verify_corollary_doubly_warped(s, n, seed, tol)),
        Suite::Chen => with_scenario(scene, suite, o, |s| verify_corollary_chen(s, n, seed, tol)),
        Suite::Lemma => with_scenario(scene, suite, o, |s| verify_lemma_decomposition(s, n, seed, tol)),
        Suite::Moore => match scene.moore_setup() {
            Some(setup) => moore_forward_check(setup, n, seed, tol),
            None => missing(suite, o, "[immersion] or [scenario]"),
        },
        Suite::Isometry => match (&scene.scenario, &scene.immersion) {
            (Some(s), None) => verify_isometry(s, n, seed, tol),
            (None, Some(i)) => verify_immersion_isometry(i, n, seed, tol),
            (Some(s), Some(i)) => VerificationReport::merge(
                suite.name(),
                tol,
                seed,
                n,
                vec![
                    ("scenario".into(), verify_isometry(s, n, seed, tol)),
                    ("immersion".into(), verify_immersion_isometry(i, n, seed, tol)),
                ],
            ),
            (None, None) => missing(suite, o, "[immersion] or [scenario]"),
        },
    }
}

/// One line of the run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub verdict: Verdict,
    pub worst_residual: f64,
    pub error: Option<String>,
    pub report_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scene: String,
    pub version: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub suites: Vec<SuiteOutcome>,
}

impl RunSummary {
    /// 0 when every suite passed, otherwise `10 + index` of the first suite
    /// that did not.
    pub fn exit_code(&self) -> i32 {
        match self.suites.iter().position(|s| s.verdict != Verdict::Pass) {
            None => 0,
            Some(i) => 10 + i as i32,
        }
    }
}

/// Human-readable block for one report.
pub fn format_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{:<14}{:<9}worst {:<10.3e} tol {:.0e}  samples {}  seed {}",
        r.suite,
        r.verdict.to_string(),
        r.worst_residual(),
        r.tolerance,
        r.samples,
        r.seed
    );
    if let Some(e) = &r.error {
        let _ = write!(s, "\n    error: {e}");
    }
    let mut shown = std::collections::BTreeSet::new();
    for c in r.failing_checks() {
        if shown.insert(c.name.clone()) && shown.len() <= 5 {
            let count = r.failing_checks().filter(|d| d.name == c.name).count();
            let _ = write!(
                s,
                "\n    failed {} at {count} sample(s); first at sample {}: lhs {:.6e} rhs {:.6e} residual {:.3e}",
                c.name, c.sample, c.lhs, c.rhs, c.residual
            );
        }
    }
    for n in &r.notes {
        let _ = write!(s, "\n    note: {n}");
    }
    s
}
