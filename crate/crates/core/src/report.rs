//! Structured verification reports.
//!
//! Reports are plain data with a fixed field order, so serializing the same
//! report twice yields the same bytes. Wall time is kept for display but not
//! serialized.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Errored,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Errored => "ERRORED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `residual = |lhs − rhs|`, passes when `residual ≤ tolerance`.
    Equality,
    /// `residual = lhs − rhs` (slack), passes when `residual ≥ −tolerance`.
    Inequality,
    /// Two sides of an equivalence; `lhs`, `rhs` are the residuals of each
    /// side, `residual` is 0 when their truth values agree and 1 otherwise.
    Consistency,
    /// A bound that must be exceeded: passes when `residual > tolerance`.
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub sample: usize,
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub gating: bool,
    pub passed: bool,
}

impl CheckRecord {
    /// How far the record is from passing (0 when it passes comfortably).
    pub fn excess(&self) -> f64 {
        match self.kind {
            CheckKind::Equality => self.residual,
            CheckKind::Inequality => (-self.residual).max(0.0),
            CheckKind::Consistency => self.residual,
            CheckKind::Exceeds => {
                if self.passed {
                    0.0
                } else {
                    self.tolerance - self.residual
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub sample: usize,
    pub point: Vec<f64>,
    /// Largest gating equality residual or inequality violation at the sample.
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: usize,
    pub version: String,
    pub error: Option<String>,
    pub summary: BTreeMap<String, f64>,
    pub per_sample: Vec<SampleSummary>,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl VerificationReport {
    pub fn is_pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Records named `name`.
    pub fn checks_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.checks.iter().filter(move |c| c.name == name)
    }

    /// Largest residual among records named `name` (NaN when there are none).
    pub fn max_residual(&self, name: &str) -> f64 {
        self.checks_named(name)
            .map(|c| c.residual)
            .fold(f64::NAN, f64::max)
    }

    /// Smallest residual among records named `name` (NaN when there are none).
    pub fn min_residual(&self, name: &str) -> f64 {
        self.checks_named(name)
            .map(|c| c.residual)
            .fold(f64::NAN, f64::min)
    }

    /// Whether every record named `name` passed.
    pub fn all_passed(&self, name: &str) -> bool {
        let mut any = false;
        for c in self.checks_named(name) {
            any = true;
            if !c.passed {
                return false;
            }
        }
        any
    }

    pub fn failing_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.gating && !c.passed)
    }

    /// Largest per-sample worst residual (0 when nothing gated).
    pub fn worst_residual(&self) -> f64 {
        self.per_sample.iter().map(|s| s.worst_residual).fold(0.0, f64::max)
    }

    /// Combines reports of one suite run on several objects. Check names,
    /// summary keys and notes are prefixed with `label/`.
    pub fn merge(suite: &str, tolerance: f64, seed: u64, samples: usize, parts: Vec<(String, VerificationReport)>) -> Self {
        let mut out = ReportBuilder::new(suite, tolerance, seed, samples).report;
        let mut errors = Vec::new();
        let mut worst: BTreeMap<usize, SampleSummary> = BTreeMap::new();
        let mut verdict = Verdict::Pass;
        if parts.is_empty() {
            verdict = Verdict::Errored;
            errors.push("nothing to check".to_string());
        }
        for (label, r) in parts {
            verdict = match (verdict, r.verdict) {
                (Verdict::Errored, _) | (_, Verdict::Errored) => Verdict::Errored,
                (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                _ => Verdict::Pass,
            };
            if let Some(e) = r.error {
                errors.push(format!("{label}: {e}"));
            }
            for (k, v) in r.summary {
                out.summary.insert(format!("{label}/{k}"), v);
            }
            for mut c in r.checks {
                c.name = format!("{label}/{}", c.name);
                out.checks.push(c);
            }
            for n in r.notes {
                out.notes.push(format!("{label}: {n}"));
            }
            for s in r.per_sample {
                let e = worst.entry(s.sample).or_insert_with(|| s.clone());
                e.worst_residual = e.worst_residual.max(s.worst_residual);
            }
            out.wall_time += r.wall_time;
        }
        out.per_sample = worst.into_values().collect();
        out.verdict = verdict;
        if !errors.is_empty() {
            out.error = Some(errors.join("; "));
        }
        out
    }
}

/// Accumulates check records and derives the verdict.
#[derive(Debug)]
pub struct ReportBuilder {
    report: VerificationReport,
    started: Stopwatch,
}

/// `Instant` panics on `wasm32-unknown-unknown`; there the time stays zero.
#[derive(Debug)]
struct Stopwatch(#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return Self(std::time::Instant::now());
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        return Self();
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.0.elapsed();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        return Duration::ZERO;
    }
}

impl ReportBuilder {
    pub fn new(suite: &str, tolerance: f64, seed: u64, samples: usize) -> Self {
        Self {
            report: VerificationReport {
                suite: suite.to_string(),
                verdict: Verdict::Pass,
                tolerance,
                seed,
                samples,
                version: crate::VERSION.to_string(),
                error: None,
                summary: BTreeMap::new(),
                per_sample: Vec::new(),
                checks: Vec::new(),
                notes: Vec::new(),
                wall_time: Duration::ZERO,
            },
            started: Stopwatch::start(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.report.tolerance
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        name: &str,
        sample: usize,
        point: &[f64],
        lhs: f64,
        rhs: f64,
        residual: f64,
        tolerance: f64,
        kind: CheckKind,
        gating: bool,
    ) -> bool {
        let passed = match kind {
            CheckKind::Equality | CheckKind::Consistency => residual <= tolerance,
            CheckKind::Inequality => residual >= -tolerance,
            CheckKind::Exceeds => residual > tolerance,
        };
        self.report.checks.push(CheckRecord {
            name: name.to_string(),
            sample,
            point: point.to_vec(),
            lhs,
            rhs,
            residual,
            tolerance,
            kind,
            gating,
            passed,
        });
        passed
    }

    /// `|lhs − rhs| ≤ tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn equality(
        &mut self,
        name: &str,
        sample: usize,
        point: &[f64],
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        gating: bool,
    ) -> bool {
        let r = (lhs - rhs).abs();
        self.push(name, sample, point, lhs, rhs, r, tolerance, CheckKind::Equality, gating)
    }

    /// A residual that should vanish.
    pub fn vanishes(
        &mut self,
        name: &str,
        sample: usize,
        point: &[f64],
        residual: f64,
        tolerance: f64,
        gating: bool,
    ) -> bool {
        self.equality(name, sample, point, residual, 0.0, tolerance, gating)
    }

    /// `lhs ≥ rhs − tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn inequality(
        &mut self,
        name: &str,
        sample: usize,
        point: &[f64],
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        gating: bool,
    ) -> bool {
        self.push(name, sample, point, lhs, rhs, lhs - rhs, tolerance, CheckKind::Inequality, gating)
    }

    /// `residual > bound`, for negative controls.
    pub fn exceeds(
        &mut self,
        name: &str,
        sample: usize,
        point: &[f64],
        residual: f64,
        bound: f64,
        gating: bool,
    ) -> bool {
        self.push(name, sample, point, residual, bound, residual, bound, CheckKind::Exceeds, gating)
    }

    /// Equivalence check: side residuals `lhs`, `rhs` are read as true when
    /// at most `tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn consistency(
        &mut self,
        name: &str,
        sample: usize,
        point: &[f64],
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        gating: bool,
    ) -> bool {
        let agree = (lhs <= tolerance) == (rhs <= tolerance);
        let r = if agree { 0.0 } else { 1.0 };
        self.push(name, sample, point, lhs, rhs, r, 0.0, CheckKind::Consistency, gating)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.report.notes.push(note.into());
    }

    pub fn summary(&mut self, key: &str, value: f64) {
        self.report.summary.insert(key.to_string(), value);
    }

    /// Keeps the running maximum under `key`.
    pub fn summary_max(&mut self, key: &str, value: f64) {
        let e = self.report.summary.entry(key.to_string()).or_insert(value);
        *e = e.max(value);
    }

    /// Keeps the running minimum under `key`.
    pub fn summary_min(&mut self, key: &str, value: f64) {
        let e = self.report.summary.entry(key.to_string()).or_insert(value);
        *e = e.min(value);
    }

    /// Marks the suite as errored; the verdict can no longer be PASS.
    pub fn error(&mut self, err: &Error) {
        self.report.error = Some(err.to_string());
    }

    pub fn finish(mut self) -> VerificationReport {
        let r = &mut self.report;
        let mut worst: BTreeMap<usize, (Vec<f64>, f64)> = BTreeMap::new();
        for c in r.checks.iter().filter(|c| c.gating) {
            let e = worst.entry(c.sample).or_insert_with(|| (c.point.clone(), 0.0));
            e.1 = e.1.max(c.excess());
        }
        r.per_sample = worst
            .into_iter()
            .map(|(sample, (point, worst_residual))| SampleSummary {
                sample,
                point,
                worst_residual,
            })
            .collect();
        let gating_checks = r.checks.iter().filter(|c| c.gating).count();
        r.verdict = if r.error.is_some() {
            Verdict::Errored
        } else if r.checks.iter().any(|c| c.gating && !c.passed) {
            Verdict::Fail
        } else if gating_checks == 0 {
            r.error = Some("no gating checks were evaluated".into());
            Verdict::Errored
        } else {
            Verdict::Pass
        };
        r.wall_time = self.started.elapsed();
        self.report
    }

    /// Convenience for suites that fail before producing any record.
    pub fn errored(suite: &str, tolerance: f64, seed: u64, samples: usize, err: &Error) -> VerificationReport {
        let mut b = Self::new(suite, tolerance, seed, samples);
        b.error(err);
        b.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let mut b = ReportBuilder::new("s", 1e-8, 1, 1);
        b.vanishes("a", 0, &[0.0], 1e-9, 1e-8, true);
        b.vanishes("info", 0, &[0.0], 1.0, 1e-8, false);
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.per_sample[0].worst_residual, 1e-9);

        let mut b = ReportBuilder::new("s", 1e-8, 1, 1);
        b.inequality("ineq", 0, &[0.0], 1.0, 1.5, 1e-8, true);
        assert_eq!(b.finish().verdict, Verdict::Fail);

        let mut b = ReportBuilder::new("s", 1e-8, 1, 1);
        b.vanishes("a", 0, &[0.0], 0.0, 1e-8, true);
        b.error(&Error::MissingTargetSplit);
        assert_eq!(b.finish().verdict, Verdict::Errored);

        assert_eq!(ReportBuilder::new("s", 1e-8, 1, 1).finish().verdict, Verdict::Errored);
    }

    #[test]
    fn consistency_and_exceeds() {
        let mut b = ReportBuilder::new("s", 1e-8, 1, 1);
        assert!(b.consistency("iff", 0, &[], 0.0, 1e-12, 1e-8, true));
        assert!(b.consistency("iff", 0, &[], 0.3, 2.0, 1e-8, true));
        assert!(!b.consistency("iff", 0, &[], 0.3, 0.0, 1e-8, true));
        assert!(b.exceeds("neg", 0, &[], 0.5, 0.1, true));
        assert!(!b.exceeds("neg", 0, &[], 0.05, 0.1, true));
    }
}
