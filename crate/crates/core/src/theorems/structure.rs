//! Connection axioms, isometry, the normal-gradient lemma and the forward
//! direction of Moore's theorem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_scenario_suite, DoublyTwistedImmersionScenario, LEMMA_TOLERANCE, MIXED_TOLERANCE, TWIST_MATCH_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::{metric_compatibility_residual, torsion, MetricField, VectorField};
use crate::immersion::{isometry_residual_at, ImmersionSetup, GAUSS_TOLERANCE, ISOMETRY_TOLERANCE};
use crate::report::{ReportBuilder, VerificationReport};

/// Bound on `|Γ̄|` for a target to count as flat.
pub const FLATNESS_TOLERANCE: f64 = 1e-10;

/// Whether every component of the map depends on one source factor only,
/// and, with a target split, whether the blocks line up.
fn product_structure_defect(setup: &ImmersionSetup) -> usize {
    let (n1, _) = setup.split();
    let comps = setup.map().components();
    let mut bad = 0;
    for (a, c) in comps.iter().enumerate() {
        let used = c.used_variables();
        let first = used.iter().all(|&i| i < n1);
        let second = used.iter().all(|&i| i >= n1);
        let ok = match setup.target_split() {
            Some((m1, _)) if a < m1 => first,
            Some(_) => second,
            None => first || second,
        };
        if !ok {
            bad += 1;
        }
    }
    bad
}

/// For a map into a flat target: the mixed second fundamental form vanishes
/// on a product map.
///
/// A non-flat target gives an ERRORED report. Whether the map is a product
/// is recorded (`product_structure`, informational); the gating record
/// `mixed` compares `max ‖h(∂_i, ∂_α)‖` with `min(tolerance, 1e-10)`.
pub fn moore_forward_check(setup: &ImmersionSetup, samples: usize, seed: u64, tolerance: f64) -> VerificationReport {
    let mut b = ReportBuilder::new("moore", tolerance, seed, samples);
    if let Err(e) = moore_body(&mut b, setup, samples, seed, tolerance) {
        b.error(&e);
    }
    b.finish()
}

fn moore_body(b: &mut ReportBuilder, setup: &ImmersionSetup, samples: usize, seed: u64, tolerance: f64) -> Result<()> {
    let (n1, n2) = setup.split();
    if n1 == 0 || n2 == 0 {
        return Err(Error::DegenerateSplit { n1, n2 });
    }
    let points = setup.sample_points(samples, seed);
    let mut flat = 0.0_f64;
    for x in &points {
        let y = setup.map().value(x)?;
        flat = flat.max(setup.target().christoffel(&y)?.max_abs());
    }
    if flat > FLATNESS_TOLERANCE {
        return Err(Error::FlatnessRequired { max: flat });
    }
    let defect = product_structure_defect(setup);
    if defect > 0 {
        b.note(format!("{defect} map component(s) mix the source factors"));
    }
    let tol = tolerance.min(MIXED_TOLERANCE);
    for (s, x) in points.iter().enumerate() {
        let p = setup.at(x)?;
        let r = p.mixed_residual();
        b.vanishes("product_structure", s, x, defect as f64, 0.0, false);
        b.vanishes("mixed", s, x, r, tol, true);
        b.summary_max("max.mixed", r);
        b.summary_min("min.mixed", r);
    }
    b.summary("max.target_christoffel", flat);
    Ok(())
}

/// A random analytic vector field on the chart of `g`.
fn random_field(g: &MetricField, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    let coords = g.chart().coords();
    let n = coords.len();
    let mut sources = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let mut c = [0.0; 4];
        for v in &mut c {
            *v = (rng.random_range(-1.0..1.0_f64) * 1e3).round() / 1e3;
        }
        sources.push(format!(
            "({}) + ({})*sin(({})*{}) + ({})*{}*{}",
            c[0], c[1], c[2] + 1.5, coords[i], c[3], coords[i], coords[j]
        ));
    }
    let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
    VectorField::parse(g.chart().clone(), &refs)
}

/// Torsion-freeness and metric compatibility of the Levi-Civita connection
/// of `g`.
///
/// Gating: `torsion` (`max |Γ^k_ij − Γ^k_ji|`, tolerance 0) and
/// `compatibility` (`|X g(Y,Z) − g(∇_X Y, Z) − g(Y, ∇_X Z)|` for three
/// seeded random analytic fields). `torsion.fields` evaluates the full
/// torsion tensor on the same fields and does not gate.
pub fn verify_connection_axioms(g: &MetricField, samples: usize, seed: u64, tolerance: f64) -> VerificationReport {
    let mut b = ReportBuilder::new("connection", tolerance, seed, samples);
    if let Err(e) = connection_body(&mut b, g, samples, seed, tolerance) {
        b.error(&e);
    }
    b.finish()
}

fn connection_body(b: &mut ReportBuilder, g: &MetricField, samples: usize, seed: u64, tolerance: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1e1d);
    let fx = random_field(g, &mut rng)?;
    let fy = random_field(g, &mut rng)?;
    let fz = random_field(g, &mut rng)?;
    let n = g.dim();
    for (s, x) in g.chart().sample_points(samples, seed).iter().enumerate() {
        let gamma = g.christoffel(x)?;
        let mut asym = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    asym = asym.max((gamma.get(k, i, j) - gamma.get(k, j, i)).abs());
                }
            }
        }
        b.vanishes("torsion", s, x, asym, 0.0, true);
        let compat = metric_compatibility_residual(g, &fx, &fy, &fz, x)?.abs();
        b.vanishes("compatibility", s, x, compat, tolerance, true);
        let t = torsion(g, &fx, &fy, x)?;
        let t = t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        b.vanishes("torsion.fields", s, x, t, tolerance, false);
        b.summary_max("max.torsion", asym);
        b.summary_max("max.compatibility", compat);
        b.summary_max("max.torsion.fields", t);
    }
    Ok(())
}

/// `‖Df − D₁f − D₂f‖` for `f = ln ρ₁` and `f = ln ρ₂`, gated at
/// `min(tolerance, 1e-10)`.
pub fn verify_lemma_decomposition(
    scenario: &DoublyTwistedImmersionScenario,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> VerificationReport {
    let tol = tolerance.min(LEMMA_TOLERANCE);
    run_scenario_suite("lemma", scenario, samples, seed, tolerance, |_| Ok(()), |b, s, p| {
        for (name, d) in [("ln_rho1", &p.d_ln_rho1), ("ln_rho2", &p.d_ln_rho2)] {
            b.vanishes(name, s, &p.x, d.residual, tol, true);
            b.summary_max(&format!("max.{name}"), d.residual);
            b.summary_max(&format!("max.norm.{name}"), p.norm(&d.df));
        }
    })
}

fn isometry_records(b: &mut ReportBuilder, tag: &str, setup: &ImmersionSetup, s: usize, x: &[f64]) -> Result<()> {
    let iso = isometry_residual_at(setup, x)?;
    b.vanishes(&format!("{tag}isometry"), s, x, iso, ISOMETRY_TOLERANCE, true);
    b.summary_max(&format!("max.{tag}isometry"), iso);
    let gauss = setup.at(x)?.gauss_residual();
    b.vanishes(&format!("{tag}gauss"), s, x, gauss, GAUSS_TOLERANCE, true);
    b.summary_max(&format!("max.{tag}gauss"), gauss);
    Ok(())
}

/// Isometry and Gauss-formula consistency of the twisted and direct
/// immersions of a scenario, and `σᵢ = ρᵢ ∘ φ`.
///
/// Unlike the other scenario suites this one does not stop at a failed
/// isometry check: the defects are the records.
pub fn verify_isometry(
    scenario: &DoublyTwistedImmersionScenario,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> VerificationReport {
    let mut b = ReportBuilder::new("isometry", tolerance, seed, samples);
    let run = |b: &mut ReportBuilder| -> Result<()> {
        for (s, x) in scenario.sample_points(samples, seed).iter().enumerate() {
            isometry_records(b, "twisted.", scenario.twisted_setup(), s, x)?;
            isometry_records(b, "direct.", scenario.direct_setup(), s, x)?;
            let tw = scenario.twist_mismatch_at(x)?;
            b.vanishes("twist_match", s, x, tw, TWIST_MATCH_TOLERANCE, true);
            b.summary_max("max.twist_match", tw);
        }
        Ok(())
    };
    if let Err(e) = run(&mut b) {
        b.error(&e);
    }
    b.finish()
}

/// Isometry and Gauss-formula consistency of a single immersion.
pub fn verify_immersion_isometry(setup: &ImmersionSetup, samples: usize, seed: u64, tolerance: f64) -> VerificationReport {
    let mut b = ReportBuilder::new("isometry", tolerance, seed, samples);
    let run = |b: &mut ReportBuilder| -> Result<()> {
        for (s, x) in setup.sample_points(samples, seed).iter().enumerate() {
            isometry_records(b, "", setup, s, x)?;
        }
        Ok(())
    };
    if let Err(e) = run(&mut b) {
        b.error(&e);
    }
    b.finish()
}
