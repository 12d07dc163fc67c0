//! Doubly warped and warped special cases.

use super::{run_scenario_suite, Block, DoublyTwistedImmersionScenario, ScenarioPoint, MIXED_TOLERANCE};
use crate::error::Result;
use crate::products::ProductKind;
use crate::report::{ReportBuilder, VerificationReport};

fn require(sc: &DoublyTwistedImmersionScenario, kind: ProductKind) -> Result<()> {
    sc.source().satisfies(kind)?;
    sc.target().satisfies(kind)
}

/// Mixed vanishing, the norm bound with its equality case, and statement (v).
fn common_checks(b: &mut ReportBuilder, s: usize, p: &ScenarioPoint, tolerance: f64, bound: f64) {
    let x = &p.x;
    let v = p.psi();
    let mixed = p.h_phi_mixed_max();
    b.vanishes("mixed", s, x, mixed, tolerance.min(MIXED_TOLERANCE), true);
    b.inequality("bound", s, x, v.h_phi_norm2, bound, tolerance, true);
    let gap = v.h_phi_norm2 - bound;
    let geodesic = v.h0_1_norm2 + v.h0_2_norm2;
    b.consistency("equality.iff", s, x, gap.abs(), geodesic, tolerance, true);
    let a1 = p.h_phi_block_max(Block::First);
    let a2 = p.h_phi_block_max(Block::Second);
    let total = a1.max(a2).max(mixed);
    b.consistency("total.iff", s, x, total, a1.max(a2), tolerance, true);
    b.summary_max("max.mixed", mixed);
    b.summary_max("max.gap", gap);
    b.summary_min("min.gap", gap);
    b.summary_max("max.h0_1_norm2", v.h0_1_norm2);
    b.summary_max("max.h0_2_norm2", v.h0_2_norm2);
}

/// Statements of the doubly warped case: mixed totally geodesic,
/// `‖h^φ‖² ≥ n₁‖D ln ρ₂‖² + n₂‖D ln ρ₁‖²` with equality iff both factors
/// are totally geodesic, and `N_i`-geodesy iff `φ_i` geodesic and
/// `D ln ρ_j = 0`.
pub fn verify_corollary_doubly_warped(
    scenario: &DoublyTwistedImmersionScenario,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> VerificationReport {
    run_scenario_suite(
        "doubly_warped",
        scenario,
        samples,
        seed,
        tolerance,
        |sc| require(sc, ProductKind::DoublyWarped),
        |b, s, p| {
            let x = &p.x;
            let v = p.psi();
            common_checks(b, s, p, tolerance, v.bound_without_psi());
            for (block, tag) in [(Block::First, "n1"), (Block::Second, "n2")] {
                let a = p.h_phi_block_max(block);
                let geo = p.h0_block_max(block);
                let d = p.norm(&p.governing_d(block).df);
                b.consistency(&format!("{tag}.iff"), s, x, a, geo.max(d), tolerance, true);
            }
        },
    )
}

/// Statements of the warped case (`σ₂ = ρ₂ = 1`): mixed totally geodesic,
/// `‖h^φ‖² ≥ n₂‖D ln ρ‖²` with equality iff both factors are totally
/// geodesic, `N₁`-geodesy iff `φ₁` geodesic, `N₂`-geodesy iff `φ₂` geodesic
/// and `D ln ρ = 0`.
pub fn verify_corollary_chen(
    scenario: &DoublyTwistedImmersionScenario,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> VerificationReport {
    run_scenario_suite(
        "chen",
        scenario,
        samples,
        seed,
        tolerance,
        |sc| require(sc, ProductKind::Warped),
        |b, s, p| {
            let x = &p.x;
            let v = p.psi();
            let bound = p.n2 as f64 * v.d_ln_rho1_norm2;
            common_checks(b, s, p, tolerance, bound);
            let a1 = p.h_phi_block_max(Block::First);
            b.consistency("n1.iff", s, x, a1, p.h0_block_max(Block::First), tolerance, true);
            let a2 = p.h_phi_block_max(Block::Second);
            let d = p.norm(&p.d_ln_rho1.df);
            b.consistency("n2.iff", s, x, a2, p.h0_block_max(Block::Second).max(d), tolerance, true);
            b.summary_max("max.d_ln_rho", d);
            b.summary_min("min.d_ln_rho", d);
        },
    )
}
