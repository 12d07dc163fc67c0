//! Doubly twisted products and product immersions, computed numerically.
//!
//! Metrics, twisting functions and maps are given as analytic expressions
//! ([`expr`]) and differentiated exactly with second-order jets
//! ([`autodiff`]). On top of that sit single-chart Riemannian geometry
//! ([`geometry`]), product metrics ([`products`]), extrinsic geometry of
//! immersions ([`immersion`]) and verification suites ([`theorems`]) that
//! check the connection formulas, second fundamental form decompositions and
//! the inequalities and characterizations built on them at sampled points.

pub mod autodiff;
mod error;
pub mod expr;
pub mod geometry;
pub mod immersion;
pub(crate) mod linalg;
pub mod products;
pub mod report;
pub mod theorems;

pub use autodiff::Jet2;
pub use error::{Error, Result};
pub use expr::Expression;
pub use geometry::{ChartDomain, MetricField, ScalarField, TangentVector, VectorField};
pub use immersion::{ImmersionSetup, SmoothMap};
pub use products::{DoublyTwistedProduct, ProductKind};
pub use report::{Verdict, VerificationReport};
pub use theorems::DoublyTwistedImmersionScenario;

/// Version string stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default tolerance for residual checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Default sample count per suite.
pub const DEFAULT_SAMPLES: usize = 50;
/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 42;
