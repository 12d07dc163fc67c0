//! Scene loading and suite execution behind the `twistprod` binary.

pub mod run;
pub mod scene;

pub use run::{default_suites, run_suite, RunOptions, RunSummary, Suite, SuiteOutcome};
pub use scene::{load_scene, parse_scene, Scene, SceneError};
