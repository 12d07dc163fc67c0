use thiserror::Error;

use crate::expr::{BuildError, EvalError, ParseError};
use crate::products::ProductKind;

/// Errors raised by geometric constructions and verification suites.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("{context}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("metric components ({i},{j}) and ({j},{i}) differ")]
    AsymmetricMetric { i: usize, j: usize },
    #[error("metric is not positive definite at {point:?} (smallest pivot {pivot:e})")]
    NotPositiveDefinite { point: Vec<f64>, pivot: f64 },
    #[error("twisting function {field} is {value} <= 0 at {point:?}")]
    NonPositiveTwist {
        field: String,
        point: Vec<f64>,
        value: f64,
    },
    #[error("{field} is not {kind}: {reason}")]
    Specialization {
        kind: ProductKind,
        field: String,
        reason: String,
    },
    #[error("vector field has nonzero components in both factor blocks")]
    MixedBlockField,
    #[error("Jacobian is rank deficient at {point:?} (smallest singular value {singular:e})")]
    RankDeficient { point: Vec<f64>, singular: f64 },
    #[error("split {n1}+{n2} needs both factors nonempty")]
    DegenerateSplit { n1: usize, n2: usize },
    #[error("the target has no declared product split")]
    MissingTargetSplit,
    #[error("target is not flat: |Christoffel| reaches {max:e}")]
    FlatnessRequired { max: f64 },
    #[error("map is not isometric: residual {residual:e}")]
    NotIsometric { residual: f64 },
    #[error("twisting functions do not factor through the map: residual {residual:e}")]
    TwistMismatch { residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
