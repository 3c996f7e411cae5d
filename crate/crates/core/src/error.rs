use std::fmt;

use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

/// Why a vertex coin was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum CoinViolation {
    /// The equal-transmission unitarity constraints do not hold.
    Constraints {
        residual1: f64,
        residual2: f64,
    },
    /// `max |M^dagger M - I|` exceeds tolerance.
    NotUnitary {
        deviation: f64,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// The `free` coin only exists for two-edge vertices.
    FreeNeedsDegreeTwo {
        degree: usize,
    },
    ZeroDegree,
}

impl fmt::Display for CoinViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoinViolation::Constraints { residual1, residual2 } => write!(
                f,
                "equal-transmission constraints violated (residual1 = {residual1}, residual2 = {residual2})"
            ),
            CoinViolation::NotUnitary { deviation } => {
                write!(f, "coin matrix is not unitary (max |M^H M - I| = {deviation:e})")
            }
            CoinViolation::DimensionMismatch { expected, found } => {
                write!(f, "coin matrix is {found}x{found} but the vertex has degree {expected}")
            }
            CoinViolation::FreeNeedsDegreeTwo { degree } => {
                write!(f, "free coin requires degree 2, vertex has degree {degree}")
            }
            CoinViolation::ZeroDegree => write!(f, "vertex has no incident edges"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Input document does not match the graph schema. The string names the field.
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("coin at vertex {vertex}: {violation}")]
    Coin { vertex: VertexId, violation: CoinViolation },

    #[error("cannot parse edge state {input:?}: {message}")]
    EdgeSyntax { input: String, message: String },

    #[error("edge state {0} is not in the basis")]
    UnknownEdge(String),

    #[error("tail truncation {have} is too short for this run (needs at least {needed})")]
    TruncationTooShort { needed: usize, have: usize },

    #[error(
        "scattering system is singular at theta = {theta} (|z| = {radius}); possible resonance, smallest pivot {pivot:e}"
    )]
    Singular { theta: f64, radius: f64, pivot: f64 },

    #[error("sampled |t| reached {max_abs:e} on radius {radius}: suspected pole near the circle, lower the radius")]
    PoleNearCircle { max_abs: f64, radius: f64 },

    #[error("invalid sampling parameters: {0}")]
    Sampling(String),

    #[error("path enumeration limited to {max} steps, {requested} requested (path count grows exponentially)")]
    PathLengthGuard { requested: usize, max: usize },
}

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input rather than by a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Graph(_)
                | Error::EdgeSyntax { .. }
                | Error::UnknownEdge(_)
                | Error::TruncationTooShort { .. }
                | Error::Sampling(_)
                | Error::PathLengthGuard { .. }
        )
    }
}
