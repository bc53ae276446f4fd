//! Error types shared across the crate.

use thiserror::Error;

/// Structural problems in a model description: wrong dimensions, malformed
/// files, out-of-range scalars. Each variant names the offending field.
#[derive(Debug, Error)]
pub enum StructuralError {
    #[error("failed to read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse model file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("dimension mismatch in `{field}`: expected {expected}, found {found}")]
    DimensionMismatch {
        field: String,
        expected: String,
        found: String,
    },
    #[error("schema violation in `{field}`: {reason}")]
    SchemaViolation { field: String, reason: String },
}

/// Semantic model problems surfaced by operations (as opposed to the
/// pass/fail entries of a validation report).
#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error("matrix C is singular (Lemma 3 fails): condition number {cond:e}")]
    SingularC { cond: f64 },
    #[error("Delta_1 and Delta_2 both vanish (assumption A5 fails)")]
    DegenerateDeltas,
}

/// Failures of the local flight-time solve from the section `Σ0` to `Σ1`.
#[derive(Debug, Error)]
pub enum FlightError {
    #[error("point violates the Σ0 section constraints: {reason}")]
    PreconditionViolated { reason: String },
    #[error(
        "no sign change of the section constraint in [{t_min:.6}, {t_max:.6}] \
         ({evals} evaluations)"
    )]
    NoCrossing {
        t_min: f64,
        t_max: f64,
        evals: usize,
    },
    #[error("non-finite value encountered during flight solve at t = {t}")]
    NonFinite { t: f64 },
    #[error(
        "finite-difference probe left the map's domain at coordinate {index} \
         (offset {offset:+e}): {reason}"
    )]
    ProbeDeparture {
        index: usize,
        offset: f64,
        reason: String,
    },
}

/// Failures of Newton refinement for fixed points and related solves.
#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Flight(#[from] FlightError),
    #[error("Newton iteration did not converge after {iters} iterations (residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },
}

/// Failures in slab construction, cone certification, shadowing and
/// conjugacy checks.
#[derive(Debug, Error)]
pub enum HorseshoeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Flight(#[from] FlightError),
    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),
    #[error("slab {ell} residency scan found {found} resident fixed points, expected 2")]
    ResidencyCount { ell: usize, found: usize },
    #[error("fixed point {ell} required by the slab did not converge")]
    MissingFixedPoint { ell: usize },
    #[error("constraint derivative along ξ too small at w(-): |{value:e}| < {min:e}")]
    XiDerivativeTooSmall { value: f64, min: f64 },
    #[error("word of length {len} exceeds the maximum shadowable length {max}")]
    WordTooLong { len: usize, max: usize },
    #[error("empty strip intersection at depth {depth} while shadowing `{word}`")]
    EmptyIntersection { depth: usize, word: String },
    #[error(
        "shadow point itinerary mismatch at step {step} of `{word}`: expected {expected}, got {got}"
    )]
    ItineraryMismatch {
        word: String,
        step: i64,
        expected: String,
        got: String,
    },
    #[error("shift of a word with empty future is undefined")]
    EmptyFuture,
    #[error("backward Newton inversion failed at depth {depth}: {reason}")]
    InversionFailed { depth: usize, reason: String },
}
