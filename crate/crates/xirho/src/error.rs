//! Error types shared across the crate.

use thiserror::Error;

/// Errors from parsing a copula specification string.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unknown copula family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` is missing required parameter `{param}`")]
    MissingParam { family: String, param: String },
    #[error("parameter `{param}`={value} out of range for family `{family}`: {constraint}")]
    ParamOutOfRange {
        family: String,
        param: String,
        value: f64,
        constraint: String,
    },
    #[error("malformed parameter token `{0}`, expected key=value")]
    MalformedParam(String),
}

/// Errors from the shared numerical kernels.
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
}

/// Errors from measure computation and estimation.
#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("quadrature error estimate {err:.3e} exceeds requested tolerance {tol:.3e}")]
    QuadratureNotConverged { err: f64, tol: f64 },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("rank vector has zero variance")]
    ZeroVariance,
    #[error("conditional quantile inversion failed at t={t}, w={w}")]
    InversionFailed { t: f64, w: f64 },
    #[error("numeric overflow evaluating copula at extreme parameters")]
    NumericOverflow,
    #[error("measure value {value} outside its range by more than round-off")]
    OutOfRange { value: f64 },
}

/// Errors from grid construction and Schur-order machinery.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid row {row} mean deviates from its level by {dev:.3e} (limit {limit:.3e})")]
    GridInconsistent { row: usize, dev: f64, limit: f64 },
    #[error("grid dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// Errors from region geometry and attainment.
#[derive(Debug, Error)]
pub enum RegionError {
    #[error("argument {0} outside the function domain")]
    DomainError(f64),
    #[error("target (xi={xi}, rho={rho}) lies outside the attainable region")]
    NotInRegion { xi: f64, rho: f64 },
    #[error("bisection on the shuffle parameter failed to bracket the target")]
    BisectionFailed,
}

/// Errors from the discrete optimization oracle.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("xi budget c={c} outside the achievable discrete range [{lo:.6}, {hi:.6}]")]
    InfeasibleBudget { c: f64, lo: f64, hi: f64 },
    #[error("failed to bracket the row multiplier for v={v}")]
    BracketFailed { v: f64 },
    #[error("alternating projection did not converge within {sweeps} sweeps")]
    ProjectionNotConverged { sweeps: usize },
}
