use std::fmt;

use thiserror::Error;

/// Which invertibility condition of a Newton matrix failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianDefect {
    /// `2 exp(xi_i) = a_i` for some index: a diagonal Hessian entry vanishes.
    ZeroDiagonal,
    /// `sum_i 1 / D_i = 0`: the bordered system is singular although `D` is regular.
    TraceCondition,
    /// The dense reduced Hessian was rejected by the pivoting solve.
    DenseSingular,
}

impl fmt::Display for HessianDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HessianDefect::ZeroDiagonal => "zero_diagonal",
            HessianDefect::TraceCondition => "trace_condition",
            HessianDefect::DenseSingular => "dense_singular",
        };
        f.write_str(s)
    }
}

/// Violated well-posedness condition of the sensitivity system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IllPosedReason {
    LambdaEqSigmaSq,
    LambdaEqPmSigmaProd,
    TraceZero,
}

impl fmt::Display for IllPosedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IllPosedReason::LambdaEqSigmaSq => "lambda_eq_sigma_sq",
            IllPosedReason::LambdaEqPmSigmaProd => "lambda_eq_pm_sigma_prod",
            IllPosedReason::TraceZero => "trace_zero",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("shape mismatch: expected {expected} values, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("division by zero: component {0} is zero")]
    DivisionByZero(usize),
    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("input matrix is singular")]
    SingularInput,
    #[error("negative determinant has no real root of even order {0}")]
    NoRealRoot(usize),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("path parameter {lambda} outside the domain (radicand {radicand:e})")]
    Domain { lambda: f64, radicand: f64 },
    #[error("no sign change on [{lo}, {hi}] after bracket expansion")]
    NoBracket { lo: f64, hi: f64 },
    #[error("invalid iterate: {0}")]
    InvalidIterate(String),
    #[error("singular Hessian ({0})")]
    SingularHessian(HessianDefect),
    #[error("ill-posed sensitivity system ({0})")]
    IllPosed(IllPosedReason),
    #[error("input has a non-positive component at index {0}")]
    NonPositiveInput(usize),
    #[error("grid search minimum lies on the boundary of the search box")]
    SpanTooSmall,
    #[error("projection is outside the differentiable regime: {0}")]
    DegenerateProjection(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
