use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variant names double as the stable diagnostic names printed by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:.3e} below -{tolerance:.3e})")]
    NotPositiveSemiDefinite { eigenvalue: f64, tolerance: f64 },
    #[error("no eigenvalue above the rank tolerance {tolerance:.3e}")]
    RankZero { tolerance: f64 },
    #[error("rank-one downdate is not PSD: b'D^-1 b = {beta}")]
    DowndateNotPsd { beta: f64 },
    #[error("projection M·Sigma vanishes within tolerance")]
    ZeroProjection,
    #[error("direction is degenerate: w'Sigma w = {value:.3e}")]
    DegenerateDirection { value: f64 },
    #[error("projection M·Sigma·M' is not positive definite")]
    DegenerateProjection,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("spec violation: {0}")]
    SpecViolation(String),
    #[error("dimension {k} exceeds the naive sampler limit {limit}")]
    DimensionGuard { k: usize, limit: usize },
    #[error("quadrature did not converge within {subdivisions} subdivisions (error estimate {error:.3e})")]
    QuadratureNonConvergence { subdivisions: usize, error: f64 },
    #[error("Omega(zeta) is ill-conditioned at zeta = {zeta}")]
    IllConditioned { zeta: f64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("sample has zero spread")]
    DegenerateSample,
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("concentration c must be positive, got {0}")]
    ZeroConcentration(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable name of the variant, used on the CLI diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotPositiveSemiDefinite { .. } => "NotPositiveSemiDefinite",
            Error::RankZero { .. } => "RankZero",
            Error::DowndateNotPsd { .. } => "DowndateNotPSD",
            Error::ZeroProjection => "ZeroProjection",
            Error::DegenerateDirection { .. } => "DegenerateDirection",
            Error::DegenerateProjection => "DegenerateProjection",
            Error::NumericalBreakdown(_) => "NumericalBreakdown",
            Error::SpecViolation(_) => "SpecViolation",
            Error::DimensionGuard { .. } => "DimensionGuard",
            Error::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::EmptySample => "EmptySample",
            Error::DegenerateSample => "DegenerateSample",
            Error::DomainError(_) => "DomainError",
            Error::ZeroConcentration(_) => "ZeroConcentration",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
