use crate::market::ValidationReport;

/// Errors produced by universe construction, the SPD solver, and the
/// closed-form portfolio and curve operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An SPD factorization hit a pivot that is zero, negative, or non-finite.
    #[error("matrix is not positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// A vector or matrix dimension does not match the universe.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A universe failed invariant validation.
    #[error("invalid universe: {0}")]
    InvalidUniverse(ValidationReport),

    /// D = AC - B^2 is indistinguishable from zero (expected returns are
    /// proportional to the ones vector), so the efficient set degenerates
    /// to a single portfolio.
    #[error("degenerate universe: D = {d:.3e} is below the threshold {threshold:.3e} (mu proportional to ones)")]
    DegenerateD { d: f64, threshold: f64 },

    /// The Sharpe radicand C*mu_f^2 - 2*B*mu_f + A is not positive.
    #[error("degenerate Sharpe scalar: radicand {radicand:.3e} <= 0 at mu_f = {mu_f}")]
    DegenerateSharpe { radicand: f64, mu_f: f64 },

    /// The risk-free rate coincides with the return of the global
    /// minimum-variance portfolio (B/C), so the tangent portfolio is undefined.
    #[error("tangent portfolio undefined: mu_f = {mu_f} is at the minimum-variance return B/C = {gmv_return}")]
    TangentUndefined { mu_f: f64, gmv_return: f64 },

    /// Risk aversion must be strictly positive.
    #[error("risk aversion gamma must be > 0, got {gamma}")]
    NonPositiveGamma { gamma: f64 },

    /// A variance-plane abscissa lies below the curve's domain minimum.
    #[error("variance {variance} is below the attainable minimum {minimum}")]
    VarianceBelowMinimum { variance: f64, minimum: f64 },

    /// A variance-plane derivative was requested at or below the domain
    /// boundary, where the curve has infinite slope.
    #[error("derivative undefined at variance {point}: square-root singularity at the domain boundary {minimum}")]
    BoundarySingularity { point: f64, minimum: f64 },

    /// Too few observations to estimate an SPD covariance (needs T >= N+1).
    #[error("insufficient data: {observations} observations for {assets} assets (need at least {})", assets + 1)]
    InsufficientData { observations: usize, assets: usize },

    /// The sample covariance of the observations is not positive definite.
    #[error("degenerate sample: covariance of the observations is not positive definite")]
    DegenerateSample,

    /// Malformed input (shape, finiteness, or file content).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Underlying I/O failure while reading or writing a file.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
