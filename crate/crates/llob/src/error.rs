use thiserror::Error;

/// Errors shared by every solver module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("transaction current inconsistent with (lam, nu, D): J={j}, lam/gamma={lam_over_gamma}")]
    InconsistentCurrent { j: f64, lam_over_gamma: f64 },

    #[error("invalid sensitivity distribution: {0}")]
    InvalidDistribution(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid trading schedule: {0}")]
    InvalidSchedule(String),

    #[error("deposition integral does not converge")]
    DivergentDeposition,

    #[error("price left the grid interior at t={t}")]
    PriceEscapedGrid { t: f64 },

    #[error("no zero crossing of the book in the scan window")]
    NoZeroCrossing,

    #[error("more than one zero crossing of the book in the scan window")]
    NonUniqueZeroCrossing,

    #[error("cumulative book volume inside the grid is below the requested {q}")]
    InsufficientDepth { q: f64 },

    #[error("fixed-point iteration failed to converge at t={t} (residual {residual})")]
    FixedPointDivergence { t: f64, residual: f64 },

    #[error("root bracketing failed in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("quadrature failed to reach the requested tolerance")]
    QuadratureFailure,

    #[error("root finding failed: {0}")]
    RootFindFailure(String),

    #[error("price did not return to zero within the horizon")]
    NoReturnWithinHorizon,

    #[error("price velocity is zero; expansion undefined")]
    StationaryPriceSingularity,

    #[error("trading intensity changes sign; expansion requires a one-signed schedule")]
    SignChange,

    #[error("first-order radicand is negative at t={t}; expansion out of validity")]
    NegativeRadicand { t: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
