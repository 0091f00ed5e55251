use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Precision problems are split in two: `PrecisionLoss` means an individual
/// computation ran into the truncation boundary and its result cannot be
/// certified; `PrecisionUndecidable` means two runs at different precision
/// disagreed, so the question itself is out of reach at the configured N.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },

    #[error("exponent denominator {denom} is not a power of p = {p}")]
    NotPPowerDenominator { denom: i64, p: u32 },

    #[error("exponent {exp} needs denominator beyond p^k = {p}^{k}")]
    DepthExceeded { exp: String, p: u32, k: u32 },

    #[error("exponent {exp} is at or above the precision bound N = {n}")]
    PrecisionExceeded { exp: String, n: u32 },

    #[error("exponent {exp} is below the representable floor {floor}")]
    FloorExceeded { exp: String, floor: i64 },

    #[error("ring configurations do not match: {0}")]
    ConfigMismatch(String),

    #[error("invalid ring configuration: {0}")]
    InvalidConfig(String),

    #[error("element is not invertible")]
    NotInvertible,

    #[error("cannot compare a below-precision value with 2^-({exp}) at precision {n}")]
    IncomparableAtPrecision { exp: String, n: u32 },

    #[error("decision depends on coefficients beyond the precision bound: {0}")]
    PrecisionLoss(String),

    #[error("results at precision N and 2N disagree: {0}")]
    PrecisionUndecidable(String),

    #[error("vector does not lie in the inverted-uniformizer span of the lattice")]
    NotInSpan,

    #[error("lattices are not commensurable within the precision window")]
    NotCommensurable,

    #[error("map is not injective on spans")]
    NotInjective,

    #[error("map does not send the source span into the target span")]
    MapNotSpanPreserving,

    #[error("operation `{op}` requires a single-factor ring")]
    UnsupportedProductRing { op: &'static str },

    #[error("operation `{op}` is not defined for this coefficient ring")]
    UnsupportedCoefficientRing { op: &'static str },

    #[error("depth {depth} is below the configured level k = {k}")]
    InvalidDepth { depth: u32, k: u32 },

    #[error("decomposition budget {budget} exceeded: {msg}")]
    BudgetExceeded { budget: usize, msg: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
