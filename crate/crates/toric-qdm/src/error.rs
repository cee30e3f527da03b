//! Crate-wide error type.
//!
//! Every fallible public operation returns [`Result`]. Errors are diagnostic:
//! they carry a human-readable description of what failed and where, and are
//! not meant to be matched on beyond the variant level.

use thiserror::Error;

/// Errors produced by the workbench.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Division of exact scalars by zero.
    #[error("division by zero")]
    DivisionByZero,

    /// A substitution sent the denominator of a rational function to zero.
    #[error("pole at substitution: {0}")]
    PoleAtSubstitution(String),

    /// Two series or matrices live on incompatible variable schemes.
    #[error("variable scheme mismatch: {0}")]
    SchemeMismatch(String),

    /// Dimensions or ranks disagree (matrix shapes, basis sizes, …).
    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    /// A requested coefficient lies beyond the stored truncation order.
    #[error("truncation too low: {0}")]
    TruncationTooLow(String),

    /// A square integer matrix that must be invertible is singular.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// The convexity test failed: some entry of an inverse fixed-point block
    /// is negative, so a required cone condition does not hold.
    #[error("nefness violation: {0}")]
    NefnessViolation(String),

    /// A structural assumption of the pipeline is violated by the input.
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    /// A fixed-point index is out of range or not in the configured set.
    #[error("unknown fixed point: {0}")]
    UnknownFixedPoint(String),

    /// An equivariant Euler class has no invertible scalar part.
    #[error("non-invertible Euler class: {0}")]
    NonInvertibleEuler(String),

    /// A derivative of base data in a direction the base tables do not carry.
    #[error("missing base derivative: {0}")]
    MissingBaseDerivative(String),

    /// A `z`-window operation needs coefficients outside the exact window.
    #[error("z-window overflow: {0}")]
    WindowOverflow(String),

    /// A mirror chart requires a fractional exponent on a coordinate.
    #[error("non-integral exponent: {0}")]
    NonIntegralExponent(String),

    /// A linear system that must have a unique solution is singular.
    #[error("singular linear solve: {0}")]
    SingularLinearSolve(String),

    /// A jet of the superpotential was requested beyond the computed order.
    #[error("jet order too low: {0}")]
    JetOrderTooLow(String),

    /// Numeric torus parameters are degenerate (coincident or zero where
    /// distinctness is required).
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    /// A series inversion needs an invertible leading term and has none.
    #[error("non-invertible leading term: {0}")]
    NonInvertibleLeadingTerm(String),

    /// A factorization produced a prefactor that disagrees with the expected
    /// closed form.
    #[error("prefactor mismatch: {0}")]
    PrefactorMismatch(String),

    /// The gauge-transformed connection failed to be `z`-independent.
    #[error("z-dependence residual: {0}")]
    ZDependenceResidual(String),

    /// Reversion (functional inversion) of a coordinate change failed.
    #[error("reversion failure: {0}")]
    ReversionFailure(String),

    /// Malformed run configuration.
    #[error("config error: {0}")]
    ConfigError(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
