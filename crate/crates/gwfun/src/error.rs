//! Crate-wide error type.
//!
//! Every fallible operation returns `Result<T>`; validation failures are
//! distinguished from numerical failures so the CLI can map them onto
//! different exit codes (2 for bad input, 3 for a numerical breach).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GwError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GwError {
    #[error("offspring mean is {mean}, not 1 (criticality is required)")]
    NotCritical { mean: f64 },
    #[error("offspring variance is zero; the distribution is degenerate")]
    DegenerateVariance,
    #[error("pmf entry for k={k} is negative ({p})")]
    NegativeMass { k: u32, p: f64 },
    #[error("pmf sums to {sum}, not 1")]
    MassNotNormalized { sum: f64 },
    #[error("pgf evaluation point lies outside the closed unit disc (|w| = {modulus})")]
    OutsideDisc { modulus: f64 },
    #[error("log-gamma pole at nonpositive integer {re}")]
    PoleAtNonpositiveInteger { re: f64 },
    #[error("zeta pole at s = 1")]
    PoleAtOne,
    #[error("polylog weight expansion is invalid at positive integer alpha")]
    IntegerAlphaOnExpansionBranch,
    #[error("argument outside the valid domain: {what}")]
    OutsideDomain { what: &'static str },
    #[error("parameter outside the validity region: {what}")]
    DomainError { what: &'static str },
    #[error("adaptive quadrature failed to reach the requested tolerance")]
    QuadratureNonconvergence,
    #[error("series failed to converge within the term cap")]
    NotConverged,
    #[error("no closed form tabulated for this distribution/order")]
    NotTabulated,
    #[error("tree size {n} is unreachable for this offspring distribution")]
    UnreachableSize { n: u64 },
    #[error("requested size exceeds the capacity budget for custom distributions")]
    CapacityExceeded,
    #[error("operation supports preset distributions only")]
    CustomNotSupported,
    #[error("evaluation at the pole alpha = 1/2")]
    PoleAtHalf,
    #[error("gamma pole at nonpositive integer argument in a moment coefficient")]
    GammaPole,
    #[error("centered moments require 0 < Re(alpha) < 1/2")]
    CenteredRequiresSubcriticalAlpha,
    #[error("series reciprocal requires a nonzero leading coefficient")]
    DivisionByZeroLeadingCoefficient,
    #[error("the imaginary-axis variance formula is undefined at t = 0")]
    ZeroT,
}
