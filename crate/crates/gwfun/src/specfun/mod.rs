//! Special functions underpinning the exact and asymptotic layers.
//!
//! Everything is hand-rolled on `f64`/`Complex64`: log-gamma and digamma
//! (Lanczos plus reflection), Hurwitz/Riemann zeta (Euler-Maclaurin plus
//! functional equations), and the polylogarithm (series plus the expansion
//! around the logarithmic singularity).

mod gamma;
mod polylog;
mod zeta;

pub use gamma::{digamma, gamma, gamma_ratio, log_gamma};
pub(crate) use gamma::ln_gamma_real;
pub use polylog::polylog;
pub use zeta::zeta;
pub(crate) use zeta::hurwitz_core;
