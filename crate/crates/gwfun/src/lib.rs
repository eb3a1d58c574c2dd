//! Computational toolkit for additive functionals X_n(alpha), the sum of
//! |T_v|^alpha over subtrees of a conditioned Galton-Watson tree: exact
//! finite-n laws, asymptotic descriptions, limit moments, and Monte Carlo
//! samplers for both trees and Brownian-excursion functionals.

pub mod enumerate;
pub mod error;
pub mod exact;
pub mod excursion;
pub mod genfunc;
pub mod limits;
pub mod offspring;
pub mod sampler;
pub mod specfun;
pub mod stats;

pub use error::{GwError, Result};

/// Shorthand for the complex scalar used throughout.
pub type C64 = num_complex::Complex64;
