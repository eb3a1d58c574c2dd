//! Truncated-series engine for exact moments of additive functionals:
//! the tree-size generating function, Hadamard toll products, and the
//! root-degree recursion for E[F(T_n)^l] and mixed moments.

pub mod moments;
pub mod series;

pub use moments::{
    mixed_moment_series, moment_series, y_series, MomentTable, Provenance,
};
pub use series::{series_hadamard, series_mul, series_zlogderiv, TruncSeries};
