//! Exact discrete probability for conditioned trees: lattice diagonals,
//! the size law, the exact mean of X_n(alpha), and the mu(alpha) family.

mod ballot;
mod mean;
mod mu;
pub mod quad;

pub use ballot::{tree_size_pmf, BallotTable, TableMethod};
pub use mean::{
    c_half_constant, mean_asymptotic, mean_xn, mean_xn_with, mu_partial, MeanAsymptotic, Regime,
};
pub use mu::{
    closed_form_range, mu_closed_form, mu_continued, mu_integral, mu_series, MuMethod, MuValue,
};


use num_complex::Complex64;

/// k^e for positive real k and complex exponent e.
pub(crate) fn powc(k: f64, e: Complex64) -> Complex64 {
    (e * k.ln()).exp()
}
