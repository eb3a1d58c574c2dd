//! Polylogarithm Li_alpha(z) on the open unit disc.
//!
//! Two strategies: the defining series for |z| <= 0.75, and for z closer to
//! the unit circle the expansion around the logarithmic singularity,
//!
//!   Li_alpha(z) = Gamma(1-alpha) (-ln z)^{alpha-1}
//!               + sum_{n>=0} zeta(alpha - n) (ln z)^n / n!,
//!
//! valid for |ln z| < 2 pi and alpha not a positive integer. Deep zeta
//! arguments are combined with the n-th term in log space; the gamma factor
//! of the reflected zeta would otherwise overflow near the 200-term cap.

use num_complex::Complex64;

use super::gamma::{log_gamma_unchecked, ln_gamma_real};
use super::zeta::{hurwitz_core, riemann_left_log};
use crate::error::{GwError, Result};

const TERM_CUTOFF: f64 = 1e-16;
const EXPANSION_CAP: usize = 200;

fn is_positive_integer(a: Complex64) -> bool {
    a.im == 0.0 && a.re > 0.0 && a.re == a.re.floor()
}

/// Li_alpha(z) for |z| < 1.
pub fn polylog(alpha: Complex64, z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if r >= 1.0 {
        return Err(GwError::OutsideDomain {
            what: "polylog requires |z| < 1",
        });
    }
    if r <= 0.75 {
        polylog_series(alpha, z)
    } else {
        polylog_expansion(alpha, z)
    }
}

/// Defining series sum_{n>=1} z^n n^{-alpha}. Converges for any |z| < 1 but
/// is only fast away from the unit circle.
pub(crate) fn polylog_series(alpha: Complex64, z: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut zp = Complex64::new(1.0, 0.0);
    for n in 1..=100_000u64 {
        zp *= z;
        let term = zp * (-alpha * (n as f64).ln()).exp();
        acc += term;
        if term.norm() < TERM_CUTOFF * (1.0 + acc.norm()) {
            return Ok(acc);
        }
    }
    Err(GwError::NotConverged)
}

/// Expansion around z = 1 in powers of w = ln z.
pub(crate) fn polylog_expansion(alpha: Complex64, z: Complex64) -> Result<Complex64> {
    if is_positive_integer(alpha) {
        return Err(GwError::IntegerAlphaOnExpansionBranch);
    }
    let w = z.ln();
    debug_assert!(w.norm() < 2.0 * std::f64::consts::PI);
    let mut acc = (log_gamma_unchecked(Complex64::new(1.0, 0.0) - alpha)
        + (alpha - 1.0) * (-w).ln())
    .exp();
    let lnw = w.ln();
    let mut coef = Complex64::new(1.0, 0.0); // w^n / n!
    let mut small_streak = 0;
    for n in 0..EXPANSION_CAP {
        let s = alpha - n as f64;
        let term = if s.re >= -2.0 {
            hurwitz_core(s, 1.0) * coef
        } else {
            match riemann_left_log(s) {
                Some(lg) => (lg + (n as f64) * lnw - ln_gamma_real(n as f64 + 1.0)).exp(),
                None => Complex64::new(0.0, 0.0),
            }
        };
        acc += term;
        if term.norm() < TERM_CUTOFF * (1.0 + acc.norm()) {
            small_streak += 1;
            if small_streak >= 2 && n >= 4 {
                return Ok(acc);
            }
        } else {
            small_streak = 0;
        }
        coef = coef * w / (n as f64 + 1.0);
    }
    Err(GwError::NotConverged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_forms_on_series_branch() {
        // Li_1(1/2) = ln 2
        let li1 = polylog(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(li1.re, std::f64::consts::LN_2, epsilon = 1e-14);
        // Li_0(1/3) = (1/3)/(1 - 1/3) = 1/2
        let li0 = polylog(c(0.0, 0.0), c(1.0 / 3.0, 0.0)).unwrap();
        assert_abs_diff_eq!(li0.re, 0.5, epsilon = 1e-14);
        // Li_2(1/2) = pi^2/12 - ln^2(2)/2
        let li2 = polylog(c(2.0, 0.0), c(0.5, 0.0)).unwrap();
        let expect = std::f64::consts::PI * std::f64::consts::PI / 12.0
            - std::f64::consts::LN_2 * std::f64::consts::LN_2 / 2.0;
        assert_abs_diff_eq!(li2.re, expect, epsilon = 1e-13);
    }

    // Spec'd agreement band: both strategies evaluated on overlapping z for
    // random alpha with Re in [-3, 0.4].
    #[test]
    fn branches_agree_on_band()  {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let alpha = c(rng.random_range(-3.0..0.4), rng.random_range(-1.5..1.5));
            for &z in &[c(0.6, 0.0), c(0.7, 0.05), c(0.8, -0.1)] {
                let a = polylog_series(alpha, z).unwrap();
                let b = polylog_expansion(alpha, z).unwrap();
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn expansion_handles_deep_zeta_arguments() {
        // Forces reflected zeta values with arguments near -200.
        let v = polylog(c(-2.5, 0.5), c(0.9, 0.05)).unwrap();
        let s = polylog_series(c(-2.5, 0.5), c(0.9, 0.05)).unwrap();
        assert_abs_diff_eq!((v - s).norm() / s.norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn rejects_domain_violations() {
        assert!(matches!(
            polylog(c(0.5, 0.0), c(1.0, 0.0)),
            Err(GwError::OutsideDomain { .. })
        ));
        assert!(matches!(
            polylog_expansion(c(2.0, 0.0), c(0.9, 0.0)),
            Err(GwError::IntegerAlphaOnExpansionBranch)
        ));
        // Positive-integer alpha is fine on the series branch.
        assert!(polylog(c(2.0, 0.0), c(0.5, 0.0)).is_ok());
    }
}
