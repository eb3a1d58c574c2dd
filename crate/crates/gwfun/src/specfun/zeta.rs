//! Hurwitz and Riemann zeta via Euler-Maclaurin summation.
//!
//! The core evaluates zeta(s, a) for Re s > -2 with a truncated partial sum
//! and twelve Bernoulli correction terms sized so the truncation error stays
//! below 1e-13 for |Im s| <= 50. Deeper into the left half plane the
//! functional equation takes over: the Riemann case is assembled in log
//! space (the gamma factor alone can overflow long before the product does),
//! and the Hurwitz case uses the periodic zeta expansion.

use num_complex::Complex64;

use super::gamma::log_gamma_unchecked;
use crate::error::{GwError, Result};

const LN_2PI: f64 = 1.8378770664093455; // ln(2 pi)

// B_{2j}/(2j)! for j = 1..12.
const EM_COEF: [f64; 12] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1124000727777607680000.0,
    -236364091.0 / 2730.0 / 620448401733239439360000.0,
];

/// zeta(s, a) for real shift a in (0, 1]; a = 1 is the Riemann zeta.
///
/// Absolute error <= 1e-12 for Re s >= 0 and |Im s| <= 50. On -2 <= Re s < 0
/// the Euler-Maclaurin partial sum grows like w^{1-Re s} while the value
/// stays O(1), so the achievable absolute error degrades to roughly
/// eps * w^{1-Re s}, about 1e-11 at the Re s = -2 handover. Further left the
/// functional equation takes over and accuracy is relative again.
pub fn zeta(s: Complex64, a: f64) -> Result<Complex64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(GwError::OutsideDomain {
            what: "zeta shift a must lie in (0, 1]",
        });
    }
    if s == Complex64::new(1.0, 0.0) {
        return Err(GwError::PoleAtOne);
    }
    if s.re >= -2.0 {
        Ok(hurwitz_core(s, a))
    } else if a == 1.0 {
        Ok(match riemann_left_log(s) {
            Some(lg) => lg.exp(),
            None => Complex64::new(0.0, 0.0),
        })
    } else {
        hurwitz_left(s, a)
    }
}

/// Euler-Maclaurin evaluation; valid for any a > 0, accurate for Re s > -2.
///
/// Also used internally with large shifts (series tails), where the partial
/// sum is empty and only the correction terms remain.
pub(crate) fn hurwitz_core(s: Complex64, a: f64) -> Complex64 {
    debug_assert!(a > 0.0);
    let target = 24.0f64.max(1.3 * s.im.abs() + 8.0);
    let terms = ((target - a).ceil()).max(0.0) as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..terms {
        acc += (-s * (a + k as f64).ln()).exp();
    }
    let w = a + terms as f64;
    let lnw = w.ln();
    acc += (-(s - 1.0) * lnw).exp() / (s - 1.0);
    acc += 0.5 * (-s * lnw).exp();
    // Correction terms: B_{2j}/(2j)! * (s)_{2j-1} * w^{-s-2j+1}
    let winv2 = 1.0 / (w * w);
    let mut poch = s;
    let mut wpow = (-(s + 1.0) * lnw).exp();
    for (j, coef) in EM_COEF.iter().enumerate() {
        acc += *coef * poch * wpow;
        let base = s + (2 * j + 1) as f64;
        poch *= base * (base + 1.0);
        wpow *= winv2;
    }
    acc
}

/// log of zeta(s) for Re s < -2 via the functional equation; None when the
/// sine factor vanishes (trivial zeros).
pub(crate) fn riemann_left_log(s: Complex64) -> Option<Complex64> {
    let half_pi_s = s * (std::f64::consts::PI / 2.0);
    let sine = half_pi_s.sin();
    if sine == Complex64::new(0.0, 0.0) {
        return None;
    }
    let one_minus_s = Complex64::new(1.0, 0.0) - s;
    let z = hurwitz_core(one_minus_s, 1.0);
    Some(
        s * std::f64::consts::LN_2
            + (s - 1.0) * std::f64::consts::PI.ln()
            + sine.ln()
            + log_gamma_unchecked(one_minus_s)
            + z.ln(),
    )
}

/// Hurwitz functional equation for Re s < -2, 0 < a < 1:
/// zeta(s, a) = Gamma(1-s)/(2 pi)^{1-s} * [ e^{-i pi (1-s)/2} F(a, 1-s)
///                                        + e^{+i pi (1-s)/2} F(-a, 1-s) ]
/// with F(x, s) = sum_{n>=1} e^{2 pi i n x} n^{-s}.
fn hurwitz_left(s: Complex64, a: f64) -> Result<Complex64> {
    let sc = Complex64::new(1.0, 0.0) - s; // Re sc > 3
    let mut fp = Complex64::new(0.0, 0.0);
    let mut fm = Complex64::new(0.0, 0.0);
    let mut n = 1u64;
    loop {
        let ph = 2.0 * std::f64::consts::PI * a * n as f64;
        let rot = Complex64::new(ph.cos(), ph.sin());
        let mag = (-sc * (n as f64).ln()).exp();
        fp += rot * mag;
        fm += rot.conj() * mag;
        if mag.norm() < 1e-17 * (fp.norm() + fm.norm()).max(1e-30) {
            break;
        }
        n += 1;
        // Just below the Re s = -2 handover the terms decay like n^{-3},
        // which needs a few hundred thousand of them.
        if n > 2_000_000 {
            return Err(GwError::NotConverged);
        }
    }
    let quarter = Complex64::new(0.0, -std::f64::consts::FRAC_PI_2) * sc;
    let bracket = quarter.exp() * fp + (-quarter).exp() * fm;
    if bracket == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let log = log_gamma_unchecked(sc) - sc * LN_2PI + bracket.ln();
    Ok(log.exp())
}
