//! Moments and related constants of the distributional limits.
//!
//! After scaling by n^{-alpha-1/2}, the subtree-size functional converges to
//! a limit Y(alpha) whose integer moments satisfy a quadratic recursion in
//! the moment order. [`kappa`] evaluates that recursion either directly or
//! through a gamma-normalized variant whose coefficients stay O(1) at large
//! order; [`kappa_mixed`] extends the normalized form to joint moments in
//! two exponents. [`centered_variance`] packages the variance of the
//! centered limit including its continuous value at the pole alpha = 1/2,
//! [`yinf_moment`] gives the moments of the almost-sure limit of the shape
//! functional, and [`alpha_to_zero_law`] and [`alpha_to_imag_var`] give the
//! normal laws at the boundary regimes alpha -> 0 and alpha -> i t.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{GwError, Result};
use crate::specfun::{gamma, gamma_ratio, log_gamma};

/// Which form of the moment recursion produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Direct recursion on the moments themselves.
    KK,
    /// Recursion on gamma-normalized coefficients, with the normalizing
    /// gamma factor divided back out at the end. The normalized
    /// coefficients grow factorially but the recursion weights stay O(1),
    /// which keeps the route stable at large order.
    KKKNormalized,
}

/// A limit moment E[Y(alpha)^ell1 Y(alpha2)^ell2] and the route that
/// produced it. `alpha2` is `None` for pure single-exponent moments.
#[derive(Clone, Copy, Debug)]
pub struct LimitMoment {
    pub alpha: Complex64,
    pub alpha2: Option<Complex64>,
    pub ell1: u32,
    pub ell2: u32,
    pub value: Complex64,
    pub route: Route,
}

// Exact bit patterns; no fuzzy cache hits. NaN payloads and signed zeros
// hash as distinct keys, which is harmless.
type AlphaKey = (u64, u64);

fn alpha_key(a: Complex64) -> AlphaKey {
    (a.re.to_bits(), a.im.to_bits())
}

thread_local! {
    // alpha -> ladder of kappa_1..kappa_L computed so far (direct route).
    static DIRECT: RefCell<HashMap<AlphaKey, Vec<Complex64>>> =
        RefCell::new(HashMap::new());
    // alpha -> ladder of normalized coefficients (hatted route).
    static HATTED: RefCell<HashMap<AlphaKey, Vec<Complex64>>> =
        RefCell::new(HashMap::new());
    // (alpha1, alpha2) -> rectangle of normalized joint coefficients.
    static MIXED: RefCell<HashMap<(AlphaKey, AlphaKey), HashMap<(u32, u32), Complex64>>> =
        RefCell::new(HashMap::new());
}

fn check_alpha(alpha: Complex64) -> Result<()> {
    if !(alpha.re > 0.0) {
        return Err(GwError::DomainError {
            what: "limit moments need Re alpha > 0",
        });
    }
    // Genuine pole of the uncentered moments; refuse the whole disc rather
    // than return huge values. centered_variance supplies the quantity that
    // stays continuous through 1/2.
    if (alpha - Complex64::new(0.5, 0.0)).norm() < 1e-8 {
        return Err(GwError::PoleAtHalf);
    }
    Ok(())
}

fn lg(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map_err(|_| GwError::GammaPole)
}

fn g(z: Complex64) -> Result<Complex64> {
    gamma(z).map_err(|_| GwError::GammaPole)
}

fn gr(a: Complex64, b: Complex64) -> Result<Complex64> {
    gamma_ratio(a, b).map_err(|_| GwError::GammaPole)
}

/// Gamma(a) Gamma(b) / Gamma(c) in log space.
fn gamma_ratio3(a: Complex64, b: Complex64, c: Complex64) -> Result<Complex64> {
    Ok((lg(a)? + lg(b)? - lg(c)?).exp())
}

/// Binomial coefficient as f64, exact for the orders used here.
fn binom(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

fn re_c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

// Direct route. kappa_1 = Gamma(alpha - 1/2) / (sqrt(2) Gamma(alpha)); for
// l >= 2, with a' = alpha + 1/2,
//   kappa_l = l Gamma(l a' - 1) / (sqrt(2) Gamma(l a' - 1/2)) kappa_{l-1}
//     + (4 sqrt(pi))^{-1} sum_{j=1}^{l-1} C(l,j)
//         Gamma(j a' - 1/2) Gamma((l-j) a' - 1/2) / Gamma(l a' - 1/2)
//         kappa_j kappa_{l-j}.
fn extend_direct(alpha: Complex64, ell: u32, ladder: &mut Vec<Complex64>) -> Result<()> {
    let ap = alpha + re_c(0.5);
    if ladder.is_empty() {
        ladder.push(gr(alpha - re_c(0.5), alpha)? / SQRT_2);
    }
    let quarter_rpi = 0.25 / PI.sqrt();
    while (ladder.len() as u32) < ell {
        let l = ladder.len() as u32 + 1;
        let lf = l as f64;
        let la = ap * lf;
        let drift = gr(la - re_c(1.0), la - re_c(0.5))? * (lf / SQRT_2)
            * ladder[l as usize - 2];
        let mut pair = Complex64::new(0.0, 0.0);
        for j in 1..l {
            let jf = j as f64;
            pair += gamma_ratio3(ap * jf - re_c(0.5), ap * (lf - jf) - re_c(0.5), la - re_c(0.5))?
                * binom(l, j)
                * ladder[j as usize - 1]
                * ladder[(l - j) as usize - 1];
        }
        ladder.push(drift + pair * quarter_rpi);
    }
    Ok(())
}

fn kappa_direct(alpha: Complex64, ell: u32) -> Result<Complex64> {
    DIRECT.with(|m| {
        let mut map = m.borrow_mut();
        let ladder = map.entry(alpha_key(alpha)).or_default();
        extend_direct(alpha, ell, ladder)?;
        Ok(ladder[ell as usize - 1])
    })
}

// Normalized route. hat_1 = Gamma(alpha - 1/2) / (2 sqrt(pi)); for l >= 2,
//   hat_l = 2^{-3/2} sum_{j=1}^{l-1} C(l,j) hat_j hat_{l-j}
//     + 2^{-1/2} l Gamma(l a' - 1) / Gamma((l-1) a' - 1/2) hat_{l-1},
// and kappa_l = sqrt(2 pi) / Gamma(l a' - 1/2) hat_l.
fn extend_hatted(alpha: Complex64, ell: u32, ladder: &mut Vec<Complex64>) -> Result<()> {
    let ap = alpha + re_c(0.5);
    if ladder.is_empty() {
        ladder.push(g(alpha - re_c(0.5))? / (2.0 * PI.sqrt()));
    }
    while (ladder.len() as u32) < ell {
        let l = ladder.len() as u32 + 1;
        let lf = l as f64;
        let mut pair = Complex64::new(0.0, 0.0);
        for j in 1..l {
            pair += binom(l, j) * ladder[j as usize - 1] * ladder[(l - j) as usize - 1];
        }
        let drift = gr(ap * lf - re_c(1.0), ap * (lf - 1.0) - re_c(0.5))?
            * (lf / SQRT_2)
            * ladder[l as usize - 2];
        ladder.push(pair * 0.5 / SQRT_2 + drift);
    }
    Ok(())
}

fn kappa_hat_memo(alpha: Complex64, ell: u32) -> Result<Complex64> {
    HATTED.with(|m| {
        let mut map = m.borrow_mut();
        let ladder = map.entry(alpha_key(alpha)).or_default();
        extend_hatted(alpha, ell, ladder)?;
        Ok(ladder[ell as usize - 1])
    })
}

/// Normalized moment coefficient of the limit law, order `ell`.
///
/// The plain moment is `sqrt(2 pi) / Gamma(ell (alpha + 1/2) - 1/2)` times
/// this value.
pub fn kappa_hat(alpha: Complex64, ell: u32) -> Result<Complex64> {
    if ell == 0 {
        return Err(GwError::DomainError {
            what: "kappa_hat needs ell >= 1",
        });
    }
    check_alpha(alpha)?;
    kappa_hat_memo(alpha, ell)
}

/// `E Y(alpha)^ell` with an explicit choice of recursion route.
pub fn kappa_routed(alpha: Complex64, ell: u32, route: Route) -> Result<LimitMoment> {
    if ell == 0 {
        return Err(GwError::DomainError {
            what: "kappa needs ell >= 1",
        });
    }
    check_alpha(alpha)?;
    let value = match route {
        Route::KK => kappa_direct(alpha, ell)?,
        Route::KKKNormalized => {
            let ap = alpha + re_c(0.5);
            let hat = kappa_hat_memo(alpha, ell)?;
            hat * (2.0 * PI).sqrt() * (-lg(ap * ell as f64 - re_c(0.5))?).exp()
        }
    };
    Ok(LimitMoment {
        alpha,
        alpha2: None,
        ell1: ell,
        ell2: 0,
        value,
        route,
    })
}

/// `E Y(alpha)^ell`, the moment of order `ell` of the limit law.
pub fn kappa(alpha: Complex64, ell: u32) -> Result<Complex64> {
    Ok(kappa_routed(alpha, ell, Route::KK)?.value)
}

// Joint normalized coefficients. Base cells are the one-exponent hat_1
// values; for l1 + l2 >= 2, with L = l1 a1' + l2 a2',
//   hat_{l1,l2} = 2^{-3/2} sum_{0 < j1+j2 < l1+l2} C(l1,j1) C(l2,j2)
//                   hat_{j1,j2} hat_{l1-j1,l2-j2}
//     + 2^{-1/2} l1 Gamma(L-1)/Gamma(L-1-alpha1) hat_{l1-1,l2}
//     + 2^{-1/2} l2 Gamma(L-1)/Gamma(L-1-alpha2) hat_{l1,l2-1}.
// With l2 = 0 this is cell for cell the one-exponent recursion.
fn fill_mixed(
    a1: Complex64,
    a2: Complex64,
    l1: u32,
    l2: u32,
    tbl: &mut HashMap<(u32, u32), Complex64>,
) -> Result<()> {
    let ap1 = a1 + re_c(0.5);
    let ap2 = a2 + re_c(0.5);
    for tot in 1..=(l1 + l2) {
        for i in tot.saturating_sub(l2)..=tot.min(l1) {
            let j = tot - i;
            if tbl.contains_key(&(i, j)) {
                continue;
            }
            let v = if tot == 1 {
                if i == 1 {
                    g(a1 - re_c(0.5))? / (2.0 * PI.sqrt())
                } else {
                    g(a2 - re_c(0.5))? / (2.0 * PI.sqrt())
                }
            } else {
                let big_l = ap1 * i as f64 + ap2 * j as f64;
                let mut pair = Complex64::new(0.0, 0.0);
                for j1 in 0..=i {
                    for j2 in 0..=j {
                        if j1 + j2 == 0 || j1 + j2 == tot {
                            continue;
                        }
                        pair += binom(i, j1)
                            * binom(j, j2)
                            * tbl[&(j1, j2)]
                            * tbl[&(i - j1, j - j2)];
                    }
                }
                let mut v = pair * 0.5 / SQRT_2;
                if i >= 1 {
                    v += gr(big_l - re_c(1.0), big_l - re_c(1.0) - a1)?
                        * (i as f64 / SQRT_2)
                        * tbl[&(i - 1, j)];
                }
                if j >= 1 {
                    v += gr(big_l - re_c(1.0), big_l - re_c(1.0) - a2)?
                        * (j as f64 / SQRT_2)
                        * tbl[&(i, j - 1)];
                }
                v
            };
            tbl.insert((i, j), v);
        }
    }
    Ok(())
}

/// Joint normalized moment coefficient in two exponents.
pub fn kappa_hat_mixed(
    alpha1: Complex64,
    alpha2: Complex64,
    ell1: u32,
    ell2: u32,
) -> Result<Complex64> {
    if ell1 + ell2 == 0 {
        return Err(GwError::DomainError {
            what: "kappa_hat_mixed needs ell1 + ell2 >= 1",
        });
    }
    check_alpha(alpha1)?;
    check_alpha(alpha2)?;
    MIXED.with(|m| {
        let mut map = m.borrow_mut();
        let tbl = map
            .entry((alpha_key(alpha1), alpha_key(alpha2)))
            .or_default();
        fill_mixed(alpha1, alpha2, ell1, ell2, tbl)?;
        Ok(tbl[&(ell1, ell2)])
    })
}

/// `E[Y(alpha1)^ell1 Y(alpha2)^ell2]` as a [`LimitMoment`].
pub fn mixed_moment(
    alpha1: Complex64,
    alpha2: Complex64,
    ell1: u32,
    ell2: u32,
) -> Result<LimitMoment> {
    let hat = kappa_hat_mixed(alpha1, alpha2, ell1, ell2)?;
    let big_l = (alpha1 + re_c(0.5)) * ell1 as f64 + (alpha2 + re_c(0.5)) * ell2 as f64;
    let value = hat * (2.0 * PI).sqrt() * (-lg(big_l - re_c(0.5))?).exp();
    Ok(LimitMoment {
        alpha: alpha1,
        alpha2: Some(alpha2),
        ell1,
        ell2,
        value,
        route: Route::KKKNormalized,
    })
}

/// `E[Y(alpha1)^ell1 Y(alpha2)^ell2]`, the joint moment of the limit law at
/// two exponents. With `ell2 = 0` it reproduces [`kappa`].
pub fn kappa_mixed(
    alpha1: Complex64,
    alpha2: Complex64,
    ell1: u32,
    ell2: u32,
) -> Result<Complex64> {
    Ok(mixed_moment(alpha1, alpha2, ell1, ell2)?.value)
}

/// `E (Y(alpha) - E Y(alpha))^ell`, expanded binomially in the plain
/// moments.
pub fn centered_moment(alpha: Complex64, ell: u32) -> Result<Complex64> {
    check_alpha(alpha)?;
    if ell == 0 {
        return Ok(re_c(1.0));
    }
    let k1 = kappa_direct(alpha, 1)?;
    let mut acc = (-k1).powu(ell);
    for j in 1..=ell {
        acc += binom(ell, j) * kappa_direct(alpha, j)? * (-k1).powu(ell - j);
    }
    Ok(acc)
}

/// Variance of the centered limit, `kappa_2 - kappa_1^2`, continued through
/// the pole: within the refusal disc around alpha = 1/2 it returns the
/// closed constant 4 log 2 / pi - pi / 4 of the limit at 1/2 itself.
pub fn centered_variance(alpha: Complex64) -> Result<Complex64> {
    if !(alpha.re > 0.0) {
        return Err(GwError::DomainError {
            what: "centered_variance needs Re alpha > 0",
        });
    }
    if (alpha - re_c(0.5)).norm() < 1e-8 {
        return Ok(re_c(4.0 * LN_2 / PI - PI / 4.0));
    }
    let k1 = kappa_direct(alpha, 1)?;
    Ok(kappa_direct(alpha, 2)? - k1 * k1)
}

/// `E Y_inf^r = 2^{-r/2} sqrt(Gamma(r + 1))` for the almost-sure limit of
/// the shape functional, valid for Re r > -1.
pub fn yinf_moment(r: Complex64) -> Result<Complex64> {
    if !(r.re > -1.0) {
        return Err(GwError::DomainError {
            what: "yinf_moment needs Re r > -1",
        });
    }
    Ok(((lg(r + re_c(1.0))? - r * LN_2) * 0.5).exp())
}

/// Covariance matrix of the bivariate normal limit of the rescaled real and
/// imaginary parts as alpha -> 0 along the ray of angle `theta`:
/// diag[(1 - log 2)(sec theta + 1), (1 - log 2)(sec theta - 1)].
pub fn alpha_to_zero_law(theta: f64) -> Result<[[f64; 2]; 2]> {
    if !(theta.abs() < PI / 2.0) {
        return Err(GwError::DomainError {
            what: "alpha_to_zero_law needs |theta| < pi/2",
        });
    }
    let c = 1.0 - LN_2;
    let sec = 1.0 / theta.cos();
    Ok([[c * (sec + 1.0), 0.0], [0.0, c * (sec - 1.0)]])
}

/// `E |zeta|^2` of the symmetric complex normal limit on the imaginary
/// axis: (2 sqrt(pi))^{-1} Re[Gamma(i t - 1/2) / Gamma(i t)], positive for
/// every t != 0. This is the a -> 0 limit of a E|Y(a + i t)|^2, matching
/// the drift terms of the joint recursion; see the limit test below.
pub fn alpha_to_imag_var(t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(GwError::ZeroT);
    }
    let it = Complex64::new(0.0, t);
    let ratio = gr(it - re_c(0.5), it)?;
    let v = ratio.re / (2.0 * PI.sqrt());
    debug_assert!(v > 0.0);
    Ok(v)
}
