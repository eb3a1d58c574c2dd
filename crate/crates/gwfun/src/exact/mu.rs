//! The limit quantity mu(alpha) = Sum_{n>=1} n^{alpha-1} P(S_n = n-1).
//!
//! Four routes to the same number. The plain series converges for
//! Re alpha < 1/2 and is accelerated by replacing the tail with its local
//! limit, which sums to a Hurwitz zeta. The continuation splits off that
//! zeta term exactly, leaving an absolutely convergent remainder that
//! extends the function across the critical line up to Re alpha < 1 with a
//! single simple pole at alpha = 1/2 of residue -1/sqrt(2 pi sigma^2). A
//! double-integral representation over the offspring characteristic
//! function gives an independent route below the line, and a handful of
//! negative integers have closed forms in log 2, pi and zeta(3).

use num_complex::Complex64;

use crate::error::{GwError, Result};
use crate::exact::ballot::BallotTable;
use crate::exact::powc;
use crate::exact::quad::{integrate, QuadOpts};
use crate::offspring::{CharFnKind, OffspringDist, Preset};
use crate::specfun::{gamma, hurwitz_core};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuMethod {
    Series,
    Continued,
    Integral,
    ClosedForm,
}

impl MuMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MuMethod::Series => "series",
            MuMethod::Continued => "continued",
            MuMethod::Integral => "integral",
            MuMethod::ClosedForm => "closed",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MuValue {
    pub value: Complex64,
    pub alpha: Complex64,
    pub method: MuMethod,
    pub error_bound: f64,
}

fn inv_sqrt_2pi_sigma2(dist: &OffspringDist) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * dist.sigma2()).sqrt()
}

/// P(S_n = n-1) for n <= n_terms, one slot per n (zeros off the residue
/// class for presets; custom goes through the convolution table).
fn diag1_values(dist: &OffspringDist, n_terms: usize) -> Result<Vec<f64>> {
    let table = BallotTable::build(dist, n_terms)?;
    Ok((0..=n_terms)
        .map(|n| if n == 0 { 0.0 } else { table.diag1(n) })
        .collect())
}

/// Largest |r(n)| n^{3/2} over the last decade of the block, where
/// r(n) = P(S_n = n-1) - h (2 pi sigma^2 n)^{-1/2}; the tail of the series
/// is then bounded by C sum n^{Re alpha - 5/2}.
fn fit_defect_constant(diag: &[f64], h: usize, inv: f64) -> f64 {
    let n_terms = diag.len() - 1;
    let from = (n_terms / 10).max(1);
    let mut c = 0.0f64;
    let mut n = 1usize;
    while n <= n_terms {
        if n >= from {
            let nf = n as f64;
            let r = diag[n] - h as f64 * inv / nf.sqrt();
            c = c.max(r.abs() * nf.powf(1.5));
        }
        n += h;
    }
    c
}

/// First index beyond the block on the residue class n = 1 mod h.
fn next_in_class(n_terms: usize, h: usize) -> usize {
    let mut n0 = n_terms + 1;
    while (n0 - 1) % h != 0 {
        n0 += 1;
    }
    n0
}

/// mu(alpha) by direct summation, Re alpha < 1/2. The tail over n > n_terms
/// is replaced by its local limit, a Hurwitz zeta; the quoted error bound
/// is the fitted defect of that replacement (heuristic for custom pmfs
/// whose third moment may be infinite).
pub fn mu_series(dist: &OffspringDist, alpha: Complex64, n_terms: usize) -> Result<MuValue> {
    if alpha.re >= 0.5 {
        return Err(GwError::DomainError {
            what: "mu_series needs Re alpha < 1/2",
        });
    }
    debug_assert!(n_terms >= 100);
    let h = dist.span() as usize;
    let inv = inv_sqrt_2pi_sigma2(dist);
    let diag = diag1_values(dist, n_terms)?;
    let mut partial = Complex64::new(0.0, 0.0);
    let mut n = 1usize;
    while n <= n_terms {
        partial += powc(n as f64, alpha - 1.0) * diag[n];
        n += h;
    }
    let n0 = next_in_class(n_terms, h);
    let s = Complex64::new(1.5, 0.0) - alpha;
    let tail = powc(h as f64, alpha - 0.5) * inv * hurwitz_core(s, n0 as f64 / h as f64);
    let c = fit_defect_constant(&diag, h, inv);
    let bound_zeta = hurwitz_core(Complex64::new(2.5 - alpha.re, 0.0), n0 as f64 / h as f64).re;
    let value = partial + tail;
    let error_bound = c * (h as f64).powf(alpha.re - 2.5) * bound_zeta + 1e-15 * value.norm();
    Ok(MuValue {
        value,
        alpha,
        method: MuMethod::Series,
        error_bound,
    })
}

/// mu(alpha) through the exact zeta split, valid for Re alpha < 1 away from
/// the pole at 1/2; presets only, since the remainder needs closed-form
/// diagonal values.
pub fn mu_continued(dist: &OffspringDist, alpha: Complex64, n_terms: usize) -> Result<MuValue> {
    if Preset::from_kind(dist.kind()).is_none() {
        return Err(GwError::CustomNotSupported);
    }
    if alpha.re >= 1.0 {
        return Err(GwError::DomainError {
            what: "mu_continued needs Re alpha < 1",
        });
    }
    if (alpha - Complex64::new(0.5, 0.0)).norm() < 1e-12 {
        return Err(GwError::PoleAtHalf);
    }
    debug_assert!(n_terms >= 100);
    let h = dist.span() as usize;
    let hf = h as f64;
    let inv = inv_sqrt_2pi_sigma2(dist);
    let s = Complex64::new(1.5, 0.0) - alpha;
    let zeta_term = powc(hf, alpha - 0.5) * inv * hurwitz_core(s, 1.0 / hf);
    let table = BallotTable::build(dist, n_terms)?;
    let mut rest = Complex64::new(0.0, 0.0);
    let mut cfit = 0.0f64;
    let from = (n_terms / 10).max(1);
    let mut n = 1usize;
    while n <= n_terms {
        let nf = n as f64;
        let r = table.diag1(n) - hf * inv / nf.sqrt();
        rest += powc(nf, alpha - 1.0) * r;
        if n >= from {
            cfit = cfit.max(r.abs() * nf.powf(1.5));
        }
        n += h;
    }
    let n0 = next_in_class(n_terms, h);
    let bound_zeta = hurwitz_core(Complex64::new(2.5 - alpha.re, 0.0), n0 as f64 / hf).re;
    let value = zeta_term + rest;
    let error_bound = 2.0 * cfit * hf.powf(alpha.re - 2.5) * bound_zeta + 1e-15 * value.norm();
    Ok(MuValue {
        value,
        alpha,
        method: MuMethod::Continued,
        error_bound,
    })
}

/// Upper inner limit in u after x = u^2; exp(400) stays finite and the
/// integrand beyond is below 1e-150.
const U_MAX: f64 = 20.0;

/// mu(alpha) from the double integral
/// (2 pi Gamma(1-alpha))^{-1} int_{-pi}^{pi} int_0^inf
///   x^{-alpha} phi(t) / (e^x - phi~(t)) dx dt,
/// Re alpha < 1/2. Substituting x = u^2 and then u = e^v turns the inner
/// integral into one over v whose feature at u ~ sqrt|rho(t)| has O(1)
/// width wherever the outer variable sits, and whose u -> 0 endpoint
/// becomes plain exponential decay; the t integral is split at 0 because
/// the inner value blows up like |t|^{-2 Re alpha} there when Re alpha >= 0.
pub fn mu_integral(dist: &OffspringDist, alpha: Complex64) -> Result<MuValue> {
    if alpha.re >= 0.5 {
        return Err(GwError::DomainError {
            what: "mu_integral needs Re alpha < 1/2",
        });
    }
    let inner_opts = QuadOpts {
        atol: 1e-250,
        rtol: 1e-12,
        max_depth: 60,
        max_panels: 4_000,
    };
    // The depth cap stops the zoom toward the t = 0 blowup at
    // |t| ~ pi 2^{-80}; for Re alpha near 1/2 the capped leftover is
    // reported through the error bound.
    let outer_opts = QuadOpts {
        atol: 1e-9,
        rtol: 1e-12,
        max_depth: 80,
        max_panels: 30_000,
    };
    // 2 u^{1-2 alpha} du = 2 e^{(2 - 2 alpha) v} dv
    let expo = Complex64::new(2.0, 0.0) - alpha * 2.0;
    let re_decay = expo.re; // > 1 throughout the domain
    let v_hi = U_MAX.ln();
    let mut outer = |t: f64| -> Result<Complex64> {
        let phi = dist.char_fn(t, CharFnKind::Phi);
        let rho = dist.char_fn(t, CharFnKind::Rho);
        // Below v_lo the integrand is under 1e-16 times its own left-tail
        // integral bound, itself far below the total.
        let v_lo = (1e-16 * re_decay * 0.5 * rho.norm()).ln() / re_decay;
        let mut inner = |v: f64| -> Result<Complex64> {
            // e^{u^2} - phi~ assembled as expm1(u^2) + rho: both pieces
            // keep relative accuracy, while the direct difference is pure
            // cancellation near the feature.
            let den = (2.0 * v).exp().exp_m1() + rho;
            Ok(2.0 * (expo * v).exp() * phi / den)
        };
        Ok(integrate(&mut inner, v_lo, v_hi, &inner_opts)?.value)
    };
    let neg = integrate(&mut outer, -std::f64::consts::PI, 0.0, &outer_opts)?;
    let pos = integrate(&mut outer, 0.0, std::f64::consts::PI, &outer_opts)?;
    let gamma_1ma = gamma(Complex64::new(1.0, 0.0) - alpha)?;
    let norm = 2.0 * std::f64::consts::PI * gamma_1ma;
    let value = (neg.value + pos.value) / norm;
    let error_bound =
        (neg.error + pos.error + 2.0 * std::f64::consts::PI * inner_opts.atol) / norm.norm();
    Ok(MuValue {
        value,
        alpha,
        method: MuMethod::Integral,
        error_bound,
    })
}

/// mu(-k) for the tabulated nonnegative integers, assembled from log 2, pi
/// and zeta(3).
pub fn mu_closed_form(preset: Preset, k: u32) -> Result<MuValue> {
    let l = std::f64::consts::LN_2;
    let pi = std::f64::consts::PI;
    let pi2 = pi * pi;
    let z3 = hurwitz_core(Complex64::new(3.0, 0.0), 1.0).re;
    let v = match (preset, k) {
        (Preset::Poisson1, 0) => 1.0,
        (Preset::Poisson1, 1) => 0.5,
        (Preset::Poisson1, 2) => 5.0 / 12.0,
        (Preset::Poisson1, 3) => 7.0 / 18.0,
        (Preset::Poisson1, 4) => 1631.0 / 4320.0,
        (Preset::Poisson1, 5) => 96547.0 / 259200.0,
        (Preset::Geometric12, 0) => 1.0,
        (Preset::Geometric12, 1) => 2.0 - 2.0 * l,
        (Preset::Geometric12, 2) => 2.0 * l * l - 4.0 * l - pi2 / 6.0 + 4.0,
        (Preset::Geometric12, 3) => {
            (l - 1.0) * pi2 / 3.0 - 4.0 / 3.0 * l.powi(3) + 4.0 * l * l - 8.0 * l - 2.0 * z3 + 8.0
        }
        (Preset::Geometric12, 4) => {
            -pi2 * pi2 / 40.0 + (-l * l / 3.0 + 2.0 * l / 3.0 - 2.0 / 3.0) * pi2
                + 2.0 / 3.0 * l.powi(4)
                - 8.0 / 3.0 * l.powi(3)
                + 8.0 * l * l
                - 16.0 * l
                + (4.0 * l - 4.0) * z3
                + 16.0
        }
        (Preset::Binomial212, 0) => 1.0,
        (Preset::Binomial212, 1) => 2.0 * l - 1.0,
        (Preset::Binomial212, 2) => pi2 / 6.0 - 2.0 * l * l - 2.0 * l + 1.0,
        (Preset::FullBinary, 0) => 1.0,
        (Preset::FullBinary, 1) => pi / 2.0 - 1.0,
        (Preset::FullBinary, 2) => 1.0 - (1.0 - l) * pi / 2.0,
        _ => return Err(GwError::NotTabulated),
    };
    Ok(MuValue {
        value: Complex64::new(v, 0.0),
        alpha: Complex64::new(-(k as f64), 0.0),
        method: MuMethod::ClosedForm,
        error_bound: 1e-14 * v.abs().max(1.0),
    })
}

/// Tabulated range of mu_closed_form per preset (inclusive upper k).
pub fn closed_form_range(preset: Preset) -> u32 {
    match preset {
        Preset::Poisson1 => 5,
        Preset::Geometric12 => 4,
        Preset::Binomial212 => 2,
        Preset::FullBinary => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn po() -> OffspringDist {
        OffspringDist::preset(Preset::Poisson1)
    }

    #[test]
    fn mu_zero_is_one() {
        // mu(0) = sum q_n = 1. The truncation defect is by design
        // C_r * (2/3) * N^{-3/2} with the preset's own local-limit defect
        // constant C_r (about 0.64 for the binomial preset, hence a few
        // 1e-9 at N = 2e5); the contract is that the reported error bound
        // covers it.
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let m = mu_series(&d, c(0.0, 0.0), 200_000).unwrap();
            let defect = (m.value.re - 1.0).abs();
            assert!(
                defect <= m.error_bound + 1e-13,
                "{}: defect {defect:e} above bound {:e}",
                p.name(),
                m.error_bound
            );
            assert!(defect < 1e-8, "{}: defect {defect:e}", p.name());
            assert_abs_diff_eq!(m.value.im, 0.0, epsilon = 1e-12);
            let m2 = mu_continued(&d, c(0.0, 0.0), 200_000).unwrap();
            let defect2 = (m2.value.re - 1.0).abs();
            assert!(defect2 <= m2.error_bound + 1e-13);
            assert!(defect2 < 1e-8);
        }
    }

    #[test]
    fn poisson_appendix_values_by_series() {
        let d = po();
        let m = mu_series(&d, c(-1.0, 0.0), 100_000).unwrap();
        assert_abs_diff_eq!(m.value.re, 0.5, epsilon = 1e-7);
        assert!(m.error_bound < 1e-7);
        let m2 = mu_series(&d, c(-2.0, 0.0), 100_000).unwrap();
        assert_abs_diff_eq!(m2.value.re, 5.0 / 12.0, epsilon = 1e-9);
    }

    #[test]
    fn geometric_log2_value() {
        let d = OffspringDist::preset(Preset::Geometric12);
        let m = mu_series(&d, c(-1.0, 0.0), 100_000).unwrap();
        assert_abs_diff_eq!(m.value.re, 2.0 - 2.0 * std::f64::consts::LN_2, epsilon = 1e-7);
    }

    #[test]
    fn continued_agrees_with_series_below_line() {
        let d = po();
        for alpha in [c(-1.0, 0.0), c(0.3, 0.0), c(-0.5, 0.8), c(0.2, -1.3)] {
            let s = mu_series(&d, alpha, 60_000).unwrap();
            let t = mu_continued(&d, alpha, 60_000).unwrap();
            assert!(
                (s.value - t.value).norm() <= 1e-9,
                "alpha {alpha}: {} vs {}",
                s.value,
                t.value
            );
        }
    }

    #[test]
    fn binomial_continued_closed_form() {
        let d = OffspringDist::preset(Preset::Binomial212);
        let m = mu_continued(&d, c(-2.0, 0.0), 100_000).unwrap();
        let cf = mu_closed_form(Preset::Binomial212, 2).unwrap();
        assert_abs_diff_eq!(m.value.re, cf.value.re, epsilon = 1e-8);
        assert!((0.2977 - cf.value.re).abs() < 1e-4);
    }

    #[test]
    fn residue_at_half() {
        // (alpha - 1/2) mu(alpha) -> -1/sqrt(2 pi sigma^2) from both sides
        for p in [Preset::Poisson1, Preset::FullBinary] {
            let d = OffspringDist::preset(p);
            let res = -1.0 / (2.0 * std::f64::consts::PI * d.sigma2()).sqrt();
            for eps in [1e-4, -1e-4] {
                let a = c(0.5 + eps, 0.0);
                let m = mu_continued(&d, a, 100_000).unwrap();
                assert_abs_diff_eq!(eps * m.value.re, res, epsilon = 2e-4);
            }
        }
    }

    #[test]
    fn domain_errors() {
        let d = po();
        assert!(matches!(
            mu_series(&d, c(0.6, 0.0), 1000),
            Err(GwError::DomainError { .. })
        ));
        assert!(matches!(
            mu_continued(&d, c(1.2, 0.0), 1000),
            Err(GwError::DomainError { .. })
        ));
        assert!(matches!(
            mu_continued(&d, c(0.5, 0.0), 1000),
            Err(GwError::PoleAtHalf)
        ));
        let custom = OffspringDist::custom(vec![0.25, 0.5, 0.25]).unwrap();
        assert!(matches!(
            mu_continued(&custom, c(0.0, 0.0), 1000),
            Err(GwError::CustomNotSupported)
        ));
        assert!(matches!(
            mu_closed_form(Preset::Poisson1, 6),
            Err(GwError::NotTabulated)
        ));
    }

    #[test]
    fn integral_route_matches_series() {
        let po1 = po();
        let m = mu_integral(&po1, c(-1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(m.value.re, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(m.value.im, 0.0, epsilon = 1e-8);
        let ge = OffspringDist::preset(Preset::Geometric12);
        let mi = mu_integral(&ge, c(0.3, 0.0)).unwrap();
        let ms = mu_series(&ge, c(0.3, 0.0), 100_000).unwrap();
        assert_abs_diff_eq!(mi.value.re, ms.value.re, epsilon = 1e-6);
        let any0 = mu_integral(&ge, c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(any0.value.re, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn integral_route_custom_and_complex() {
        let d = OffspringDist::custom(vec![0.25, 0.5, 0.25]).unwrap();
        let m = mu_integral(&d, c(-1.0, 0.0)).unwrap();
        let s = mu_series(&d, c(-1.0, 0.0), 20_000).unwrap();
        assert_abs_diff_eq!(m.value.re, s.value.re, epsilon = 1e-6);
        let po1 = po();
        let a = c(-0.5, 0.8);
        let mi = mu_integral(&po1, a).unwrap();
        let ms = mu_series(&po1, a, 60_000).unwrap();
        assert!((mi.value - ms.value).norm() < 1e-6);
    }

    // Independent route for Po(1): with z = e^{-1-x} and T(z) the solution
    // of T = z e^T in (0,1), the diagonal generating function satisfies
    // Sum_n P(S_n = n-1) e^{-n x} = T/(1-T), so
    // mu(alpha) = (1/Gamma(1-alpha)) int_0^inf x^{-alpha} T/(1-T) dx.
    #[test]
    fn poisson_mu_against_tree_equation_integral() {
        // T/(1-T) with T in (0,1) solving ln T - T = -1-x. For small x the
        // root is near 1, so solve for delta = 1-T instead; Newton on
        // -delta - ln(1-delta) = x stays accurate down to the series regime
        // delta ~ sqrt(2x).
        fn ratio_of_x(x: f64) -> f64 {
            if x >= 0.5 {
                let z = (-1.0 - x).exp();
                let mut t = z * (1.0 + z);
                for _ in 0..60 {
                    let g = t.ln() - t + 1.0 + x;
                    let nt = t - g / (1.0 / t - 1.0);
                    if (nt - t).abs() <= 1e-16 * t {
                        return nt / (1.0 - nt);
                    }
                    t = nt;
                }
                t / (1.0 - t)
            } else if x > 5e-17 {
                let mut d = (2.0 * x).sqrt().min(1.0 - 1e-9);
                for _ in 0..80 {
                    let m = -d - (-d).ln_1p() - x;
                    let nd = (d - m * (1.0 - d) / d).clamp(0.5 * d, 1.0 - 1e-12);
                    if (nd - d).abs() <= 1e-15 * d {
                        return (1.0 - nd) / nd;
                    }
                    d = nd;
                }
                (1.0 - d) / d
            } else {
                let s = (2.0 * x).sqrt();
                let d = s * (1.0 - s / 3.0);
                (1.0 - d) / d
            }
        }
        let opts = QuadOpts {
            atol: 1e-11,
            rtol: 1e-12,
            max_depth: 120,
            max_panels: 60_000,
        };
        let d = po();
        for (alpha, expect) in [
            (c(-1.0, 0.0), Some(0.5)),
            (c(-2.0, 0.0), Some(5.0 / 12.0)),
            (c(0.25, 0.0), None),
        ] {
            let expo = Complex64::new(1.0, 0.0) - alpha * 2.0;
            let mut f = |u: f64| -> Result<Complex64> {
                Ok(2.0 * powc(u, expo) * ratio_of_x(u * u))
            };
            let q = integrate(&mut f, 0.0, 8.0, &opts).unwrap();
            let g = gamma(Complex64::new(1.0, 0.0) - alpha).unwrap();
            let v = (q.value / g).re;
            match expect {
                Some(e) => assert_abs_diff_eq!(v, e, epsilon = 1e-8),
                None => {
                    let s = mu_series(&d, alpha, 100_000).unwrap();
                    assert_abs_diff_eq!(v, s.value.re, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn closed_forms_decrease_to_extinction_mass() {
        // mu(-k) decreases toward q_1 = p_0 as k grows
        for p in Preset::ALL {
            let range = closed_form_range(p);
            let d = OffspringDist::preset(p);
            let mut prev = f64::INFINITY;
            for k in 0..=range {
                let v = mu_closed_form(p, k).unwrap().value.re;
                assert!(v < prev && v > d.p(0));
                prev = v;
            }
        }
    }

    #[test]
    fn closed_forms_match_series() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            for k in 0..=closed_form_range(p) {
                let cf = mu_closed_form(p, k).unwrap().value.re;
                let s = mu_series(&d, c(-(k as f64), 0.0), 100_000)
                    .unwrap()
                    .value
                    .re;
                assert_abs_diff_eq!(cf, s, epsilon = 1e-7);
            }
        }
    }
}
