//! Discretized evaluation of the excursion representations of Y(alpha) and
//! of the supremum functional Y_inf = int e^{-t} S(t) dt.
//!
//! Two forms are provided. For Re alpha > 1,
//!
//!   Y(alpha) = 2 alpha (alpha - 1)
//!              iint_{s<t} (t - s)^{alpha-2} m(e; s, t) ds dt,
//!
//! and for Re alpha > 1/2 the symmetric form
//!
//!   Y(alpha) = alpha int_0^1 [t^{alpha-1} + (1-t)^{alpha-1}] e(t) dt
//!            - alpha (alpha - 1) iint_{s<t} (t - s)^{alpha-2}
//!              [e(s) + e(t) - 2 m(e; s, t)] ds dt.
//!
//! The two agree pathwise where both converge (integrating the kernel in s
//! turns one into the other), which the tests exploit.
//!
//! Quadrature: trapezoidal weights on the uniform grid, pairs grouped by
//! the lag d = j - i so each kernel power is computed once per lag, and
//! the near-diagonal band t - s < 2/m dropped. The band's true contribution
//! is O((t-s)^{Re alpha - 2} * (t-s)^{1+gamma}) per unit area by Holder
//! continuity of the excursion, so the omitted mass vanishes as the grid
//! refines; this truncation is part of the method's definition here.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{GwError, Result};
use crate::exact::powc;
use crate::excursion::path::{excursion_area, sample_motion, ExcursionPath, MotionPath};
use crate::sampler::{rep_rng, McEstimate};
use rayon::prelude::*;

/// Which representation to discretize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YForm {
    /// The minimum-kernel double integral; needs Re alpha > 1.
    Wb,
    /// The symmetric single-plus-double form; needs Re alpha > 1/2.
    Wa2,
}

impl YForm {
    pub fn from_name(name: &str) -> Option<YForm> {
        match name {
            "wb" => Some(YForm::Wb),
            "wa2" => Some(YForm::Wa2),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            YForm::Wb => "wb",
            YForm::Wa2 => "wa2",
        }
    }
}

/// Validity region of each form.
pub fn check_y_domain(alpha: Complex64, form: YForm) -> Result<()> {
    let ok = match form {
        YForm::Wb => alpha.re > 1.0,
        YForm::Wa2 => alpha.re > 0.5,
    };
    if ok {
        Ok(())
    } else {
        Err(GwError::DomainError {
            what: "the wb form needs Re alpha > 1, the wa2 form Re alpha > 1/2",
        })
    }
}

/// Y(alpha) evaluated on one path.
pub fn eval_y(path: &ExcursionPath, alpha: Complex64, form: YForm) -> Result<Complex64> {
    check_y_domain(alpha, form)?;
    Ok(match form {
        YForm::Wb => {
            if alpha == Complex64::new(2.0, 0.0) {
                Complex64::new(wb_alpha_two_fast(path), 0.0)
            } else {
                wb_generic(path, alpha)
            }
        }
        YForm::Wa2 => wa2_generic(path, alpha),
    })
}

/// Lag-grouped double sum for the wb form. Windows touching an endpoint
/// have minimum zero and drop out on their own.
fn wb_generic(path: &ExcursionPath, alpha: Complex64) -> Complex64 {
    let m = path.m();
    let mf = m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for d in 2..m - 1 {
        let mut inner = 0.0;
        for i in 1..m - d {
            inner += path.min_on(i, i + d);
        }
        if inner != 0.0 {
            acc += powc(d as f64 / mf, alpha - 2.0) * inner;
        }
    }
    2.0 * alpha * (alpha - 1.0) * acc / (mf * mf)
}

/// Exact rewrite of `wb_generic` at alpha = 2, where the kernel is 1 and
/// the double sum is a sum of windowed minima: each interior value e_k is
/// the minimum of (k - L)(R - k) windows, with L the nearest smaller value
/// to the left and R the nearest smaller-or-equal to the right (the
/// asymmetric tie rule counts each window exactly once). A monotonic stack
/// finds all extents in O(m), replacing the O(m^2) scan.
fn wb_alpha_two_fast(path: &ExcursionPath) -> f64 {
    let m = path.m();
    let e = path.values();
    // Interior positions 1..m-1; extents clipped to that range.
    let mut left = vec![0usize; m];
    let mut stack: Vec<usize> = Vec::new();
    for k in 1..m {
        while let Some(&top) = stack.last() {
            if e[top] < e[k] {
                break;
            }
            stack.pop();
        }
        left[k] = *stack.last().unwrap_or(&0);
        stack.push(k);
    }
    let mut right = vec![m; m];
    stack.clear();
    for k in (1..m).rev() {
        while let Some(&top) = stack.last() {
            if e[top] <= e[k] {
                break;
            }
            stack.pop();
        }
        right[k] = *stack.last().unwrap_or(&m);
        stack.push(k);
    }
    let mut all = 0.0;
    for k in 1..m {
        all += e[k] * ((k - left[k]) * (right[k] - k)) as f64;
    }
    // Remove window lengths 1 and 2, the dropped near-diagonal band.
    let mut short = 0.0;
    for k in 1..m {
        short += e[k];
        if k + 1 < m {
            short += e[k].min(e[k + 1]);
        }
    }
    let mf = m as f64;
    4.0 * (all - short) / (mf * mf)
}

/// Single integrals plus lag-grouped double sum for the wa2 form. Endpoint
/// values vanish, so the single trapezoid reduces to interior terms; the
/// double integrand does not vanish at the ends and keeps its half weights.
fn wa2_generic(path: &ExcursionPath, alpha: Complex64) -> Complex64 {
    let m = path.m();
    let mf = m as f64;
    let e = path.values();
    let mut single = Complex64::new(0.0, 0.0);
    for i in 1..m {
        let t = i as f64 / mf;
        single += (powc(t, alpha - 1.0) + powc(1.0 - t, alpha - 1.0)) * e[i];
    }
    single = alpha * single / mf;

    let coef = alpha * (alpha - 1.0);
    if coef == Complex64::new(0.0, 0.0) {
        return single;
    }
    let w = |i: usize| if i == 0 || i == m { 0.5 } else { 1.0 };
    let mut double = Complex64::new(0.0, 0.0);
    for d in 2..=m {
        let mut inner = 0.0;
        for i in 0..=m - d {
            let j = i + d;
            let bracket = e[i] + e[j] - 2.0 * path.min_on(i, j);
            if bracket != 0.0 {
                inner += w(i) * w(j) * bracket;
            }
        }
        if inner != 0.0 {
            double += powc(d as f64 / mf, alpha - 2.0) * inner;
        }
    }
    single - coef * double / (mf * mf)
}

/// Y_inf evaluated on one motion path by the trapezoidal rule. The tail
/// beyond the horizon is dropped; `yinf_tail_bound` bounds its mean.
pub fn yinf_from_motion(path: &MotionPath) -> f64 {
    let sup = path.sup();
    let dt = path.dt();
    let decay = (-dt).exp();
    let mut weight = 1.0;
    let mut acc = 0.0;
    let last = sup.len() - 1;
    for (k, &s) in sup.iter().enumerate() {
        // Refresh the geometric recurrence so rounding cannot accumulate
        // across tens of thousands of steps.
        if k % 1024 == 0 {
            weight = (-(k as f64) * dt).exp();
        }
        let c = if k == 0 || k == last { 0.5 } else { 1.0 };
        acc += c * weight * s;
        weight *= decay;
    }
    acc * dt
}

/// Mean of the dropped tail int_T^inf e^{-t} S(t) dt: since
/// E S(t) = sqrt(2t/pi) and sqrt(T + u) <= sqrt(T) + u/(2 sqrt(T)),
/// the bound e^{-T} sqrt(2/pi) (sqrt(T) + 1/(2 sqrt(T))) follows.
pub fn yinf_tail_bound(horizon: f64) -> f64 {
    let rt = horizon.sqrt();
    (-horizon).exp() * (2.0 / std::f64::consts::PI).sqrt() * (rt + 0.5 / rt)
}

/// One sample of Y_inf. The preconditions keep the dropped tail and the
/// grid bias below the tolerances the moment checks use.
pub fn sample_yinf(horizon: f64, steps_per_unit: usize, rng: &mut impl Rng) -> Result<f64> {
    if horizon < 10.0 {
        return Err(GwError::DomainError {
            what: "the Y_inf horizon must be at least 10",
        });
    }
    if steps_per_unit < 1024 {
        return Err(GwError::DomainError {
            what: "Y_inf needs at least 2^10 grid steps per unit time",
        });
    }
    Ok(yinf_from_motion(&sample_motion(horizon, steps_per_unit, rng)?))
}

/// Y(alpha) on independent excursions, one value per replication, under
/// the same counter-based seeding contract as the tree sampler.
pub fn sample_y_values(
    alpha: Complex64,
    form: YForm,
    m: usize,
    reps: u64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    check_y_domain(alpha, form)?;
    if m < 2 {
        return Err(GwError::DomainError {
            what: "an excursion grid needs m >= 2",
        });
    }
    Ok((0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = rep_rng(seed, i);
            let path = crate::excursion::path::sample_excursion(m, &mut rng)
                .expect("grid size was validated");
            eval_y(&path, alpha, form).expect("domain was validated")
        })
        .collect())
}

/// Monte Carlo mean of Y(alpha).
pub fn y_mean_estimate(
    alpha: Complex64,
    form: YForm,
    m: usize,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    let values = sample_y_values(alpha, form, m, reps, seed)?;
    Ok(McEstimate::from_values(&values, seed))
}

/// Y_inf on independent motions, one value per replication.
pub fn sample_yinf_values(
    horizon: f64,
    steps_per_unit: usize,
    reps: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if horizon < 10.0 || steps_per_unit < 1024 {
        return Err(GwError::DomainError {
            what: "Y_inf needs horizon >= 10 and at least 2^10 steps per unit time",
        });
    }
    Ok((0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = rep_rng(seed, i);
            sample_yinf(horizon, steps_per_unit, &mut rng).expect("inputs were validated")
        })
        .collect())
}
