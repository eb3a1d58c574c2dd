//! Discrete Brownian excursion and Brownian motion paths.
//!
//! The excursion is generated as a Gaussian random-walk bridge (iid normal
//! increments conditioned to sum to zero by the mean-shift) rotated at its
//! minimum. Vervaat's theorem makes that rotation an exact bridge-to-
//! excursion transformation in distribution, and it holds verbatim for the
//! cyclically exchangeable discrete walk, so the grid path has exactly the
//! law of the walk bridge conditioned to stay nonnegative.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GwError, Result};
use crate::excursion::rmq::RmqTable;

/// A nonnegative path on the grid t_i = i/m, i = 0..=m, pinned to zero at
/// both ends, with an O(1) range-minimum index.
#[derive(Debug, Clone)]
pub struct ExcursionPath {
    values: Vec<f64>,
    rmq: RmqTable,
}

impl ExcursionPath {
    /// Wraps explicit grid values; they must describe an excursion.
    pub fn from_values(values: Vec<f64>) -> Result<ExcursionPath> {
        if values.len() < 3 {
            return Err(GwError::DomainError {
                what: "an excursion grid needs m >= 2",
            });
        }
        if values[0] != 0.0 || *values.last().unwrap() != 0.0 {
            return Err(GwError::DomainError {
                what: "excursion values must vanish at both endpoints",
            });
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(GwError::DomainError {
                what: "excursion values must be finite and nonnegative",
            });
        }
        let rmq = RmqTable::build(&values);
        Ok(ExcursionPath { values, rmq })
    }

    /// Number of grid steps m (the path has m + 1 points).
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// min over values[i..=j].
    pub fn min_on(&self, i: usize, j: usize) -> f64 {
        self.rmq.min(i, j)
    }

    /// The time-reversed path t -> e(1 - t).
    pub fn reversed(&self) -> ExcursionPath {
        let mut values = self.values.clone();
        values.reverse();
        let rmq = RmqTable::build(&values);
        ExcursionPath { values, rmq }
    }

    /// Midpoint refinement by linear interpolation: grid size doubles, the
    /// polygonal path is unchanged.
    pub fn refined(&self) -> ExcursionPath {
        let m = self.m();
        let mut values = Vec::with_capacity(2 * m + 1);
        for i in 0..m {
            values.push(self.values[i]);
            values.push(0.5 * (self.values[i] + self.values[i + 1]));
        }
        values.push(0.0);
        let rmq = RmqTable::build(&values);
        ExcursionPath { values, rmq }
    }
}

/// One excursion on m grid steps, scaled to [0, 1]: a walk with standard
/// normal increments is tied down by subtracting the increment mean, cut at
/// its first minimum and rotated there (Vervaat), then scaled by 1/sqrt(m)
/// so it converges to the standard Brownian excursion as m grows.
pub fn sample_excursion(m: usize, rng: &mut impl Rng) -> Result<ExcursionPath> {
    if m < 2 {
        return Err(GwError::DomainError {
            what: "an excursion grid needs m >= 2",
        });
    }
    let mut steps: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let shift = steps.iter().sum::<f64>() / m as f64;
    for s in &mut steps {
        *s -= shift;
    }
    // Bridge positions b_0 = 0, ..., b_{m-1}; b_m = 0 by the shift.
    let mut bridge = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &s in steps.iter().take(m - 1) {
        bridge.push(acc);
        acc += s;
    }
    bridge.push(acc);
    let mut low = 0usize;
    for (i, &b) in bridge.iter().enumerate() {
        if b < bridge[low] {
            low = i;
        }
    }
    let scale = 1.0 / (m as f64).sqrt();
    let floor = bridge[low];
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    for i in 1..m {
        values.push(scale * (bridge[(low + i) % m] - floor));
    }
    values.push(0.0);
    let rmq = RmqTable::build(&values);
    Ok(ExcursionPath { values, rmq })
}

/// Trapezoidal integral of the path over [0, 1]. Endpoint values are zero,
/// so the rule reduces to the plain mean of the interior values.
pub fn excursion_area(path: &ExcursionPath) -> f64 {
    let m = path.m();
    path.values()[1..m].iter().sum::<f64>() / m as f64
}

/// A Brownian motion sample on [0, horizon] together with its running
/// supremum, on the grid t_k = k dt with dt = 1/steps_per_unit. The sup
/// entries are the exact running supremum of the continuous path at grid
/// times, obtained by sampling each step's bridge maximum, so sup[k] can
/// exceed every stored value.
#[derive(Debug, Clone)]
pub struct MotionPath {
    values: Vec<f64>,
    sup: Vec<f64>,
    dt: f64,
}

impl MotionPath {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

pub fn sample_motion(horizon: f64, steps_per_unit: usize, rng: &mut impl Rng) -> Result<MotionPath> {
    if !(horizon > 0.0) || steps_per_unit == 0 {
        return Err(GwError::DomainError {
            what: "motion sampling needs horizon > 0 and a positive grid density",
        });
    }
    let steps = (horizon * steps_per_unit as f64).round() as usize;
    let dt = 1.0 / steps_per_unit as f64;
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(steps + 1);
    let mut sup = Vec::with_capacity(steps + 1);
    let mut b = 0.0f64;
    let mut s = 0.0f64;
    values.push(b);
    sup.push(s);
    for _ in 0..steps {
        let a = b;
        b += sd * rng.sample::<f64, _>(StandardNormal);
        // Maximum of the step's Brownian bridge given its endpoints:
        // P(M >= x) = exp(-2(x-a)(x-b)/dt) for x >= max(a, b), sampled by
        // inversion. The naive maximum over grid values alone would sit
        // about 0.5826 sqrt(dt) too low (the usual discrete-monitoring
        // deficit), which the stated moment tolerances cannot absorb.
        let u: f64 = 1.0 - rng.random::<f64>();
        let peak = 0.5 * (a + b + ((a - b) * (a - b) - 2.0 * dt * u.ln()).sqrt());
        s = s.max(peak);
        values.push(b);
        sup.push(s);
    }
    Ok(MotionPath { values, sup, dt })
}
