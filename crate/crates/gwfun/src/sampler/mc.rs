//! Monte Carlo estimation over conditioned and unconditioned trees.
//!
//! Replications are embarrassingly parallel. Every replication derives its
//! own generator as a pure function of (seed, replication index), results
//! are collected in index order, and all floating-point reductions run
//! sequentially over that ordering, so estimates are bitwise identical for
//! any worker count.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};
use crate::exact::{mean_xn_with, mu_series, BallotTable};
use crate::offspring::OffspringDist;
use crate::sampler::conditioned::{sample_unconditioned, ConditionedSampler};
use crate::sampler::shape::functional;

/// Exact centering via the ballot table is always attempted below this
/// size; above it only the sample mean is used (two O(n) f64 tables).
const EXACT_CENTER_MAX: usize = 1 << 24;

/// Default abandonment threshold for unconditioned generation.
pub const DEFAULT_SIZE_CAP: usize = 10_000_000;

/// Terms used when the covariance constant needs mu values.
const MU_TERMS: usize = 50_000;

/// A point estimate with a symmetric 95% confidence half-width, computed
/// componentwise as 1.96 sd / sqrt(reps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    pub half_width: Complex64,
    pub reps: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Estimate from iid complex values in fixed order.
    pub fn from_values(values: &[Complex64], seed: u64) -> McEstimate {
        let reps = values.len() as u64;
        let nf = reps as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for v in values {
            sum += v;
        }
        let mean = sum / nf;
        let mut ss_re = 0.0;
        let mut ss_im = 0.0;
        for v in values {
            ss_re += (v.re - mean.re).powi(2);
            ss_im += (v.im - mean.im).powi(2);
        }
        let half_width = if reps > 1 {
            let sd_re = (ss_re / (nf - 1.0)).sqrt();
            let sd_im = (ss_im / (nf - 1.0)).sqrt();
            Complex64::new(1.96 * sd_re / nf.sqrt(), 1.96 * sd_im / nf.sqrt())
        } else {
            Complex64::new(f64::INFINITY, f64::INFINITY)
        };
        McEstimate {
            mean,
            half_width,
            reps,
            seed,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one replication, a pure function of (seed, index); the
/// double mix keeps distinct (seed, index) pairs from colliding on simple
/// arithmetic relations.
pub fn rep_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Parallel map over replication indices, collected in index order.
pub(crate) fn par_rep_map<T: Send>(
    reps: u64,
    seed: u64,
    per_rep: impl Fn(&mut ChaCha8Rng) -> T + Sync,
) -> Vec<T> {
    (0..reps)
        .into_par_iter()
        .map(|i| per_rep(&mut rep_rng(seed, i)))
        .collect()
}

/// One conditioned-tree functional value X_n(alpha) per replication for a
/// batch of exponents; row i holds replication i in the order of `alphas`.
pub fn sample_functional_values(
    dist: &OffspringDist,
    n: usize,
    alphas: &[Complex64],
    reps: u64,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let sampler = ConditionedSampler::new(dist, n)?;
    Ok(par_rep_map(reps, seed, |rng| {
        functional(&sampler.sample(rng), alphas)
    }))
}

/// Empirical moments of X_n(alpha): the raw mean and the centered moments
/// of order 2..=ell_max. Centering subtracts the exact conditioned mean
/// when the table fits; otherwise the sample mean stands in and the flag
/// records the substitution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub alpha: Complex64,
    pub n: usize,
    pub mean: McEstimate,
    /// Index j holds the centered moment of order j + 2.
    pub centered: Vec<McEstimate>,
    pub centered_exactly: bool,
}

pub fn empirical_moments(
    dist: &OffspringDist,
    n: usize,
    alpha: Complex64,
    ell_max: u32,
    reps: u64,
    seed: u64,
) -> Result<EmpiricalMoments> {
    let rows = sample_functional_values(dist, n, &[alpha], reps, seed)?;
    let values: Vec<Complex64> = rows.into_iter().map(|r| r[0]).collect();
    let mean = McEstimate::from_values(&values, seed);
    let (center, centered_exactly) = if n <= EXACT_CENTER_MAX {
        let table = BallotTable::build(dist, n)?;
        (mean_xn_with(&table, n, alpha)?, true)
    } else {
        (mean.mean, false)
    };
    let mut centered = Vec::new();
    for ell in 2..=ell_max.max(1) {
        let powers: Vec<Complex64> = values.iter().map(|&v| (v - center).powu(ell)).collect();
        centered.push(McEstimate::from_values(&powers, seed));
    }
    Ok(EmpiricalMoments {
        alpha,
        n,
        mean,
        centered,
        centered_exactly,
    })
}

/// Mean of X_n(alpha)/n, the fringe-sum ratio whose limit is mu(alpha).
/// Only Re alpha <= 0 is accepted; beyond that the ratio diverges.
pub fn fringe_ratio(
    dist: &OffspringDist,
    n: usize,
    alpha: Complex64,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    if alpha.re > 0.0 {
        return Err(GwError::DomainError {
            what: "the fringe ratio X_n/n converges only for Re alpha <= 0",
        });
    }
    let rows = sample_functional_values(dist, n, &[alpha], reps, seed)?;
    let nf = n as f64;
    let values: Vec<Complex64> = rows.into_iter().map(|r| r[0] / nf).collect();
    Ok(McEstimate::from_values(&values, seed))
}

/// Estimate of the asymptotic covariance gamma(alpha, beta) of the
/// centered, sqrt(n)-scaled functionals at negative exponents, computed on
/// unconditioned trees:
///
///   gamma = E[ |T|^alpha (X(beta) - |T| mu(beta))
///            + |T|^beta (X(alpha) - |T| mu(alpha)) ]
///           - mu(alpha + beta) + (1 - 1/sigma^2) mu(alpha) mu(beta).
///
/// Trees passing `cap` vertices are abandoned and counted; their weight in
/// the expectation is bounded by cap^{Re alpha} times the survival
/// probability, negligible at the default cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegAlphaCov {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub estimate: McEstimate,
    /// Replications abandoned at the size cap.
    pub discarded: u64,
    /// 0.999 quantile of the accepted tree sizes.
    pub size_q999: u64,
    pub cap: usize,
}

pub fn neg_alpha_cov(
    dist: &OffspringDist,
    alpha: Complex64,
    beta: Complex64,
    reps: u64,
    seed: u64,
    cap: usize,
) -> Result<NegAlphaCov> {
    if alpha.re >= 0.0 || beta.re >= 0.0 {
        return Err(GwError::DomainError {
            what: "the covariance estimator needs Re alpha < 0 and Re beta < 0",
        });
    }
    let mu_a = mu_series(dist, alpha, MU_TERMS)?.value;
    let mu_b = mu_series(dist, beta, MU_TERMS)?.value;
    let mu_ab = mu_series(dist, alpha + beta, MU_TERMS)?.value;
    let rows = par_rep_map(reps, seed, |rng| {
        sample_unconditioned(dist, cap, rng).map(|t| {
            let f = functional(&t, &[alpha, beta]);
            let size = t.n() as f64;
            let fa = crate::exact::powc(size, alpha);
            let fb = crate::exact::powc(size, beta);
            (t.n() as u64, fa * (f[1] - size * mu_b) + fb * (f[0] - size * mu_a))
        })
    });
    let mut values = Vec::with_capacity(rows.len());
    let mut sizes = Vec::with_capacity(rows.len());
    let mut discarded = 0u64;
    for row in rows {
        match row {
            Some((size, v)) => {
                sizes.push(size);
                values.push(v);
            }
            None => discarded += 1,
        }
    }
    if values.is_empty() {
        return Err(GwError::DomainError {
            what: "every replication was abandoned at the size cap",
        });
    }
    let mut est = McEstimate::from_values(&values, seed);
    est.mean += -mu_ab + (1.0 - 1.0 / dist.sigma2()) * mu_a * mu_b;
    est.reps = reps;
    sizes.sort_unstable();
    let q_idx = ((sizes.len() as f64) * 0.999).floor() as usize;
    let size_q999 = sizes[q_idx.min(sizes.len() - 1)];
    Ok(NegAlphaCov {
        alpha,
        beta,
        estimate: est,
        discarded,
        size_q999,
        cap,
    })
}
