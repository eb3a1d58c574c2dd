//! Critical offspring distributions.
//!
//! Four presets with closed-form pgf and characteristic functions, plus
//! user-supplied finite pmfs. Construction validates criticality (mean 1),
//! nondegenerate variance and nonnegative mass; the span (gcd of the
//! support) controls which tree sizes are reachable: q_n > 0 exactly when
//! n = 1 mod span.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{GwError, Result};

/// Relative cutoff when materializing the Poisson pmf; the discarded tail
/// mass is below 1e-19 and is documented wherever the table is consumed.
const POISSON_TAIL_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Poisson1,
    Geometric12,
    Binomial212,
    FullBinary,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Poisson1,
    Geometric12,
    Binomial212,
    FullBinary,
}

impl Preset {
    /// CLI names: po1, ge12, bi212, fullbin.
    pub fn from_name(name: &str) -> Option<Preset> {
        match name {
            "po1" => Some(Preset::Poisson1),
            "ge12" => Some(Preset::Geometric12),
            "bi212" => Some(Preset::Binomial212),
            "fullbin" => Some(Preset::FullBinary),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Poisson1 => "po1",
            Preset::Geometric12 => "ge12",
            Preset::Binomial212 => "bi212",
            Preset::FullBinary => "fullbin",
        }
    }

    pub fn from_kind(kind: Kind) -> Option<Preset> {
        match kind {
            Kind::Poisson1 => Some(Preset::Poisson1),
            Kind::Geometric12 => Some(Preset::Geometric12),
            Kind::Binomial212 => Some(Preset::Binomial212),
            Kind::FullBinary => Some(Preset::FullBinary),
            Kind::Custom => None,
        }
    }

    pub const ALL: [Preset; 4] = [
        Preset::Poisson1,
        Preset::Geometric12,
        Preset::Binomial212,
        Preset::FullBinary,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharFnKind {
    /// phi(t) = E e^{i t xi}
    Phi,
    /// phi~(t) = e^{-it} phi(t), the step characteristic function of S - 1
    PhiTilde,
    /// rho(t) = 1 - phi~(t)
    Rho,
}

#[derive(Debug, Clone)]
pub struct OffspringDist {
    kind: Kind,
    /// Dense pmf from k = 0. For Poisson this is a materialized prefix; the
    /// exact value is always available through `p()`.
    pmf: Vec<f64>,
    sigma2: f64,
    span: u32,
    third_moment_finite: bool,
}

impl OffspringDist {
    pub fn preset(which: Preset) -> OffspringDist {
        match which {
            Preset::Poisson1 => {
                let mut pmf = Vec::new();
                let mut p = (-1.0f64).exp();
                let mut k = 0u32;
                while p >= POISSON_TAIL_CUTOFF * (-1.0f64).exp() {
                    pmf.push(p);
                    k += 1;
                    p /= k as f64;
                }
                OffspringDist {
                    kind: Kind::Poisson1,
                    pmf,
                    sigma2: 1.0,
                    span: 1,
                    third_moment_finite: true,
                }
            }
            Preset::Geometric12 => {
                // P(xi = k) = 2^{-k-1}; materialized prefix for table users.
                let pmf = (0..60).map(|k| 0.5f64.powi(k + 1)).collect();
                OffspringDist {
                    kind: Kind::Geometric12,
                    pmf,
                    sigma2: 2.0,
                    span: 1,
                    third_moment_finite: true,
                }
            }
            Preset::Binomial212 => OffspringDist {
                kind: Kind::Binomial212,
                pmf: vec![0.25, 0.5, 0.25],
                sigma2: 0.5,
                span: 1,
                third_moment_finite: true,
            },
            Preset::FullBinary => OffspringDist {
                kind: Kind::FullBinary,
                pmf: vec![0.5, 0.0, 0.5],
                sigma2: 1.0,
                span: 2,
                third_moment_finite: true,
            },
        }
    }

    /// A finite pmf given densely from k = 0. Must be critical.
    pub fn custom(pmf: Vec<f64>) -> Result<OffspringDist> {
        for (k, &p) in pmf.iter().enumerate() {
            if p < 0.0 {
                return Err(GwError::NegativeMass { k: k as u32, p });
            }
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(GwError::MassNotNormalized { sum });
        }
        let mean: f64 = pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
        // User-entered decimal pmfs deserve a little slack on the mean.
        if (mean - 1.0).abs() > 1e-9 {
            return Err(GwError::NotCritical { mean });
        }
        let sigma2: f64 = pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64 - 1.0).powi(2) * p)
            .sum();
        if sigma2 < 1e-12 {
            return Err(GwError::DegenerateVariance);
        }
        let mut span = 0u32;
        for (k, &p) in pmf.iter().enumerate().skip(1) {
            if p > 0.0 {
                span = gcd(span, k as u32);
            }
        }
        debug_assert!(span > 0 && pmf[0] > 0.0);
        Ok(OffspringDist {
            kind: Kind::Custom,
            pmf,
            sigma2,
            span,
            third_moment_finite: true,
        })
    }

    /// Custom pmf from sparse (k, p) pairs.
    pub fn custom_sparse(pairs: &[(u32, f64)]) -> Result<OffspringDist> {
        let kmax = pairs.iter().map(|&(k, _)| k).max().unwrap_or(0) as usize;
        let mut pmf = vec![0.0; kmax + 1];
        for &(k, p) in pairs {
            pmf[k as usize] += p;
        }
        OffspringDist::custom(pmf)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn span(&self) -> u32 {
        self.span
    }

    pub fn third_moment_finite(&self) -> bool {
        self.third_moment_finite
    }

    /// P(xi = k), exact (Poisson values beyond the materialized prefix are
    /// computed on demand).
    pub fn p(&self, k: u32) -> f64 {
        if let Some(&p) = self.pmf.get(k as usize) {
            return p;
        }
        match self.kind {
            Kind::Poisson1 => {
                let mut p = (-1.0f64).exp();
                for j in 1..=k {
                    p /= j as f64;
                }
                p
            }
            Kind::Geometric12 => 0.5f64.powi(k as i32 + 1),
            _ => 0.0,
        }
    }

    /// Dense pmf prefix of length cap+1 (plus whatever tail mass is beyond
    /// the Poisson cutoff, which is below 1e-19).
    pub fn pmf_upto(&self, cap: u32) -> Vec<f64> {
        (0..=cap).map(|k| self.p(k)).collect()
    }

    /// Largest support point, None when unbounded (Poisson).
    pub fn support_max(&self) -> Option<u32> {
        match self.kind {
            Kind::Poisson1 | Kind::Geometric12 => None,
            _ => {
                let mut m = 0;
                for (k, &p) in self.pmf.iter().enumerate() {
                    if p > 0.0 {
                        m = k as u32;
                    }
                }
                Some(m)
            }
        }
    }

    /// Materialized support cap used by samplers and tables; exact for the
    /// finite presets, tail-truncated at 1e-18 relative for Poisson.
    pub(crate) fn table_cap(&self) -> u32 {
        (self.pmf.len() - 1) as u32
    }

    /// pgf Phi and its derivatives Phi^{(0..=m)} at w, |w| <= 1 + 1e-12.
    pub fn pgf_and_derivatives(&self, w: Complex64, m: u32) -> Result<Vec<Complex64>> {
        let modulus = w.norm();
        if modulus > 1.0 + 1e-12 {
            return Err(GwError::OutsideDisc { modulus });
        }
        let m = m as usize;
        let mut out = Vec::with_capacity(m + 1);
        match self.kind {
            Kind::Poisson1 => {
                let e = (w - 1.0).exp();
                out.resize(m + 1, e);
            }
            Kind::Geometric12 => {
                // Phi(w) = 1/(2-w), Phi^{(j)}(w) = j! (2-w)^{-j-1}
                let inv = 1.0 / (Complex64::new(2.0, 0.0) - w);
                let mut pw = inv;
                let mut fact = 1.0f64;
                for j in 0..=m {
                    if j > 0 {
                        fact *= j as f64;
                        pw *= inv;
                    }
                    out.push(fact * pw);
                }
            }
            _ => {
                // Finite pmf: Phi^{(j)}(w) = sum_k p_k k!/(k-j)! w^{k-j}
                for j in 0..=m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, &p) in self.pmf.iter().enumerate() {
                        if p == 0.0 || k < j {
                            continue;
                        }
                        let mut falling = 1.0f64;
                        for i in 0..j {
                            falling *= (k - i) as f64;
                        }
                        acc += p * falling * w.powu((k - j) as u32);
                    }
                    out.push(acc);
                }
            }
        }
        Ok(out)
    }

    /// Characteristic function of xi, of the centered step xi - 1, or the
    /// step deficiency rho(t) = 1 - phi~(t).
    ///
    /// rho vanishes quadratically at t = 0, so the naive difference
    /// 1 - phi~ loses all relative accuracy there; each kind instead gets a
    /// subtraction-free form built from sin^2(t/2) pieces (the integral
    /// representation divides by rho arbitrarily close to 0).
    pub fn char_fn(&self, t: f64, which: CharFnKind) -> Complex64 {
        let eit = Complex64::new(0.0, t).exp();
        if which == CharFnKind::Rho {
            return self.rho_stable(t, eit);
        }
        let phi = match self.kind {
            Kind::Poisson1 => (eit - 1.0).exp(),
            Kind::Geometric12 => 1.0 / (Complex64::new(2.0, 0.0) - eit),
            Kind::Binomial212 => {
                let h = (1.0 + eit) * 0.5;
                h * h
            }
            Kind::FullBinary => (1.0 + Complex64::new(0.0, 2.0 * t).exp()) * 0.5,
            Kind::Custom => {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut pw = Complex64::new(1.0, 0.0);
                for &p in &self.pmf {
                    acc += p * pw;
                    pw *= eit;
                }
                acc
            }
        };
        match which {
            CharFnKind::Phi => phi,
            CharFnKind::PhiTilde => Complex64::new(0.0, -t).exp() * phi,
            CharFnKind::Rho => unreachable!(),
        }
    }

    /// 1 - e^{i theta} with both parts free of cancellation.
    fn one_minus_cis(theta: f64) -> Complex64 {
        let s = (0.5 * theta).sin();
        Complex64::new(2.0 * s * s, -theta.sin())
    }

    fn rho_stable(&self, t: f64, eit: Complex64) -> Complex64 {
        match self.kind {
            // 1 - e^{g - it} for g = e^{it} - 1; the exponent
            // w = g - it = -2 sin^2(t/2) + i (sin t - t) is O(t^2), and
            // e^w - 1 splits into expm1/sin^2 pieces that stay accurate.
            Kind::Poisson1 => {
                let x = -2.0 * (0.5 * t).sin().powi(2);
                let y = t.sin() - t;
                let sy = (0.5 * y).sin();
                let re = x.exp_m1() * y.cos() - 2.0 * sy * sy;
                let im = (1.0 + x.exp_m1()) * y.sin();
                Complex64::new(-re, -im)
            }
            // (2 - 2 cos t)/(2 - e^{it})
            Kind::Geometric12 => {
                let s = (0.5 * t).sin();
                4.0 * s * s / (Complex64::new(2.0, 0.0) - eit)
            }
            Kind::Binomial212 => {
                let s = (0.5 * t).sin();
                Complex64::new(s * s, 0.0)
            }
            Kind::FullBinary => {
                let s = (0.5 * t).sin();
                Complex64::new(2.0 * s * s, 0.0)
            }
            // Sum of p_k (1 - e^{i(k-1)t}); each summand is stable and the
            // k = 1 term vanishes identically.
            Kind::Custom => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &p) in self.pmf.iter().enumerate() {
                    if p == 0.0 || k == 1 {
                        continue;
                    }
                    acc += p * Self::one_minus_cis((k as f64 - 1.0) * t);
                }
                acc
            }
        }
    }

    /// One offspring draw. Presets use exact integer constructions where the
    /// law allows it; Poisson walks its cdf (deterministic in the stream).
    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        match self.kind {
            Kind::Poisson1 => {
                let mut u: f64 = rng.random();
                let mut p = (-1.0f64).exp();
                let mut k = 0u32;
                loop {
                    if u < p || k > 200 {
                        return k;
                    }
                    u -= p;
                    k += 1;
                    p /= k as f64;
                }
            }
            Kind::Geometric12 => loop {
                // P(k trailing ones in a uniform word) = 2^{-k-1}
                let t = rng.random::<u64>().trailing_ones();
                if t < 64 {
                    return t;
                }
            },
            Kind::Binomial212 => {
                let r = rng.random::<u64>();
                ((r & 1) + ((r >> 1) & 1)) as u32
            }
            Kind::FullBinary => {
                let r = rng.random::<u64>();
                2 * (r & 1) as u32
            }
            Kind::Custom => {
                let mut u: f64 = rng.random();
                for (k, &p) in self.pmf.iter().enumerate() {
                    if u < p {
                        return k as u32;
                    }
                    u -= p;
                }
                (self.pmf.len() - 1) as u32
            }
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

/// Builds a distribution from a CLI/config name plus optional custom pmf.
pub fn make_offspring(name: &str, custom_pmf: Option<&[(u32, f64)]>) -> Result<OffspringDist> {
    if let Some(p) = Preset::from_name(name) {
        return Ok(OffspringDist::preset(p));
    }
    if name == "custom" {
        if let Some(pairs) = custom_pmf {
            return OffspringDist::custom_sparse(pairs);
        }
    }
    Err(GwError::OutsideDomain {
        what: "unknown distribution name (expected po1, ge12, bi212, fullbin or custom with a pmf)",
    })
}
