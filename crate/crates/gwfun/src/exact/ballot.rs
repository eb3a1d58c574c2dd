//! Lattice-walk diagonal probabilities and the tree-size law.
//!
//! Everything downstream runs on two arrays: diag1[k] = P(S_k = k-1) and
//! diag0[m] = P(S_m = m), where S_k is a sum of k offspring draws. The
//! rotation (ballot) identity gives the conditioned tree size law as
//! q_n = P(|T| = n) = diag1[n]/n. Presets evaluate closed forms in log
//! space; custom pmfs run a windowed convolution DP, which doubles as the
//! cross-check oracle for the closed forms.

use crate::error::{GwError, Result};
use crate::offspring::{OffspringDist, Preset};
use crate::specfun::ln_gamma_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    ClosedForm,
    ConvolutionDP,
}

#[derive(Debug, Clone)]
pub struct BallotTable {
    dist: OffspringDist,
    n_max: usize,
    diag1: Vec<f64>,
    diag0: Vec<f64>,
    method: TableMethod,
}

/// Rows of the convolution DP are pruned below this absolute mass.
const DP_PRUNE: f64 = 1e-300;
/// Operation budget for the custom DP; beyond it the build refuses.
const DP_OPS_BUDGET: f64 = 4e9;

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma_real(n + 1.0) - ln_gamma_real(k + 1.0) - ln_gamma_real(n - k + 1.0)
}

/// P(S_k = k-1) for a preset, k >= 1.
pub(crate) fn closed_diag1(preset: Preset, k: u64) -> f64 {
    debug_assert!(k >= 1);
    let kf = k as f64;
    match preset {
        // S_k ~ Po(k): e^{-k} k^{k-1} / (k-1)!
        Preset::Poisson1 => ((kf - 1.0) * kf.ln() - kf - ln_gamma_real(kf)).exp(),
        // S_k ~ NegBin: C(2k-2, k-1) 2^{1-2k}
        Preset::Geometric12 => {
            (ln_choose(2.0 * kf - 2.0, kf - 1.0) + (1.0 - 2.0 * kf) * std::f64::consts::LN_2).exp()
        }
        // S_k ~ Bi(2k, 1/2): C(2k, k-1) 2^{-2k}
        Preset::Binomial212 => {
            (ln_choose(2.0 * kf, kf - 1.0) - 2.0 * kf * std::f64::consts::LN_2).exp()
        }
        // S_k = 2 Bi(k, 1/2): needs k odd; C(k, (k-1)/2) 2^{-k}
        Preset::FullBinary => {
            if k % 2 == 1 {
                (ln_choose(kf, (kf - 1.0) / 2.0) - kf * std::f64::consts::LN_2).exp()
            } else {
                0.0
            }
        }
    }
}

/// P(S_m = m) for a preset, m >= 0. Log-gamma route kept as an
/// independent cross-check against the recurrence tables.
#[cfg(test)]
pub(crate) fn closed_diag0(preset: Preset, m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mf = m as f64;
    match preset {
        Preset::Poisson1 => (mf * mf.ln() - mf - ln_gamma_real(mf + 1.0)).exp(),
        Preset::Geometric12 => {
            (ln_choose(2.0 * mf - 1.0, mf) - 2.0 * mf * std::f64::consts::LN_2).exp()
        }
        Preset::Binomial212 => {
            (ln_choose(2.0 * mf, mf) - 2.0 * mf * std::f64::consts::LN_2).exp()
        }
        Preset::FullBinary => {
            if m % 2 == 0 {
                (ln_choose(mf, mf / 2.0) - mf * std::f64::consts::LN_2).exp()
            } else {
                0.0
            }
        }
    }
}

impl BallotTable {
    /// Preset tables run multiplicative recurrences instead of the
    /// pointwise log-gamma forms: the log route carries |exponent| * eps
    /// relative noise (1e-12 already at k ~ 400), while a ratio update per
    /// step keeps the whole table near sqrt(k) * eps. Every preset reduces
    /// to the central binomial sequence c_j = C(2j,j) 4^{-j} with
    /// c_j = c_{j-1} (1 - 1/(2j)), except Poisson whose shared step factor
    /// is e^{-1} (1 + 1/k)^k.
    pub fn build(dist: &OffspringDist, n_max: usize) -> Result<BallotTable> {
        debug_assert!(n_max >= 1);
        let Some(p) = Preset::from_kind(dist.kind()) else {
            return Self::build_dp(dist, n_max);
        };
        let mut diag1 = vec![0.0; n_max + 1];
        let mut diag0 = vec![0.0; n_max + 1];
        diag0[0] = 1.0;
        match p {
            Preset::Poisson1 => {
                // P(S_k = k-1) = P(S_k = k) = e^{-k} k^{k-1} / (k-1)!
                let mut v = (-1.0f64).exp();
                diag1[1] = v;
                diag0[1] = v;
                for k in 1..n_max {
                    let kf = k as f64;
                    v *= (kf * (1.0 / kf).ln_1p() - 1.0).exp();
                    diag1[k + 1] = v;
                    diag0[k + 1] = v;
                }
            }
            Preset::Geometric12 => {
                // diag1[k] = c_{k-1}/2, diag0[m] = c_m/2
                let mut c = 1.0f64;
                diag1[1] = 0.5;
                for j in 1..=n_max {
                    c *= 1.0 - 0.5 / j as f64;
                    diag0[j] = 0.5 * c;
                    if j + 1 <= n_max {
                        diag1[j + 1] = 0.5 * c;
                    }
                }
            }
            Preset::Binomial212 => {
                // diag1[k] = c_k k/(k+1), diag0[m] = c_m
                let mut c = 1.0f64;
                for j in 1..=n_max {
                    c *= 1.0 - 0.5 / j as f64;
                    diag0[j] = c;
                    diag1[j] = c * j as f64 / (j as f64 + 1.0);
                }
            }
            Preset::FullBinary => {
                // diag1[2j+1] = c_j (2j+1)/(2j+2), diag0[2j] = c_j
                let mut c = 1.0f64;
                diag1[1] = 0.5;
                for j in 1..=n_max / 2 {
                    c *= 1.0 - 0.5 / j as f64;
                    diag0[2 * j] = c;
                    if 2 * j + 1 <= n_max {
                        diag1[2 * j + 1] = c * (2.0 * j as f64 + 1.0) / (2.0 * j as f64 + 2.0);
                    }
                }
            }
        }
        Ok(BallotTable {
            dist: dist.clone(),
            n_max,
            diag1,
            diag0,
            method: TableMethod::ClosedForm,
        })
    }

    /// Windowed convolution of the pmf with itself, reading the two
    /// diagonals row by row. Each destination entry gathers its sum with
    /// Neumaier compensation, so the rounding error stays near n*eps
    /// instead of compounding per source term. Used for custom pmfs and as
    /// the oracle for the preset closed forms.
    pub fn build_dp(dist: &OffspringDist, n_max: usize) -> Result<BallotTable> {
        let cap = dist.table_cap() as usize;
        let pmf = dist.pmf_upto(cap as u32);
        let ops = 50.0 * (cap as f64 + 1.0) * (n_max as f64).powf(1.5);
        if ops > DP_OPS_BUDGET {
            return Err(GwError::CapacityExceeded);
        }
        let width = n_max * cap + 1;
        let mut row = vec![0.0f64; width];
        let mut next = vec![0.0f64; width];
        row[0] = 1.0;
        // [lo, hi] is the valid window of `row`; entries outside it are
        // stale and must not be read. Edges carrying less than DP_PRUNE are
        // shed, which is the accepted truncation.
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut diag1 = vec![0.0; n_max + 1];
        let mut diag0 = vec![0.0; n_max + 1];
        diag0[0] = 1.0;
        for k in 1..=n_max {
            let new_hi = (hi + cap).min(width - 1);
            for (x, slot) in next.iter_mut().enumerate().take(new_hi + 1).skip(lo) {
                let mut sum = 0.0f64;
                let mut comp = 0.0f64;
                for d in 0..=cap.min(x - lo) {
                    let pd = pmf[d];
                    let src = x - d;
                    if pd == 0.0 || src > hi {
                        continue;
                    }
                    let term = row[src] * pd;
                    let t = sum + term;
                    comp += if sum.abs() >= term.abs() {
                        (sum - t) + term
                    } else {
                        (term - t) + sum
                    };
                    sum = t;
                }
                *slot = sum + comp;
            }
            std::mem::swap(&mut row, &mut next);
            hi = new_hi;
            diag1[k] = if (lo..=hi).contains(&(k - 1)) { row[k - 1] } else { 0.0 };
            diag0[k] = if (lo..=hi).contains(&k) { row[k] } else { 0.0 };
            while lo < hi && row[lo] < DP_PRUNE {
                lo += 1;
            }
            while hi > lo && row[hi] < DP_PRUNE {
                hi -= 1;
            }
        }
        Ok(BallotTable {
            dist: dist.clone(),
            n_max,
            diag1,
            diag0,
            method: TableMethod::ConvolutionDP,
        })
    }

    pub fn dist(&self) -> &OffspringDist {
        &self.dist
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn method(&self) -> TableMethod {
        self.method
    }

    pub fn span(&self) -> u32 {
        self.dist.span()
    }

    pub fn sigma2(&self) -> f64 {
        self.dist.sigma2()
    }

    /// P(S_k = k-1)
    pub fn diag1(&self, k: usize) -> f64 {
        self.diag1[k]
    }

    /// P(S_m = m)
    pub fn diag0(&self, m: usize) -> f64 {
        self.diag0[m]
    }

    /// q_n = P(|T| = n) = P(S_n = n-1)/n
    pub fn q(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        self.diag1[n] / n as f64
    }
}

/// P(|T| = n) for an unconditioned critical tree; closed form for presets,
/// DP for custom pmfs.
pub fn tree_size_pmf(dist: &OffspringDist, n: u64) -> Result<f64> {
    debug_assert!(n >= 1);
    if let Some(p) = Preset::from_kind(dist.kind()) {
        return Ok(closed_diag1(p, n) / n as f64);
    }
    if (n - 1) % dist.span() as u64 != 0 {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(dist.p(0));
    }
    let table = BallotTable::build(dist, n as usize)?;
    Ok(table.q(n as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn closed_forms_small_cases() {
        // Po(1): q_3 = P(S_3 = 2)/3 = e^{-3} 9/2 / 3 = 1.5 e^{-3}
        let q3 = tree_size_pmf(&OffspringDist::preset(Preset::Poisson1), 3).unwrap();
        assert_relative_eq!(q3, 1.5 * (-3.0f64).exp(), max_relative = 1e-13);
        // Ge(1/2): q_2 = 1/8, q_3 = 1/16
        let ge = OffspringDist::preset(Preset::Geometric12);
        assert_relative_eq!(tree_size_pmf(&ge, 2).unwrap(), 0.125, max_relative = 1e-13);
        assert_relative_eq!(tree_size_pmf(&ge, 3).unwrap(), 0.0625, max_relative = 1e-13);
        // Full binary: even sizes unreachable
        let fb = OffspringDist::preset(Preset::FullBinary);
        assert_eq!(tree_size_pmf(&fb, 4).unwrap(), 0.0);
        assert!(tree_size_pmf(&fb, 5).unwrap() > 0.0);
    }

    // The DP rebuilt from the (possibly tail-truncated) pmf must reproduce
    // the closed forms to near machine precision.
    #[test]
    fn dp_matches_closed_forms() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let n = 400;
            let closed = BallotTable::build(&d, n).unwrap();
            let dp = BallotTable::build_dp(&d, n).unwrap();
            assert_eq!(dp.method(), TableMethod::ConvolutionDP);
            for k in 1..=n {
                let c1 = closed.diag1(k);
                if c1 > 1e-280 {
                    assert_relative_eq!(dp.diag1(k), c1, max_relative = 1e-12);
                }
                let c0 = closed.diag0(k);
                if c0 > 1e-280 {
                    assert_relative_eq!(dp.diag0(k), c0, max_relative = 1e-12);
                }
            }
        }
    }

    // Local limit: sqrt(2 pi sigma^2 n) P(S_n = n-1) -> span, within 1% at
    // n = 1e5 on the reachable residue class.
    #[test]
    fn local_limit_normalization() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let n: u64 = if d.span() == 2 { 99_999 } else { 100_000 };
            let v = closed_diag1(p, n);
            let scaled =
                (2.0 * std::f64::consts::PI * d.sigma2() * n as f64).sqrt() * v / d.span() as f64;
            assert_abs_diff_eq!(scaled, 1.0, epsilon = 0.01);
        }
    }

    // The q_n tail matches 2/sqrt(2 pi sigma^2 N) within a factor of two at
    // N = 1e4.
    #[test]
    fn size_law_tail_mass() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let n = 10_000usize;
            let t = BallotTable::build(&d, n).unwrap();
            let mass: f64 = (1..=n).map(|k| t.q(k)).sum();
            let tail = 1.0 - mass;
            let bound = 2.0 / (2.0 * std::f64::consts::PI * d.sigma2() * n as f64).sqrt();
            assert!(
                tail > 0.5 * bound && tail < 2.0 * bound,
                "{}: tail {tail} vs bound {bound}",
                p.name()
            );
        }
    }

    // Entries live in [0,1] and vanish exactly off the reachable residue
    // classes (k ≡ 1 and m ≡ 0 mod span).
    #[test]
    fn residue_class_support() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let h = d.span() as usize;
            let t = BallotTable::build(&d, 300).unwrap();
            for k in 1..=300usize {
                let v1 = t.diag1(k);
                let v0 = t.diag0(k);
                assert!((0.0..=1.0).contains(&v1) && (0.0..=1.0).contains(&v0));
                if (k - 1) % h != 0 {
                    assert_eq!(v1, 0.0);
                }
                if k % h != 0 {
                    assert_eq!(v0, 0.0);
                }
            }
        }
    }

    #[test]
    fn fullbinary_custom_matches_closed_form() {
        let d = OffspringDist::custom(vec![0.5, 0.0, 0.5]).unwrap();
        let t = BallotTable::build(&d, 200).unwrap();
        assert_eq!(t.method(), TableMethod::ConvolutionDP);
        let closed = BallotTable::build(&OffspringDist::preset(Preset::FullBinary), 200).unwrap();
        for k in 1..=200 {
            let c1 = closed.diag1(k);
            let c0 = closed.diag0(k);
            if c1 == 0.0 {
                assert_eq!(t.diag1(k), 0.0);
            } else {
                assert_relative_eq!(t.diag1(k), c1, max_relative = 1e-13);
            }
            if c0 == 0.0 {
                assert_eq!(t.diag0(k), 0.0);
            } else {
                assert_relative_eq!(t.diag0(k), c0, max_relative = 1e-13);
            }
        }
    }

    // The recurrence-built table and the pointwise log-gamma forms are
    // independent evaluations of the same numbers; the log route's own
    // noise (|exponent| * eps) sets the tolerance.
    #[test]
    fn table_matches_pointwise_log_forms() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let t = BallotTable::build(&d, 400).unwrap();
            for k in 1..=400usize {
                let c1 = closed_diag1(p, k as u64);
                let c0 = closed_diag0(p, k as u64);
                assert_relative_eq!(t.diag1(k), c1, max_relative = 5e-12);
                assert_relative_eq!(t.diag0(k), c0, max_relative = 5e-12);
            }
        }
    }

    #[test]
    fn custom_tree_size_pmf_shortcuts() {
        let d = OffspringDist::custom(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(tree_size_pmf(&d, 4).unwrap(), 0.0);
        assert_eq!(tree_size_pmf(&d, 1).unwrap(), 0.5);
    }

    #[test]
    fn custom_dp_budget() {
        let d = OffspringDist::custom(vec![0.25, 0.5, 0.25]).unwrap();
        assert!(matches!(
            BallotTable::build(&d, 2_000_000),
            Err(GwError::CapacityExceeded)
        ));
        let t = BallotTable::build(&d, 64).unwrap();
        // Must agree with the Binomial212 closed form.
        for k in 1..=64 {
            assert_relative_eq!(
                t.diag1(k),
                closed_diag1(Preset::Binomial212, k as u64),
                max_relative = 1e-12
            );
        }
    }
}
