//! Exact moments of additive functionals through generating functions.
//!
//! With y(z) the tree-size generating function and B(z) the toll series,
//! the moment generating functions M_l(z) = sum_n q_n m_n^(l) z^n obey
//!
//!   M_l = (z y'/y) sum_{m=0}^{l} (1/m!) sum'' multinomial(l; l_0..l_m)
//!           B^{Hadamard l_0} had [ z M_{l_1} ... M_{l_m} Phi^(m)(y) ],
//!
//! where the inner sum runs over tuples summing to l with each of
//! l_1..l_m in [1, l). Conditioning on the root degree produces the
//! composition with Phi^(m); solving for the M_l term linear in itself
//! produces the z y'/y prefactor. The two-toll extension replaces parts
//! by pairs (l_i, r_i) with 1 <= l_i + r_i < l + r and carries a second
//! Hadamard factor; its m = 0 term is needed to reproduce the one-toll
//! recursion and is included even though the pure-toll term is sometimes
//! displayed starting from m = 1.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{GwError, Result};
use crate::exact::{mu_series, powc, BallotTable};
use crate::genfunc::series::TruncSeries;
use crate::offspring::{Kind, OffspringDist, Preset};

/// Where a moment table's entries came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GenFunc,
    BruteForce,
    MonteCarlo,
}

/// Moments m_n^{(l1,l2)} = E[F1(T_n)^{l1} F2(T_n)^{l2}] keyed by
/// (n, l1, l2); single-toll tables use l2 = 0 throughout.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub dist: OffspringDist,
    pub alpha: Complex64,
    pub alpha2: Option<Complex64>,
    pub centered: bool,
    pub centered2: Option<bool>,
    /// The subtracted mean when centered; both routes comparing against
    /// this table must reuse the same value.
    pub mu: Option<Complex64>,
    pub mu2: Option<Complex64>,
    pub entries: HashMap<(u64, u32, u32), Complex64>,
    pub provenance: Provenance,
}

impl MomentTable {
    pub fn get(&self, n: u64, ell1: u32, ell2: u32) -> Option<Complex64> {
        self.entries.get(&(n, ell1, ell2)).copied()
    }
}

/// q_n coefficients of y(z) = sum q_n z^n through the given order.
pub fn y_series(dist: &OffspringDist, order: usize) -> Result<TruncSeries> {
    if order < 1 {
        return Err(GwError::DomainError {
            what: "y_series needs order >= 1",
        });
    }
    let table = BallotTable::build(dist, order)?;
    let mut y = TruncSeries::zero(order);
    for n in 1..=order {
        y.set_coeff(n, Complex64::new(table.q(n), 0.0));
    }
    Ok(y)
}

/// One toll f(n) = n^alpha - mu, with mu = 0 when uncentered. Hadamard
/// powers are evaluated pointwise: n^{alpha l} directly for the plain
/// toll, (n^alpha - mu)^l for the centered one.
struct Toll {
    alpha: Complex64,
    mu: Option<Complex64>,
}

impl Toll {
    fn pow(&self, n: usize, ell: u32) -> Complex64 {
        if ell == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let nf = n as f64;
        match self.mu {
            None => powc(nf, self.alpha * ell as f64),
            Some(mu) => (powc(nf, self.alpha) - mu).powu(ell),
        }
    }
}

fn toll_for(dist: &OffspringDist, alpha: Complex64, centered: bool) -> Result<(Toll, Option<Complex64>)> {
    if !centered {
        return Ok((Toll { alpha, mu: None }, None));
    }
    if !(alpha.re > 0.0 && alpha.re < 0.5) {
        return Err(GwError::CenteredRequiresSubcriticalAlpha);
    }
    // The custom-distribution series is capped by the convolution budget.
    let terms = if Preset::from_kind(dist.kind()).is_some() {
        200_000
    } else {
        20_000
    };
    let mu = mu_series(dist, alpha, terms)?.value;
    Ok((Toll { alpha, mu: Some(mu) }, Some(mu)))
}

pub struct MomentEngine {
    dist: OffspringDist,
    order: usize,
    y: TruncSeries,
    w: TruncSeries,
    toll1: Toll,
    toll2: Option<Toll>,
    phi_m: Vec<Option<TruncSeries>>,
    geo_recip: Option<TruncSeries>,
    memo: HashMap<(u32, u32), TruncSeries>,
}

impl MomentEngine {
    fn new(dist: &OffspringDist, order: usize, toll1: Toll, toll2: Option<Toll>) -> Result<MomentEngine> {
        // One extra coefficient feeds the logarithmic derivative, which
        // loses an order to the valuation shift.
        let y_ext = y_series(dist, order + 1)?;
        let w = y_ext.zlogderiv()?;
        Ok(MomentEngine {
            dist: dist.clone(),
            order,
            y: y_ext.truncated(order),
            w,
            toll1,
            toll2,
            phi_m: Vec::new(),
            geo_recip: None,
            memo: HashMap::new(),
        })
    }

    /// Phi^(m)(y(z)) as a series. Polynomial offspring laws compose
    /// exactly; Poisson shares one series exponential across all m;
    /// geometric uses reciprocal powers.
    fn phi_deriv(&mut self, m: usize) -> Result<TruncSeries> {
        if let Some(Some(s)) = self.phi_m.get(m) {
            return Ok(s.clone());
        }
        let s = match self.dist.kind() {
            Kind::Poisson1 => {
                // every derivative of e^{w-1} is itself
                if let Some(Some(s0)) = self.phi_m.first() {
                    s0.clone()
                } else {
                    self.y.exp_series().scale(Complex64::new((-1.0f64).exp(), 0.0))
                }
            }
            Kind::Geometric12 => {
                // Phi^(m)(w) = m! (2-w)^{-(m+1)}
                if self.geo_recip.is_none() {
                    let two_minus_y = TruncSeries::constant(Complex64::new(2.0, 0.0), self.order)
                        .sub(&self.y);
                    self.geo_recip = Some(two_minus_y.recip()?);
                }
                let r = self.geo_recip.as_ref().unwrap();
                let mut s = r.clone();
                for _ in 0..m {
                    s = s.mul(r);
                }
                s.scale(Complex64::new(factorial(m as u32), 0.0))
            }
            Kind::Binomial212 | Kind::FullBinary | Kind::Custom => {
                let cap = self
                    .dist
                    .support_max()
                    .expect("finite-support law has a top degree") as usize;
                self.poly_deriv(m, cap)
            }
        };
        if self.phi_m.len() <= m {
            self.phi_m.resize(m + 1, None);
        }
        self.phi_m[m] = Some(s.clone());
        Ok(s)
    }

    /// Horner composition of the m-th derivative of a polynomial pgf
    /// with y: Phi^(m)(w) = sum_{k>=m} p_k k!/(k-m)! w^{k-m}.
    fn poly_deriv(&self, m: usize, cap: usize) -> TruncSeries {
        if m > cap {
            return TruncSeries::zero(self.order);
        }
        let mut acc = TruncSeries::zero(self.order);
        for j in (0..=cap - m).rev() {
            let k = j + m;
            let mut c = self.dist.p(k as u32);
            for i in 0..m {
                c *= (k - i) as f64;
            }
            acc = acc.mul(&self.y);
            acc.set_coeff(0, acc.coeff(0) + Complex64::new(c, 0.0));
        }
        acc
    }

    /// M_{l,r}(z), memoized; total l + r >= 1.
    fn m_series(&mut self, l: u32, r: u32) -> Result<TruncSeries> {
        if let Some(s) = self.memo.get(&(l, r)) {
            return Ok(s.clone());
        }
        let tot = l + r;
        debug_assert!(tot >= 1);
        let mut acc = TruncSeries::zero(self.order);
        for (l0, r0, parts) in part_multisets(l, r) {
            let mut bracket = self.phi_deriv(parts.len())?;
            for &(li, ri) in &parts {
                let factor = self.m_series(li, ri)?;
                bracket = bracket.mul(&factor);
            }
            let bracket = bracket.shift_up();
            let factor = multiset_factor(l, r, l0, r0, &parts);
            for n in 1..=self.order {
                let mut t = bracket.coeff(n) * factor;
                if t == Complex64::new(0.0, 0.0) {
                    continue;
                }
                t *= self.toll1.pow(n, l0);
                if let Some(t2) = &self.toll2 {
                    t *= t2.pow(n, r0);
                }
                acc.set_coeff(n, acc.coeff(n) + t);
            }
        }
        let m = self.w.mul(&acc);
        self.memo.insert((l, r), m.clone());
        Ok(m)
    }

    fn fill_table(&mut self, table: &mut MomentTable, ell1: u32, ell2: u32) -> Result<()> {
        for l1 in 0..=ell1 {
            for l2 in 0..=ell2 {
                if l1 + l2 == 0 {
                    continue;
                }
                let m = self.m_series(l1, l2)?;
                for n in 1..=self.order {
                    let qn = self.y.coeff(n).re;
                    if qn > 0.0 {
                        table
                            .entries
                            .insert((n as u64, l1, l2), m.coeff(n) / qn);
                    }
                }
            }
        }
        Ok(())
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Multisets of parts for the recursion at total weight l + r: pairs
/// (l_i, r_i) with 1 <= l_i + r_i < l + r, listed nondecreasingly, with
/// leftovers (l_0, r_0) going to the toll powers. The empty multiset is
/// the pure-toll term.
fn part_multisets(l: u32, r: u32) -> Vec<(u32, u32, Vec<(u32, u32)>)> {
    let mut out = Vec::new();
    let mut parts = Vec::new();
    extend_multiset(l, r, l + r, (0, 0), &mut parts, &mut out);
    out
}

fn extend_multiset(
    l_rem: u32,
    r_rem: u32,
    tot: u32,
    min_pair: (u32, u32),
    parts: &mut Vec<(u32, u32)>,
    out: &mut Vec<(u32, u32, Vec<(u32, u32)>)>,
) {
    out.push((l_rem, r_rem, parts.clone()));
    for li in 0..=l_rem {
        for ri in 0..=r_rem {
            let s = li + ri;
            if s == 0 || s >= tot || (li, ri) < min_pair {
                continue;
            }
            parts.push((li, ri));
            extend_multiset(l_rem - li, r_rem - ri, tot, (li, ri), parts, out);
            parts.pop();
        }
    }
}

/// l!/(l_0! prod l_i!) r!/(r_0! prod r_i!) / prod (multiplicity!), the
/// (1/m!) of the recursion already cancelled against the count of
/// orderings of the m slots.
fn multiset_factor(l: u32, r: u32, l0: u32, r0: u32, parts: &[(u32, u32)]) -> f64 {
    let mut f = factorial(l) / factorial(l0) * factorial(r) / factorial(r0);
    let mut i = 0;
    while i < parts.len() {
        let mut run = 1;
        while i + run < parts.len() && parts[i + run] == parts[i] {
            run += 1;
        }
        f /= factorial(run as u32);
        for _ in 0..run {
            f /= factorial(parts[i].0) * factorial(parts[i].1);
        }
        i += run;
    }
    f
}

/// m_n^{(j)} = E[F(T_n)^j] for all j <= ell and n <= order with q_n > 0,
/// where F is the additive functional of f(n) = n^alpha (minus mu(alpha)
/// when centered).
pub fn moment_series(
    dist: &OffspringDist,
    alpha: Complex64,
    ell: u32,
    order: usize,
    centered: bool,
) -> Result<MomentTable> {
    if ell < 1 {
        return Err(GwError::DomainError {
            what: "moment_series needs ell >= 1",
        });
    }
    let (toll1, mu) = toll_for(dist, alpha, centered)?;
    let mut engine = MomentEngine::new(dist, order, toll1, None)?;
    let mut table = MomentTable {
        dist: dist.clone(),
        alpha,
        alpha2: None,
        centered,
        centered2: None,
        mu,
        mu2: None,
        entries: HashMap::new(),
        provenance: Provenance::GenFunc,
    };
    engine.fill_table(&mut table, ell, 0)?;
    Ok(table)
}

/// Mixed moments m_n^{(j1,j2)} = E[F1(T_n)^{j1} F2(T_n)^{j2}] for all
/// j1 <= ell1, j2 <= ell2 with j1 + j2 >= 1.
#[allow(clippy::too_many_arguments)]
pub fn mixed_moment_series(
    dist: &OffspringDist,
    alpha1: Complex64,
    alpha2: Complex64,
    ell1: u32,
    ell2: u32,
    order: usize,
    centered1: bool,
    centered2: bool,
) -> Result<MomentTable> {
    if ell1 + ell2 < 1 {
        return Err(GwError::DomainError {
            what: "mixed_moment_series needs ell1 + ell2 >= 1",
        });
    }
    let (toll1, mu1) = toll_for(dist, alpha1, centered1)?;
    let (toll2, mu2) = toll_for(dist, alpha2, centered2)?;
    let mut engine = MomentEngine::new(dist, order, toll1, Some(toll2))?;
    let mut table = MomentTable {
        dist: dist.clone(),
        alpha: alpha1,
        alpha2: Some(alpha2),
        centered: centered1,
        centered2: Some(centered2),
        mu: mu1,
        mu2,
        entries: HashMap::new(),
        provenance: Provenance::GenFunc,
    };
    engine.fill_table(&mut table, ell1, ell2)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{brute_mixed_moment, brute_moment, BruteToll};
    use crate::exact::mean_xn;
    use crate::offspring::Preset;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn y_series_leading_coefficients() {
        for p in Preset::ALL {
            let d = OffspringDist::preset(p);
            let y = y_series(&d, 8).unwrap();
            assert_eq!(y.coeff(0), c(0.0, 0.0));
            assert_abs_diff_eq!(y.coeff(1).re, d.p(0), epsilon = 1e-16);
        }
        // Ge(1/2): q_3 = (1/3) 2^{-5} C(4,2) = 1/16
        let ge = OffspringDist::preset(Preset::Geometric12);
        let y = y_series(&ge, 8).unwrap();
        assert_abs_diff_eq!(y.coeff(3).re, 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn y_solves_its_defining_equation() {
        // y - z Phi(y) = 0 through the truncation order
        let mut dists: Vec<OffspringDist> =
            Preset::ALL.iter().map(|&p| OffspringDist::preset(p)).collect();
        dists.push(OffspringDist::custom(vec![0.4, 0.3, 0.2, 0.1]).unwrap());
        for d in &dists {
            let order = 96;
            let toll = Toll {
                alpha: c(0.0, 0.0),
                mu: None,
            };
            let mut engine = MomentEngine::new(&d, order, toll, None).unwrap();
            let phi = engine.phi_deriv(0).unwrap();
            let residual = engine.y.sub(&phi.shift_up());
            for n in 0..=order {
                assert_abs_diff_eq!(residual.coeff(n).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zlogderiv_of_ge_tree_function_is_central_binomial() {
        // y = 1 - sqrt(1-z) for Ge(1/2), so z y'/y = 1/2 + (1/2)(1-z)^{-1/2};
        // the n-th coefficient is C(2n,n) 4^{-n} / 2 with a doubled constant
        let ge = OffspringDist::preset(Preset::Geometric12);
        let w = y_series(&ge, 201).unwrap().zlogderiv().unwrap();
        let mut cb = 1.0f64;
        assert_abs_diff_eq!(w.coeff(0).re, 1.0, epsilon = 1e-15);
        for n in 1..=200usize {
            cb *= 1.0 - 0.5 / n as f64;
            assert_relative_eq!(w.coeff(n).re, 0.5 * cb, max_relative = 1e-13);
            assert_abs_diff_eq!(w.coeff(n).im, 0.0, epsilon = 1e-16);
        }
    }

    #[test]
    fn zero_alpha_moments_count_vertices() {
        // X_n(0) = n surely: m_n^{(j)} = n^j for any offspring law
        let dists = [
            OffspringDist::preset(Preset::Poisson1),
            OffspringDist::custom(vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
        ];
        for d in &dists {
            let t = moment_series(&d, c(0.0, 0.0), 3, 100, false).unwrap();
            for n in [1u64, 7, 31, 100] {
                for j in 1..=3u32 {
                    let got = t.get(n, j, 0).unwrap();
                    assert_relative_eq!(got.re, (n as f64).powi(j as i32), max_relative = 1e-12);
                    assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn first_moment_matches_subtree_sum_route() {
        // the l = 1 slice must agree with the direct formula
        // E X_n(alpha) = n sum_k P(S_{n-k}=n-k) P(S_k=k-1) k^{alpha-1} / P(S_n=n-1)
        let po = OffspringDist::preset(Preset::Poisson1);
        let t = moment_series(&po, c(-1.0, 0.0), 1, 200, false).unwrap();
        for n in 1..=200usize {
            let got = t.get(n as u64, 1, 0).unwrap();
            let want = mean_xn(&po, n, c(-1.0, 0.0)).unwrap();
            assert_relative_eq!(got.re, want.re, max_relative = 1e-10);
        }
    }

    #[test]
    fn second_moment_matches_enumeration() {
        let bi = OffspringDist::preset(Preset::Binomial212);
        let t = moment_series(&bi, c(1.0, 0.0), 2, 8, false).unwrap();
        let brute = brute_moment(&bi, c(1.0, 0.0), 2, 4, None).unwrap();
        let got = t.get(4, 2, 0).unwrap();
        assert_abs_diff_eq!((got - brute).norm(), 0.0, epsilon = 1e-12 * brute.norm());
    }

    #[test]
    fn mixed_moment_matches_enumeration() {
        let po = OffspringDist::preset(Preset::Poisson1);
        let t = mixed_moment_series(&po, c(1.0, 0.0), c(2.0, 0.0), 1, 1, 8, false, false).unwrap();
        let brute = brute_mixed_moment(
            &po,
            &BruteToll::plain(c(1.0, 0.0), 1),
            Some(&BruteToll::plain(c(2.0, 0.0), 1)),
            5,
        )
        .unwrap();
        let got = t.get(5, 1, 1).unwrap();
        assert_relative_eq!(got.re, brute.re, max_relative = 1e-12);
    }

    #[test]
    fn brute_force_agreement_across_tolls_and_orders() {
        // moment-table invariant: GenFunc and BruteForce provenances agree
        // wherever both exist
        let dists = [
            OffspringDist::preset(Preset::Geometric12),
            OffspringDist::preset(Preset::FullBinary),
            OffspringDist::custom(vec![0.55, 0.0, 0.35, 0.1]).unwrap(),
        ];
        for d in &dists {
            let t = moment_series(&d, c(0.25, 0.0), 3, 9, false).unwrap();
            for n in 1..=9usize {
                for j in 1..=3u32 {
                    let Some(got) = t.get(n as u64, j, 0) else {
                        continue;
                    };
                    let brute = brute_moment(&d, c(0.25, 0.0), j, n, None).unwrap();
                    assert_relative_eq!(got.re, brute.re, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn centered_toll_agrees_with_enumeration_on_shared_mu() {
        let po = OffspringDist::preset(Preset::Poisson1);
        let t = moment_series(&po, c(0.25, 0.0), 2, 8, true).unwrap();
        let mu = t.mu.unwrap();
        for n in [4usize, 7] {
            let brute = brute_moment(&po, c(0.25, 0.0), 2, n, Some(mu)).unwrap();
            let got = t.get(n as u64, 2, 0).unwrap();
            assert_relative_eq!(got.re, brute.re, max_relative = 1e-10);
        }
    }

    #[test]
    fn centered_outside_its_strip_is_rejected() {
        let po = OffspringDist::preset(Preset::Poisson1);
        for alpha in [c(1.0, 0.0), c(0.5, 0.3), c(-0.25, 0.0)] {
            assert_eq!(
                moment_series(&po, alpha, 1, 8, true).unwrap_err(),
                GwError::CenteredRequiresSubcriticalAlpha
            );
        }
    }

    #[test]
    fn degenerate_mixed_table_reduces_to_single() {
        let ge = OffspringDist::preset(Preset::Geometric12);
        let single = moment_series(&ge, c(0.7, 0.2), 2, 40, false).unwrap();
        let mixed =
            mixed_moment_series(&ge, c(0.7, 0.2), c(3.0, 0.0), 2, 0, 40, false, false).unwrap();
        for n in 1..=40u64 {
            for j in 1..=2u32 {
                assert_eq!(single.get(n, j, 0).unwrap(), mixed.get(n, j, 0).unwrap());
            }
        }
    }

    #[test]
    fn conjugate_pair_gives_real_absolute_moments() {
        // E|X_n(alpha)|^2 = E[X_n(alpha) X_n(conj alpha)]
        let po = OffspringDist::preset(Preset::Poisson1);
        let a = c(0.8, 0.6);
        let t = mixed_moment_series(&po, a, a.conj(), 1, 1, 60, false, false).unwrap();
        for n in 1..=60u64 {
            let v = t.get(n, 1, 1).unwrap();
            assert!(v.re > 0.0);
            assert!(v.im.abs() <= 1e-12 * v.re);
        }
    }

    #[test]
    fn exchange_symmetry_of_mixed_tables() {
        let bi = OffspringDist::preset(Preset::Binomial212);
        let a1 = c(1.0, 0.5);
        let a2 = c(0.3, 0.0);
        let t12 = mixed_moment_series(&bi, a1, a2, 2, 1, 30, false, false).unwrap();
        let t21 = mixed_moment_series(&bi, a2, a1, 1, 2, 30, false, false).unwrap();
        for (&(n, l1, l2), &v) in &t12.entries {
            let mirror = t21.get(n, l2, l1).unwrap();
            assert_abs_diff_eq!((v - mirror).norm(), 0.0, epsilon = 1e-13 * v.norm().max(1.0));
        }
    }

    #[test]
    fn conjugating_alpha_conjugates_the_table() {
        let ge = OffspringDist::preset(Preset::Geometric12);
        let a = c(1.2, 0.9);
        let t = moment_series(&ge, a, 2, 50, false).unwrap();
        let tc = moment_series(&ge, a.conj(), 2, 50, false).unwrap();
        for (&(n, l1, l2), &v) in &t.entries {
            let w = tc.get(n, l1, l2).unwrap();
            assert_abs_diff_eq!((w - v.conj()).norm(), 0.0, epsilon = 1e-13 * v.norm());
        }
    }

    #[test]
    fn centered_scaled_moments_stabilize() {
        // sigma^l n^{-l(Re alpha + 1/2)} m~_n^{(l)} has a limit; the gap
        // between successive dyadic n must shrink (trend only, no rate)
        let po = OffspringDist::preset(Preset::Poisson1);
        let alpha = 0.25f64;
        let t = moment_series(&po, c(alpha, 0.0), 2, 512, true).unwrap();
        let scaled = |n: u64| {
            let m = t.get(n, 2, 0).unwrap().norm();
            po.sigma2() * m / (n as f64).powf(2.0 * (alpha + 0.5))
        };
        let gaps: Vec<f64> = [64u64, 128, 256]
            .iter()
            .map(|&n| (scaled(2 * n) - scaled(n)).abs())
            .collect();
        assert!(gaps[1] < gaps[0]);
        assert!(gaps[2] < gaps[1]);
    }

    #[test]
    fn first_moment_singularity_scaling() {
        // m_n^{(1)} / n^{alpha + 1/2} -> Gamma(alpha - 1/2) / (sqrt 2 sigma
        // Gamma(alpha)); at alpha = 1 the limit is sqrt(pi/2) / sigma
        let po = OffspringDist::preset(Preset::Poisson1);
        let t = moment_series(&po, c(1.0, 0.0), 1, 512, false).unwrap();
        let n = 500u64;
        let got = t.get(n, 1, 0).unwrap().re / (n as f64).powf(1.5);
        let want = (std::f64::consts::PI / 2.0).sqrt();
        assert_relative_eq!(got, want, max_relative = 0.03);
    }
}
