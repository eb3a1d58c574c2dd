//! Exact sampling of Galton-Watson trees conditioned on their total size.
//!
//! The conditioned tree on n vertices is equivalent to an iid offspring
//! vector (d_1, ..., d_n) conditioned on sum d_i = n - 1 and rotated to the
//! unique cyclic shift satisfying the preorder ballot property. Because the
//! total is n - 1, coprime to n, every cyclic class of a conditioned vector
//! contains n distinct sequences of equal weight and exactly one valid
//! rotation, so rotating an exchangeable conditioned vector reproduces the
//! conditioned tree law exactly.
//!
//! Each preset admits an O(n) combinatorial construction of the conditioned
//! vector with no rejection step:
//!
//! * Poisson(1): conditioned coordinates are multinomial, so throw n - 1
//!   balls into n boxes uniformly.
//! * Geometric(1/2): every vector has the same weight 2^{-(2n-1)}, so draw
//!   a uniform weak composition of n - 1 into n parts (stars and bars).
//! * Binomial(2, 1/2): weights are prod C(2, d_i), so pick a uniform
//!   (n-1)-subset of 2n half-edge slots, two per vertex.
//! * Full binary: all valid vectors are equally likely, so pick which
//!   (n-1)/2 vertices get two children.
//!
//! Custom distributions sample coordinates sequentially from the exact
//! conditional law using a table of tail-sum probabilities when the table
//! fits a fixed memory budget, and fall back to rejection on the iid sum
//! otherwise (expected attempts grow like sqrt(n) by the local CLT).

use rand::Rng;

use crate::error::{GwError, Result};
use crate::offspring::{Kind, OffspringDist};
use crate::sampler::shape::TreeShape;

/// Largest n for which the custom-distribution conditional table is built;
/// the table holds n^2 probabilities (about 34 MB of f64 at the cap).
const CUSTOM_DP_MAX: usize = 2048;

/// A reusable sampling plan for one (distribution, n) pair. Construction
/// performs the reachability check and any precomputation; `sample` is then
/// cheap and can run concurrently from many threads.
#[derive(Debug, Clone)]
pub struct ConditionedSampler {
    dist: OffspringDist,
    n: usize,
    plan: Plan,
}

#[derive(Debug, Clone)]
enum Plan {
    Multinomial,
    StarsBars,
    HalfEdges,
    BinaryPositions,
    /// tail[m * n + s] = P(d_1 + ... + d_m = s) for the custom pmf.
    CustomTable(Vec<f64>),
    CustomReject,
}

impl ConditionedSampler {
    pub fn new(dist: &OffspringDist, n: usize) -> Result<ConditionedSampler> {
        if n == 0 {
            return Err(GwError::DomainError {
                what: "a tree has at least one vertex",
            });
        }
        if !reachable(dist, n) {
            return Err(GwError::UnreachableSize { n: n as u64 });
        }
        let plan = match dist.kind() {
            Kind::Poisson1 => Plan::Multinomial,
            Kind::Geometric12 => Plan::StarsBars,
            Kind::Binomial212 => Plan::HalfEdges,
            Kind::FullBinary => Plan::BinaryPositions,
            Kind::Custom => {
                if n <= CUSTOM_DP_MAX {
                    Plan::CustomTable(custom_tail_table(dist, n))
                } else {
                    Plan::CustomReject
                }
            }
        };
        Ok(ConditionedSampler {
            dist: dist.clone(),
            n,
            plan,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One conditioned tree. Exact in distribution for the presets and the
    /// tabulated custom range; the rejection fallback is exact as well,
    /// only its running time is random.
    pub fn sample(&self, rng: &mut impl Rng) -> TreeShape {
        let n = self.n;
        let degrees = match &self.plan {
            Plan::Multinomial => {
                let mut d = vec![0u32; n];
                for _ in 0..n - 1 {
                    d[rng.random_range(0..n)] += 1;
                }
                d
            }
            Plan::StarsBars => {
                // n - 1 stars among 2n - 2 symbols; bars close parts.
                let total = 2 * n - 2;
                let mut stars = n - 1;
                let mut d = Vec::with_capacity(n);
                let mut run = 0u32;
                for pos in 0..total {
                    if rng.random_range(0..total - pos) < stars {
                        stars -= 1;
                        run += 1;
                    } else {
                        d.push(run);
                        run = 0;
                    }
                }
                d.push(run);
                d
            }
            Plan::HalfEdges => {
                // A uniform (n-1)-subset of 2n slots, slots 2i and 2i+1
                // belonging to vertex i, realizes weights prod C(2, d_i).
                let total = 2 * n;
                let mut picks = n - 1;
                let mut d = vec![0u32; n];
                for pos in 0..total {
                    if rng.random_range(0..total - pos) < picks {
                        picks -= 1;
                        d[pos / 2] += 1;
                    }
                }
                d
            }
            Plan::BinaryPositions => {
                let mut picks = (n - 1) / 2;
                let mut d = vec![0u32; n];
                for pos in 0..n {
                    if rng.random_range(0..n - pos) < picks {
                        picks -= 1;
                        d[pos] = 2;
                    }
                }
                d
            }
            Plan::CustomTable(tail) => sample_custom_tabulated(&self.dist, n, tail, rng),
            Plan::CustomReject => loop {
                if let Some(d) = try_iid_conditioned(&self.dist, n, rng) {
                    break d;
                }
            },
        };
        rotate_to_tree(degrees, rng)
    }
}

/// One conditioned tree without a reusable plan.
pub fn sample_conditioned(
    dist: &OffspringDist,
    n: usize,
    rng: &mut impl Rng,
) -> Result<TreeShape> {
    Ok(ConditionedSampler::new(dist, n)?.sample(rng))
}

/// Whether P(|T| = n) > 0: n - 1 must be a sum of n support points. The
/// presets reduce to a span check; custom supports can have gaps at small n
/// even in the right residue class, so membership of n - 1 in the semigroup
/// generated by the positive support is sieved explicitly.
pub fn reachable(dist: &OffspringDist, n: usize) -> bool {
    if n == 0 {
        return false;
    }
    match dist.kind() {
        Kind::Poisson1 | Kind::Geometric12 | Kind::Binomial212 => true,
        Kind::FullBinary => n % 2 == 1,
        Kind::Custom => {
            let m = n - 1;
            if m % dist.span() as usize != 0 {
                return false;
            }
            let support: Vec<usize> = (1..=dist.support_max().unwrap_or(0))
                .filter(|&k| dist.p(k) > 0.0)
                .map(|k| k as usize)
                .collect();
            // Any representation uses at most m <= n - 1 < n parts, so the
            // part-count constraint never binds.
            let mut hit = vec![false; m + 1];
            hit[0] = true;
            for s in 1..=m {
                hit[s] = support.iter().any(|&k| k <= s && hit[s - k]);
            }
            hit[m]
        }
    }
}

/// Tail-sum table tail[m][s] = P(S_m = s) for m parts of the custom pmf,
/// m = 0..n-1, s = 0..n-1, flattened row-major.
fn custom_tail_table(dist: &OffspringDist, n: usize) -> Vec<f64> {
    let cap = dist.support_max().unwrap_or(0) as usize;
    let mut tail = vec![0.0f64; n * n];
    tail[0] = 1.0;
    for m in 1..n {
        for s in 0..n {
            let mut acc = 0.0;
            for k in 0..=cap.min(s) {
                let p = dist.p(k as u32);
                if p > 0.0 {
                    acc += p * tail[(m - 1) * n + (s - k)];
                }
            }
            tail[m * n + s] = acc;
        }
    }
    tail
}

fn sample_custom_tabulated(
    dist: &OffspringDist,
    n: usize,
    tail: &[f64],
    rng: &mut impl Rng,
) -> Vec<u32> {
    let cap = dist.support_max().unwrap_or(0) as usize;
    let mut d = Vec::with_capacity(n);
    let mut s = n - 1;
    for i in 0..n {
        let m = n - 1 - i;
        if m == 0 {
            d.push(s as u32);
            break;
        }
        // P(d_i = k | rest) is proportional to p_k P(S_m = s - k);
        // normalizing the weights explicitly absorbs rounding drift.
        let mut total = 0.0;
        for k in 0..=cap.min(s) {
            total += dist.p(k as u32) * tail[m * n + (s - k)];
        }
        debug_assert!(total > 0.0, "conditioned path hit a zero-mass state");
        let mut u = rng.random::<f64>() * total;
        let mut chosen = cap.min(s);
        for k in 0..=cap.min(s) {
            let w = dist.p(k as u32) * tail[m * n + (s - k)];
            if u < w {
                chosen = k;
                break;
            }
            u -= w;
        }
        d.push(chosen as u32);
        s -= chosen;
    }
    debug_assert_eq!(s as u32, *d.last().unwrap());
    d
}

/// One rejection attempt: n iid offspring draws kept only when they sum to
/// exactly n - 1, with an early abort once the partial sum is too large.
fn try_iid_conditioned(dist: &OffspringDist, n: usize, rng: &mut impl Rng) -> Option<Vec<u32>> {
    let target = (n - 1) as u64;
    let mut d = Vec::with_capacity(n);
    let mut sum = 0u64;
    for _ in 0..n {
        let k = dist.sample(rng);
        sum += k as u64;
        if sum > target {
            return None;
        }
        d.push(k);
    }
    (sum == target).then_some(d)
}

/// Rotate a conditioned offspring vector to the unique valid tree encoding.
///
/// A uniform random offset is applied first so the law is insensitive to
/// any ordering artifact of the construction; the cycle lemma then selects
/// the rotation starting right after the first minimum of the prefix walk
/// sum (d_i - 1). Validation inside `from_degrees` doubles as a per-sample
/// ballot check.
fn rotate_to_tree(mut degrees: Vec<u32>, rng: &mut impl Rng) -> TreeShape {
    let n = degrees.len();
    let offset = rng.random_range(0..n);
    degrees.rotate_left(offset);
    let mut walk = 0i64;
    let mut min = i64::MAX;
    let mut argmin = 0usize;
    for (i, &d) in degrees.iter().enumerate() {
        walk += d as i64 - 1;
        if walk < min {
            min = walk;
            argmin = i + 1;
        }
    }
    debug_assert_eq!(walk, -1);
    degrees.rotate_left(argmin % n);
    TreeShape::from_degrees(degrees).expect("cycle lemma rotation is a valid preorder encoding")
}

/// One unconditioned Galton-Watson tree in depth-first order, or None when
/// generation passes `cap` vertices and is abandoned.
pub fn sample_unconditioned(
    dist: &OffspringDist,
    cap: usize,
    rng: &mut impl Rng,
) -> Option<TreeShape> {
    let mut degrees: Vec<u32> = Vec::new();
    let mut open = 1u64;
    while open > 0 {
        if degrees.len() >= cap {
            return None;
        }
        let d = dist.sample(rng);
        degrees.push(d);
        open = open + d as u64 - 1;
    }
    Some(TreeShape::from_degrees(degrees).expect("depth-first generation is a valid encoding"))
}

/// Conditioned tree by plain rejection on the unconditioned sampler. Slow
/// (expected attempts grow like n^{3/2}) but its correctness is immediate
/// from the definition of the conditioned law, which makes it the oracle
/// the O(n) constructions are tested against.
pub fn sample_conditioned_rejection(
    dist: &OffspringDist,
    n: usize,
    rng: &mut impl Rng,
) -> Result<TreeShape> {
    if n == 0 || !reachable(dist, n) {
        return Err(GwError::UnreachableSize { n: n as u64 });
    }
    loop {
        if let Some(t) = sample_unconditioned(dist, n, rng) {
            if t.n() == n {
                return Ok(t);
            }
        }
    }
}
