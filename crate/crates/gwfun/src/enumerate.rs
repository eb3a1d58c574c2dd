//! Exhaustive enumeration of small conditioned trees.
//!
//! Ordered rooted trees on n vertices are walked as preorder degree
//! sequences, pruned by the Lukasiewicz path condition: after any proper
//! prefix the number of open slots stays at least 1 and never exceeds the
//! number of vertices still to place. Each complete tree contributes its
//! Galton-Watson weight prod p_{d_v}, so conditional moments come out as
//! weighted sums divided by the total weight P(|T| = n). This is the
//! ground-truth oracle for the generating-function recursion; it shares no
//! code path with it.

use num_complex::Complex64;

use crate::error::{GwError, Result};
use crate::exact::powc;
use crate::offspring::OffspringDist;

/// One toll specification: f(n) = n^alpha, shifted by mu when centering.
#[derive(Debug, Clone, Copy)]
pub struct BruteToll {
    pub alpha: Complex64,
    pub mu: Option<Complex64>,
    pub ell: u32,
}

impl BruteToll {
    pub fn plain(alpha: Complex64, ell: u32) -> BruteToll {
        BruteToll {
            alpha,
            mu: None,
            ell,
        }
    }

    fn eval(&self, size: usize) -> Complex64 {
        let v = powc(size as f64, self.alpha);
        match self.mu {
            Some(mu) => v - mu,
            None => v,
        }
    }
}

/// Visit every ordered tree with exactly n vertices whose degrees carry
/// positive mass; the callback gets the preorder degree sequence and the
/// tree weight prod p_{d_v}.
pub fn for_each_tree(dist: &OffspringDist, n: usize, visit: &mut impl FnMut(&[u32], f64)) {
    debug_assert!(n >= 1);
    // A tree on n vertices cannot have a degree above n - 1.
    let support: Vec<(u32, f64)> = (0..n as u32)
        .filter_map(|k| {
            let p = dist.p(k);
            (p > 0.0).then_some((k, p))
        })
        .collect();
    let mut degs = vec![0u32; n];
    descend(&support, n, 0, 1, 1.0, &mut degs, visit);
}

fn descend(
    support: &[(u32, f64)],
    n: usize,
    placed: usize,
    open: usize,
    weight: f64,
    degs: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32], f64),
) {
    if placed == n {
        if open == 0 {
            visit(degs, weight);
        }
        return;
    }
    debug_assert!(open >= 1);
    let remaining = n - placed;
    for &(d, p) in support {
        // Placing degree d consumes one open slot and opens d new ones.
        let next_open = open - 1 + d as usize;
        if next_open + placed + 1 > n {
            break;
        }
        let ok = if remaining == 1 {
            next_open == 0
        } else {
            next_open >= 1
        };
        if !ok {
            continue;
        }
        degs[placed] = d;
        descend(support, n, placed + 1, next_open, weight * p, degs, visit);
    }
}

/// Subtree sizes in preorder, recovered from the degree sequence with a
/// reverse scan: each vertex absorbs the sizes of its d children, which
/// sit on top of the stack.
pub fn subtree_sizes(degs: &[u32]) -> Vec<usize> {
    let n = degs.len();
    let mut sizes = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in (0..n).rev() {
        let mut s = 1usize;
        for _ in 0..degs[i] {
            s += stack.pop().expect("degree sequence is a valid tree");
        }
        sizes[i] = s;
        stack.push(s);
    }
    debug_assert_eq!(stack, vec![n]);
    sizes
}

/// P(|T| = n) by direct enumeration.
pub fn brute_size_probability(dist: &OffspringDist, n: usize) -> f64 {
    let mut total = 0.0;
    for_each_tree(dist, n, &mut |_, w| total += w);
    total
}

/// E[F1(T_n)^{ell1} F2(T_n)^{ell2}] by direct enumeration, where each
/// F is the additive functional of the corresponding toll.
pub fn brute_mixed_moment(
    dist: &OffspringDist,
    toll1: &BruteToll,
    toll2: Option<&BruteToll>,
    n: usize,
) -> Result<Complex64> {
    let mut total = 0.0f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_tree(dist, n, &mut |degs, w| {
        total += w;
        let sizes = subtree_sizes(degs);
        let mut f1 = Complex64::new(0.0, 0.0);
        let mut f2 = Complex64::new(0.0, 0.0);
        for &s in &sizes {
            f1 += toll1.eval(s);
            if let Some(t2) = toll2 {
                f2 += t2.eval(s);
            }
        }
        let mut term = Complex64::new(w, 0.0);
        for _ in 0..toll1.ell {
            term *= f1;
        }
        if let Some(t2) = toll2 {
            for _ in 0..t2.ell {
                term *= f2;
            }
        }
        acc += term;
    });
    if total == 0.0 {
        return Err(GwError::UnreachableSize { n: n as u64 });
    }
    Ok(acc / total)
}

/// E[F(T_n)^ell] by direct enumeration.
pub fn brute_moment(
    dist: &OffspringDist,
    alpha: Complex64,
    ell: u32,
    n: usize,
    mu: Option<Complex64>,
) -> Result<Complex64> {
    brute_mixed_moment(dist, &BruteToll { alpha, mu, ell }, None, n)
}
