//! Ordered rooted trees as preorder outdegree sequences, with the derived
//! quantities the functionals need: subtree sizes, depths, and the
//! depth-first walk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};
use crate::exact::powc;

/// An ordered rooted tree, stored as the outdegrees of its vertices in
/// depth-first (preorder) order.
///
/// A sequence is valid iff the degrees sum to n - 1 and every proper prefix
/// keeps at least one subtree slot open (the ballot property); both are
/// checked on construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeShape {
    degrees: Vec<u32>,
}

impl TreeShape {
    pub fn from_degrees(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(GwError::DomainError {
                what: "a tree has at least one vertex",
            });
        }
        let n = degrees.len() as u64;
        // open = 1 + sum of (d_i - 1) over the prefix; it must stay positive
        // before the end and hit zero exactly at the end.
        let mut open: u64 = 1;
        for (i, &d) in degrees.iter().enumerate() {
            open = open + d as u64 - 1;
            let last = i + 1 == degrees.len();
            if (open == 0) != last || open > n {
                return Err(GwError::DomainError {
                    what: "degree sequence is not a preorder tree encoding",
                });
            }
        }
        Ok(TreeShape { degrees })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Size of the fringe subtree rooted at each vertex, in preorder.
    ///
    /// Scanning the sequence backwards, each vertex swallows the sizes of
    /// its children, which sit on top of the stack.
    pub fn subtree_sizes(&self) -> Vec<u64> {
        let n = self.degrees.len();
        let mut sizes = vec![0u64; n];
        let mut stack: Vec<u64> = Vec::new();
        for i in (0..n).rev() {
            let mut s = 1u64;
            for _ in 0..self.degrees[i] {
                s += stack.pop().expect("children on stack");
            }
            sizes[i] = s;
            stack.push(s);
        }
        debug_assert_eq!(sizes[0], n as u64);
        sizes
    }

    /// Depth of each vertex (root at 0), in preorder.
    pub fn depths(&self) -> Vec<u32> {
        let n = self.degrees.len();
        let mut depths = vec![0u32; n];
        // Remaining child slots per open ancestor.
        let mut stack: Vec<u32> = Vec::new();
        for (i, &d) in self.degrees.iter().enumerate() {
            if i > 0 {
                while *stack.last().expect("open ancestor") == 0 {
                    stack.pop();
                }
                *stack.last_mut().unwrap() -= 1;
                depths[i] = stack.len() as u32;
            }
            stack.push(d);
        }
        depths
    }

    /// The depth-first walk W(0..2n): W(i) is the depth of the i-th vertex
    /// on the walk that starts and ends at the root, moving to the first
    /// unvisited child when one exists and to the parent otherwise, padded
    /// with the root's depth at both ends so W(0) = W(2n) = 0.
    ///
    /// The walk enters the subtree of each vertex v exactly once and spends
    /// an interval of length 2|subtree(v)| there.
    pub fn depth_first_walk(&self) -> Vec<u32> {
        let n = self.degrees.len();
        let mut w = Vec::with_capacity(2 * n + 1);
        w.push(0);
        // Stack of (depth, remaining children) for the path to the current
        // vertex; `next` is the preorder index of the next unvisited vertex.
        let mut stack: Vec<(u32, u32)> = vec![(0, self.degrees[0])];
        let mut next = 1usize;
        w.push(0);
        while let Some(top) = stack.last_mut() {
            if top.1 > 0 {
                top.1 -= 1;
                let d = top.0 + 1;
                stack.push((d, self.degrees[next]));
                next += 1;
                w.push(d);
            } else {
                stack.pop();
                w.push(stack.last().map_or(0, |t| t.0));
            }
        }
        debug_assert_eq!(w.len(), 2 * n + 1);
        debug_assert_eq!(*w.last().unwrap(), 0);
        w
    }

    /// Histogram of subtree sizes: counts[k] = number of vertices whose
    /// fringe subtree has exactly k vertices.
    pub fn size_counts(&self) -> Vec<u64> {
        let n = self.degrees.len();
        let mut counts = vec![0u64; n + 1];
        for s in self.subtree_sizes() {
            counts[s as usize] += 1;
        }
        counts
    }
}

/// The functional sum over subtree sizes, Sum_v |subtree(v)|^alpha, in one
/// pass for a whole batch of exponents. Sizes repeat heavily, so the sum
/// runs over the distinct sizes present, weighted by multiplicity.
pub fn functional(tree: &TreeShape, alphas: &[Complex64]) -> Vec<Complex64> {
    weighted_sum(tree, alphas, false)
}

/// Same sum with weights |subtree(v)|^alpha ln|subtree(v)|, the derivative
/// of the functional in alpha; at alpha = 0 this is the shape functional.
pub fn functional_log(tree: &TreeShape, alphas: &[Complex64]) -> Vec<Complex64> {
    weighted_sum(tree, alphas, true)
}

fn weighted_sum(tree: &TreeShape, alphas: &[Complex64], log_weight: bool) -> Vec<Complex64> {
    let counts = tree.size_counts();
    let mut out = vec![Complex64::new(0.0, 0.0); alphas.len()];
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let kf = k as f64;
        let cf = c as f64;
        for (slot, &alpha) in out.iter_mut().zip(alphas) {
            let mut w = powc(kf, alpha);
            if log_weight {
                w *= kf.ln();
            }
            *slot += w * cf;
        }
    }
    out
}
