//! Random generation of conditioned Galton-Watson trees and Monte Carlo
//! estimation of the subtree-size functionals on them.

mod conditioned;
mod mc;
mod shape;

pub use conditioned::{
    reachable, sample_conditioned, sample_conditioned_rejection, sample_unconditioned,
    ConditionedSampler,
};
pub use mc::{
    empirical_moments, fringe_ratio, neg_alpha_cov, rep_rng, sample_functional_values,
    EmpiricalMoments, McEstimate, NegAlphaCov, DEFAULT_SIZE_CAP,
};
pub use shape::{functional, functional_log, TreeShape};
