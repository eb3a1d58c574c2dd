//! Brownian excursion machinery for the limit law: path sampling on a
//! uniform grid, range-minimum queries, and quadrature of the excursion
//! representations of Y(alpha) and of Y_inf.

mod eval;
mod path;
mod rmq;

pub use eval::{
    check_y_domain, eval_y, sample_y_values, sample_yinf, sample_yinf_values, y_mean_estimate,
    yinf_from_motion, yinf_tail_bound, YForm,
};
pub use path::{excursion_area, sample_excursion, sample_motion, ExcursionPath, MotionPath};
pub use rmq::RmqTable;
