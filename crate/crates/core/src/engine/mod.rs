//! The Douglas-Rachford fixed-point iteration, its trace and the asymptotic
//! estimators built on it.

mod drs;
mod idv;
mod stats;

pub(crate) use drs::tail_mean;
pub use drs::{drs_step, run, DrsState, DrsTrace, ProbeConfig, OVERFLOW_NORM};
pub use idv::{estimate_idv, IdvEstimate, DECAY_EXPONENT_ZERO, IDV_TOL};
pub use stats::{lsq_slope, objective_stats_from, tail_window, ObjectiveStats, RunningStats};
