//! ADMM with structured subproblem solvers, regularity checks and the
//! reduction to Douglas-Rachford splitting.

mod diagnose;
mod iterate;
mod problem;
mod reduce;
mod spec;

pub use diagnose::{diagnose_admm, AdmmDiagnosis, AdmmReport};
pub use iterate::{admm_step, run_admm, AdmmState, AdmmTrace};
pub use problem::{check_regularity_side, AdmmProblem, Regularity, ISOMETRY_TOL, REGULARITY_TOL};
pub use reduce::{check_equivalence, reduce_to_drs, AdmmCase, Equivalence, ReducedPair};
pub use spec::AdmmSpec;
