//! Closed proper convex functions built from a small symbolic algebra, with
//! exact proximal, recession and domain oracles.

mod function;
mod scalar_atom;
mod set;
pub(crate) mod solve;

pub use function::{AtomTerm, CpcFunction, FunctionSpec, IsometryMap};
pub use scalar_atom::{Interval, ScalarAtom, PROX_TOL};
pub use set::{project_psd_svec, project_soc, CompiledSet, SetKind, SetSpec, DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};
