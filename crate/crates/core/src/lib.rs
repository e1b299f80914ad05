//! Douglas-Rachford splitting and ADMM with diagnostics for pathological
//! convex programs: infeasibility certificates, infimal displacement vector
//! estimates and a case classifier.

// NaN-aware negated comparisons are deliberate throughout
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod admm;
pub mod atoms;
pub mod engine;
mod error;
mod ext;
pub mod linalg;
pub mod pathology;
mod scalar;
pub mod verify;
pub mod zoo;

pub use atoms::{CpcFunction, FunctionSpec, ScalarAtom, SetKind, SetSpec};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use linalg::{Matrix, SymMat, Vector};
pub use scalar::Scalar;

pub type Vector64 = Vector<f64>;
pub type Vector32 = Vector<f32>;
pub type FunctionSpec64 = FunctionSpec<f64>;
pub type CpcFunction64 = CpcFunction<f64>;
