use serde::{Deserialize, Serialize};

use crate::atoms::FunctionSpec;
use crate::linalg::{Matrix, Vector};
use crate::Scalar;

/// `minimize f(x) + g(y) subject to Ax + By = c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AdmmSpec<T> {
    pub f: FunctionSpec<T>,
    pub g: FunctionSpec<T>,
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Vector<T>,
}
