//! Small dense linear algebra used by the proximal kernels.

mod eigh;
mod matrix;
mod symmat;
mod vector;

pub use eigh::{eigh, EigDecomp, MAX_EIGH_ORDER};
pub use matrix::Matrix;
pub use symmat::{order_from_svec_len, packed_index, smat, svec, svec_len, SymMat};
pub use vector::Vector;
