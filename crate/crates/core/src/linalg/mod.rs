//! Sparse kernels for filter application and a dense symmetric
//! eigensolver for spectral oracles.

mod eigen;
mod sparse;

pub use eigen::{sym_eig, sym_eig_with_cap, EigenDecomposition, DEFAULT_EIG_CAP};
pub use sparse::SparseMatrix;
