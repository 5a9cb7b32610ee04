//! Grids and eigenvalue kernels shared by every model.

mod envelope;
pub mod grid;
pub mod hermitian;
pub mod krylov;
pub mod tridiag;

pub use grid::{Grid1D, Grid2D, GridKind};
pub use hermitian::{Boundary, HermitianGridOperator, OperatorBuilder};
pub use krylov::{sparse_lowest_eigs, sparse_lowest_pairs, EigenPairs};
pub use tridiag::{
    sturm_count, tridiag_eigenvector, tridiag_lowest_eigs, TridiagonalOperator,
};

/// Richardson extrapolation of a second-order quantity computed at spacing
/// `Δ` (`coarse`) and `Δ/2` (`fine`). Returns `(extrapolated, delta)` where
/// `delta` is the size of the correction applied to `fine`.
pub fn richardson(coarse: f64, fine: f64) -> (f64, f64) {
    let correction = (fine - coarse) / 3.0;
    (fine + correction, correction.abs())
}
