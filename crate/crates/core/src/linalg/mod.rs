//! Self-contained symmetric linear algebra.

pub mod banded;
pub mod dense;
pub mod layered;
pub mod tridiag;

pub use banded::{BandedLdl, BandedSym};
pub use dense::{symmetric_eigen, tridiagonal_eigen, DenseMatrix, SymEigen};
pub use layered::layered_count_below;
pub use tridiag::{sturm_count, window_eigenpairs};
