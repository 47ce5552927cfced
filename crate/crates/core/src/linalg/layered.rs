//! Eigenvalue counts for block-tridiagonal symmetric matrices whose
//! off-diagonal blocks are identities, the shape of a lattice Laplacian cut
//! into layers along one axis.
//!
//! The count of `H - σ` is the sum of the inertias of the successive Schur
//! complements `S_k = A_k - σ - S_{k-1}^{-1}`, each diagonalized densely. For
//! single-site layers this is the classical Sturm sequence.

use crate::error::Result;
use crate::linalg::dense::{symmetric_eigen, DenseMatrix};
use crate::scalar::Real;

/// Number of eigenvalues strictly below `sigma` of the matrix with diagonal
/// blocks `layers` and identity couplings between consecutive layers.
pub fn layered_count_below<T: Real>(layers: &[DenseMatrix<T>], sigma: T) -> Result<usize> {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut inv: Option<DenseMatrix<T>> = None;
    for a in layers {
        let m = a.dim();
        let mut s = a.clone();
        for i in 0..m {
            s[(i, i)] -= sigma;
        }
        if let Some(p) = &inv {
            for i in 0..m {
                for j in 0..m {
                    s[(i, j)] -= p[(i, j)];
                }
            }
        }
        let eig = symmetric_eigen(&s, true)?;
        let z = eig.vectors.expect("vectors requested");
        // an exact zero is read as +0, so sigma itself is not counted
        let vals: Vec<T> = eig.values.iter().map(|&v| if v == T::zero() { tiny } else { v }).collect();
        count += vals.iter().filter(|&&v| v < T::zero()).count();
        let mut next = DenseMatrix::zeros(m);
        for (k, &v) in vals.iter().enumerate() {
            let row = &z[k * m..(k + 1) * m];
            let w = T::one() / v;
            for i in 0..m {
                let wi = w * row[i];
                for j in 0..m {
                    next[(i, j)] += wi * row[j];
                }
            }
        }
        inv = Some(next);
    }
    Ok(count)
}
