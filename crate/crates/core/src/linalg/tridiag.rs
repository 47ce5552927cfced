//! Symmetric tridiagonal kernels: Sturm counts, bisection and inverse
//! iteration for the eigenpairs inside an energy window.

use crate::scalar::Real;

/// Number of eigenvalues strictly below `sigma`.
///
/// Counts negative pivots of the LDLᵀ factorization of `T - sigma`. An exact
/// zero pivot is nudged to a tiny positive value, which evaluates the count
/// at `sigma - 0` and keeps the half-open window convention exact even when
/// `sigma` is itself an eigenvalue.
pub fn sturm_count<T: Real>(diag: &[T], off: &[T], sigma: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = T::one();
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 {
            d - sigma
        } else {
            let b = off[i - 1];
            d - sigma - b * b / q
        };
        if q == T::zero() {
            q = tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Gershgorin enclosure of the spectrum.
pub fn gershgorin<T: Real>(diag: &[T], off: &[T]) -> (T, T) {
    let n = diag.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let mut r = T::zero();
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `index`-th eigenvalue (0-based, ascending), bracketed by `[lo, hi]`
/// with `count(lo) <= index < count(hi)`.
pub fn bisect_eigenvalue<T: Real>(diag: &[T], off: &[T], index: usize, mut lo: T, mut hi: T) -> T {
    let two = T::lit(2.0);
    for _ in 0..256 {
        let mid = (lo + hi) / two;
        let tol = two * T::epsilon() * lo.abs().max(hi.abs()) + T::min_positive_value();
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / two
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// (sub-diagonal `dl`, diagonal `d`, super-diagonal `du`); LAPACK `gttrf` layout.
struct TridiagLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagLu<T> {
    fn factor(mut dl: Vec<T>, mut d: Vec<T>, mut du: Vec<T>, floor: T) -> Self {
        let n = d.len();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        // exactly singular shifts are expected in inverse iteration
        for di in d.iter_mut() {
            if di.abs() < floor {
                *di = if *di < T::zero() { -floor } else { floor };
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize<T: Real>(x: &mut [T]) -> T {
    let nrm = x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
    if nrm > T::zero() {
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
    nrm
}

/// Eigenpairs of a symmetric tridiagonal matrix whose eigenvalues lie in the
/// half-open window `[lo, hi)`. Vectors are returned as rows, ascending.
pub fn window_eigenpairs<T: Real>(diag: &[T], off: &[T], lo: T, hi: T) -> (Vec<T>, Vec<Vec<T>>) {
    let n = diag.len();
    if n == 0 || !(hi > lo) {
        return (vec![], vec![]);
    }
    let first = sturm_count(diag, off, lo);
    let last = sturm_count(diag, off, hi);
    if last <= first {
        return (vec![], vec![]);
    }

    let (glo, ghi) = gershgorin(diag, off);
    let norm = glo.abs().max(ghi.abs()).max(T::one());
    let eps = T::epsilon();
    // count(lo) = first <= idx < last = count(hi), so [lo, hi] brackets every index
    let values: Vec<T> = (first..last).map(|idx| bisect_eigenvalue(diag, off, idx, lo, hi)).collect();

    let cluster_tol = T::lit(1e-3) * norm;
    let floor = eps * norm;
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(values.len());
    let mut shift_prev: Option<T> = None;
    for (k, &value) in values.iter().enumerate() {
        // separate coincident shifts so each solve finds a fresh direction
        let mut shift = value;
        if let Some(prev) = shift_prev {
            let sep = T::lit(10.0) * eps * norm;
            if shift - prev < sep {
                shift = prev + sep;
            }
        }
        shift_prev = Some(shift);

        let dl: Vec<T> = off.to_vec();
        let du: Vec<T> = off.to_vec();
        let dd: Vec<T> = diag.iter().map(|&d| d - shift).collect();
        let lu = TridiagLu::factor(dl, dd, du, floor);

        let cluster: Vec<usize> = (0..k).filter(|&j| (value - values[j]).abs() < cluster_tol).collect();

        let mut x: Vec<T> = (0..n)
            .map(|i| {
                let t = T::lit(((i as f64 + 1.0) * 0.618_033_988_749_895 + 0.1 * k as f64).fract());
                T::one() + T::lit(0.5) * t
            })
            .collect();
        normalize(&mut x);
        for _ in 0..4 {
            lu.solve(&mut x);
            for &j in &cluster {
                let v = &vectors[j];
                let dot = x.iter().zip(v).fold(T::zero(), |a, (&p, &q)| a + p * q);
                for (xi, &vi) in x.iter_mut().zip(v) {
                    *xi -= dot * vi;
                }
            }
            normalize(&mut x);
        }
        vectors.push(x);
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::tridiagonal_eigen;

    fn pseudo_potential(n: usize, seed: f64, scale: f64) -> Vec<f64> {
        let mut x = seed;
        (0..n)
            .map(|_| {
                x = (x * 7919.0 + 0.1234).fract();
                scale * (x - 0.5)
            })
            .collect()
    }

    #[test]
    fn sturm_matches_spectrum() {
        let diag = pseudo_potential(50, 0.31, 8.0);
        let off = vec![1.0; 49];
        let eig = tridiagonal_eigen(&diag, &off, false).unwrap();
        for sigma in [-6.0, -1.3, 0.0, 0.77, 2.5, 6.0] {
            let want = eig.values.iter().filter(|&&e| e < sigma).count();
            assert_eq!(sturm_count(&diag, &off, sigma), want);
        }
    }

    #[test]
    fn sturm_count_at_exact_eigenvalue_is_strict() {
        // free chain of 3 sites: -sqrt2, 0, sqrt2
        let diag = [0.0; 3];
        let off = [1.0; 2];
        assert_eq!(sturm_count(&diag, &off, 0.0), 1);
        assert_eq!(sturm_count(&diag, &off, 1e-12), 2);
    }

    #[test]
    fn window_pairs_match_full_solver() {
        let n = 120;
        let diag = pseudo_potential(n, 0.77, 8.0);
        let off = vec![1.0; n - 1];
        let full = tridiagonal_eigen(&diag, &off, true).unwrap();
        let z = full.vectors.unwrap();
        let (lo, hi) = (-0.4, 0.9);
        let (vals, vecs) = window_eigenpairs(&diag, &off, lo, hi);
        let idx: Vec<usize> = (0..n).filter(|&j| full.values[j] >= lo && full.values[j] < hi).collect();
        assert_eq!(vals.len(), idx.len());
        assert!(!idx.is_empty());
        for (k, &j) in idx.iter().enumerate() {
            assert!((vals[k] - full.values[j]).abs() < 1e-12);
            let dot: f64 = (0..n).map(|i| vecs[k][i] * z[j * n + i]).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-10, "overlap {dot}");
        }
    }

    #[test]
    fn degenerate_blocks_get_orthogonal_vectors() {
        // two decoupled identical blocks give every eigenvalue twice
        let diag = [0.5, -0.2, 0.5, -0.2];
        let off = [1.0, 0.0, 1.0];
        let (vals, vecs) = window_eigenpairs(&diag, &off, -5.0, 5.0);
        assert_eq!(vals.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| vecs[i][k] * vecs[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8, "({i},{j}) {dot}");
            }
        }
    }
}
