//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration, after the EISPACK `tred2`/`tql2` pair (public-domain JAMA port).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and, when
/// requested, eigenvectors stored as rows (`vectors[j * n + k] = ψ_j(k)`).
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<Vec<T>>,
}

/// Full symmetric eigen-decomposition. Only the lower triangle is read.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>, want_vectors: bool) -> Result<SymEigen<T>> {
    let n = a.dim();
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: want_vectors.then(Vec::new),
        });
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    if want_vectors {
        // tql2 rotates rows of the transposed basis
        let mut z = vec![T::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                z[i * n + k] = v[(k, i)];
            }
        }
        tql2(&mut d, &mut e, Some(&mut z))?;
        Ok(SymEigen {
            values: d,
            vectors: Some(z),
        })
    } else {
        tql2(&mut d, &mut e, None)?;
        Ok(SymEigen { values: d, vectors: None })
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix given its diagonal and
/// first off-diagonal (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T], want_vectors: bool) -> Result<SymEigen<T>> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n, "off-diagonal length mismatch");
    let mut d = diag.to_vec();
    // tql2 expects e[i] = T(i, i-1) for i >= 1
    let mut e = vec![T::zero(); n];
    if n > 1 {
        e[1..].copy_from_slice(&off[..n - 1]);
    }
    if want_vectors {
        let mut z = vec![T::zero(); n * n];
        for i in 0..n {
            z[i * n + i] = T::one();
        }
        tql2(&mut d, &mut e, Some(&mut z))?;
        Ok(SymEigen {
            values: d,
            vectors: Some(z),
        })
    } else {
        tql2(&mut d, &mut e, None)?;
        Ok(SymEigen { values: d, vectors: None })
    }
}

/// Householder tridiagonalization. On exit `v` holds the orthogonal transform
/// (basis in columns), `d` the diagonal and `e[1..]` the sub-diagonal.
fn tred2<T: Real>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.dim();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
                v[(j, i)] = zero;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[(k, j)] -= upd;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = zero;
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = zero;
}

/// Implicit QL on a symmetric tridiagonal matrix; `z` (rows = basis vectors)
/// is rotated along. Eigenvalues come back ascending with `z` permuted to match.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let max_iter = 30 * n.max(10);
    let mut f = zero;
    let mut tst1 = zero;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::Numerical(format!("implicit QL did not converge for eigenvalue {l} of {n}")));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }

    // selection sort, ascending
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(z) = z.as_deref_mut() {
                for c in 0..n {
                    z.swap(i * n + c, k * n + c);
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DenseMatrix<f64>, eig: &SymEigen<f64>) -> f64 {
        let n = a.dim();
        let z = eig.vectors.as_ref().unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let v = &z[j * n..(j + 1) * n];
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[(i, k)] * v[k]).sum();
                worst = worst.max((av - eig.values[j] * v[i]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let eig = symmetric_eigen(&a, true).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&a, &eig) < 1e-14);
    }

    #[test]
    fn random_symmetric_is_diagonalized() {
        let n = 23;
        let mut a = DenseMatrix::<f64>::zeros(n);
        let mut x = 0.123_f64;
        for i in 0..n {
            for j in 0..=i {
                x = (x * 997.0 + 0.317).fract();
                a[(i, j)] = x - 0.5;
                a[(j, i)] = x - 0.5;
            }
        }
        let eig = symmetric_eigen(&a, true).unwrap();
        assert!(residual(&a, &eig) < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = eig.values.iter().sum();
        assert!((tr - a.trace()).abs() < 1e-12);
        let z = eig.vectors.unwrap();
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| z[i * n + k] * z[j * n + k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [0.3, -1.2, 2.0, 0.7, 0.0, 1.1];
        let off = [1.0, 1.0, 1.0, 1.0, 1.0];
        let n = diag.len();
        let mut a = DenseMatrix::<f64>::zeros(n);
        for i in 0..n {
            a[(i, i)] = diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = off[i];
                a[(i + 1, i)] = off[i];
            }
        }
        let t = tridiagonal_eigen(&diag, &off, true).unwrap();
        let dn = symmetric_eigen(&a, false).unwrap();
        for (x, y) in t.values.iter().zip(&dn.values) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!(residual(&a, &t) < 1e-13);
    }

    #[test]
    fn single_precision_runs() {
        let a = DenseMatrix::<f32>::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let eig = symmetric_eigen(&a, false).unwrap();
        let want = [2.0 - 2f32.sqrt(), 2.0, 2.0 + 2f32.sqrt()];
        for (x, y) in eig.values.iter().zip(want) {
            assert!((x - y).abs() < 1e-5);
        }
    }
}
