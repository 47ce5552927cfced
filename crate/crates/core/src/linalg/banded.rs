//! Symmetric banded matrices and their LDLᵀ factorization without pivoting.
//!
//! Used for resolvent solves with the complex symmetric `H - z`, `Im z > 0`.
//! Every leading principal submatrix then has a nonzero imaginary part and is
//! invertible, so elimination without pivoting never meets a zero pivot.

use num_traits::{NumAssign, Zero};

/// Lower band of a symmetric matrix with half-bandwidth `bw`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSym<F> {
    n: usize,
    bw: usize,
    // row i stores columns i - bw ..= i at offsets 0 ..= bw
    band: Vec<F>,
}

impl<F: Copy + Zero> BandedSym<F> {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![F::zero(); n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        (i - j <= self.bw).then(|| i * (self.bw + 1) + (j + self.bw - i))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.slot(i, j).map_or(F::zero(), |s| self.band[s])
    }

    /// Sets entries `(i, j)` and `(j, i)`. Panics outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        let s = self.slot(i, j).expect("entry outside band");
        self.band[s] = v;
    }

    pub fn map<G: Copy + Zero>(&self, f: impl Fn(F) -> G) -> BandedSym<G> {
        BandedSym {
            n: self.n,
            bw: self.bw,
            band: self.band.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: F)
    where
        F: NumAssign,
    {
        for i in 0..self.n {
            self.band[i * (self.bw + 1) + self.bw] += shift;
        }
    }
}

/// `A = L D Lᵀ`, unit lower-triangular `L` stored in band layout.
#[derive(Clone, Debug)]
pub struct BandedLdl<F> {
    factor: BandedSym<F>,
    diag: Vec<F>,
}

impl<F: Copy + NumAssign> BandedLdl<F> {
    /// Factorizes `a`; returns the index of the first exactly-zero pivot on failure.
    pub fn factor(a: &BandedSym<F>) -> Result<Self, usize> {
        let n = a.n;
        let bw = a.bw;
        let w = bw + 1;
        let mut l = a.clone();
        let mut d = vec![F::zero(); n];
        // l_row_d[k] = L(i, k) * D(k) for the current row
        let mut ld = vec![F::zero(); w];
        for i in 0..n {
            let start = i.saturating_sub(bw);
            for j in start..=i {
                let mut s = l.band[i * w + (j + bw - i)];
                let kstart = start.max(j.saturating_sub(bw));
                for k in kstart..j {
                    let lik_d = ld[k + bw - i];
                    let ljk = l.band[j * w + (k + bw - j)];
                    s -= lik_d * ljk;
                }
                if j < i {
                    let lij = s / d[j];
                    l.band[i * w + (j + bw - i)] = lij;
                    ld[j + bw - i] = lij * d[j];
                } else {
                    if s == F::zero() {
                        return Err(i);
                    }
                    d[i] = s;
                    l.band[i * w + bw] = F::one();
                }
            }
        }
        Ok(Self { factor: l, diag: d })
    }

    pub fn pivots(&self) -> &[F] {
        &self.diag
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [F]) {
        let n = self.factor.n;
        let bw = self.factor.bw;
        let w = bw + 1;
        let band = &self.factor.band;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= band[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s;
        }
        for i in 0..n {
            b[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= band[k * w + (i + bw - k)] * b[k];
            }
            b[i] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::DenseMatrix;
    use num_complex::Complex64;

    fn lattice_2d(nx: usize, ny: usize, pot: &[f64]) -> (BandedSym<f64>, DenseMatrix<f64>) {
        let n = nx * ny;
        let mut b = BandedSym::zeros(n, ny);
        let mut d = DenseMatrix::zeros(n);
        for x in 0..nx {
            for y in 0..ny {
                let i = x * ny + y;
                b.set(i, i, pot[i]);
                d[(i, i)] = pot[i];
                if y + 1 < ny {
                    b.set(i, i + 1, 1.0);
                    d[(i, i + 1)] = 1.0;
                    d[(i + 1, i)] = 1.0;
                }
                if x + 1 < nx {
                    b.set(i, i + ny, 1.0);
                    d[(i, i + ny)] = 1.0;
                    d[(i + ny, i)] = 1.0;
                }
            }
        }
        (b, d)
    }

    fn pot(n: usize, seed: f64) -> Vec<f64> {
        let mut x = seed;
        (0..n)
            .map(|_| {
                x = (x * 4099.0 + 0.377).fract();
                6.0 * (x - 0.5)
            })
            .collect()
    }

    #[test]
    fn complex_solve_inverts() {
        let (b, d) = lattice_2d(4, 3, &pot(12, 0.9));
        let z = Complex64::new(0.3, 0.05);
        let mut a = b.map(|x| Complex64::new(x, 0.0));
        a.shift_diagonal(-z);
        let f = BandedLdl::factor(&a).unwrap();
        let n = 12;
        for m in 0..n {
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[m] = Complex64::new(1.0, 0.0);
            f.solve(&mut x);
            for i in 0..n {
                let mut s = -z * x[i];
                for k in 0..n {
                    s += d[(i, k)] * x[k];
                }
                let want = if i == m { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12);
            }
        }
    }
}
