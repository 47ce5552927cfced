//! Eigen-decompositions, spectral counts and resolvent entries of a
//! [`FiniteHamiltonian`].

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{config_err, domain_err, Error, Result};
use crate::lattice::FiniteHamiltonian;
use crate::linalg::{layered_count_below, sturm_count, symmetric_eigen, tridiagonal_eigen, window_eigenpairs, BandedLdl};
use crate::scalar::Real;

/// Largest matrix handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 4000;

/// Eigenvalues in ascending order with the matching unit eigenvectors.
///
/// Produced either for the whole spectrum ([`eigensolve`]) or for the
/// eigenvalues inside one window ([`eigenpairs_in_window`]).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData<T> {
    eigenvalues: Vec<T>,
    // row j holds ψ_j
    vectors: Vec<T>,
    n_sites: usize,
}

impl<T: Real> SpectralData<T> {
    fn from_rows(eigenvalues: Vec<T>, rows: Vec<Vec<T>>, n_sites: usize) -> Self {
        Self {
            eigenvalues,
            vectors: rows.into_iter().flatten().collect(),
            n_sites,
        }
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, j: usize) -> &[T] {
        &self.vectors[j * self.n_sites..(j + 1) * self.n_sites]
    }

    /// `|ψ_j(n)|²` for every stored `j`.
    pub fn weights(&self, site: usize) -> Vec<T> {
        (0..self.len()).map(|j| self.vector(j)[site].powi(2)).collect()
    }

    /// Indices of the stored eigenvalues in `[lo, hi)`.
    pub fn window(&self, lo: T, hi: T) -> std::ops::Range<usize> {
        if !(hi > lo) {
            return 0..0;
        }
        let a = self.eigenvalues.partition_point(|&e| e < lo);
        let b = self.eigenvalues.partition_point(|&e| e < hi);
        a..b
    }

    /// `#{j : E_j ∈ [lo, hi)}`.
    pub fn count_in_window(&self, lo: T, hi: T) -> usize {
        self.window(lo, hi).len()
    }

    /// `Σ_{E_j ∈ [lo, hi)} Σ_{n ∈ sites} |ψ_j(n)|²`.
    pub fn local_weight(&self, lo: T, hi: T, sites: &[usize]) -> Result<T> {
        if let Some(&bad) = sites.iter().find(|&&n| n >= self.n_sites) {
            return Err(domain_err!("site index {bad} outside a box of {} sites", self.n_sites));
        }
        Ok(self
            .window(lo, hi)
            .map(|j| {
                let v = self.vector(j);
                sites.iter().fold(T::zero(), |acc, &n| acc + v[n] * v[n])
            })
            .fold(T::zero(), |a, b| a + b))
    }

    /// `Σ_j Σ_n f(E_j) g(n) |ψ_j(n)|²` over the stored pairs.
    pub fn trace_sum(&self, f: impl Fn(T) -> T, g: &[T]) -> T {
        let mut total = T::zero();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let v = self.vector(j);
            let s = v.iter().zip(g).fold(T::zero(), |acc, (&p, &w)| acc + w * p * p);
            total += f(e) * s;
        }
        total
    }
}

fn too_large(n: usize) -> Error {
    Error::Resource(format!("{n} sites exceed the dense eigensolver limit {DENSE_LIMIT}"))
}

fn with_provenance<T: Real>(h: &FiniteHamiltonian<T>, e: Error) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!("{msg} ({})", h.provenance())),
        other => other,
    }
}

/// Full eigen-decomposition.
pub fn eigensolve<T: Real>(h: &FiniteHamiltonian<T>) -> Result<SpectralData<T>> {
    let n = h.dim();
    let eig = match h.tridiagonal() {
        Some((d, e)) => tridiagonal_eigen(&d, &e, true),
        None if n <= DENSE_LIMIT => symmetric_eigen(&h.to_dense(), true),
        None => return Err(too_large(n)),
    }
    .map_err(|e| with_provenance(h, e))?;
    Ok(SpectralData {
        eigenvalues: eig.values,
        vectors: eig.vectors.expect("vectors requested"),
        n_sites: n,
    })
}

/// All eigenvalues, ascending, without eigenvectors.
pub fn eigenvalues<T: Real>(h: &FiniteHamiltonian<T>) -> Result<Vec<T>> {
    let n = h.dim();
    let eig = match h.tridiagonal() {
        Some((d, e)) => tridiagonal_eigen(&d, &e, false),
        None if n <= DENSE_LIMIT => symmetric_eigen(&h.to_dense(), false),
        None => return Err(too_large(n)),
    }
    .map_err(|e| with_provenance(h, e))?;
    Ok(eig.values)
}

/// Eigenpairs with eigenvalues in `[lo, hi)` only. Chains use bisection and
/// inverse iteration, so their cost scales with the window, not the box.
pub fn eigenpairs_in_window<T: Real>(h: &FiniteHamiltonian<T>, lo: T, hi: T) -> Result<SpectralData<T>> {
    let n = h.dim();
    if let Some((d, e)) = h.tridiagonal() {
        let (vals, rows) = window_eigenpairs(&d, &e, lo, hi);
        return Ok(SpectralData::from_rows(vals, rows, n));
    }
    let full = eigensolve(h)?;
    let w = full.window(lo, hi);
    Ok(SpectralData {
        eigenvalues: full.eigenvalues[w.clone()].to_vec(),
        vectors: full.vectors[w.start * n..w.end * n].to_vec(),
        n_sites: n,
    })
}

/// `#{j : E_j < sigma}` from the inertia of `H - sigma`; no eigenvectors.
///
/// Chains use the Sturm sequence; other boxes are cut into layers across
/// their longest axis, at a cost of one small dense solve per layer.
pub fn count_below<T: Real>(h: &FiniteHamiltonian<T>, sigma: T) -> Result<usize> {
    match h.tridiagonal() {
        Some((d, e)) => Ok(sturm_count(&d, &e, sigma)),
        None => layered_count_below(&h.layers(), sigma).map_err(|e| with_provenance(h, e)),
    }
}

/// `#{j : E_j ∈ [lo, hi)}` by inertia counts.
pub fn inertia_count<T: Real>(h: &FiniteHamiltonian<T>, lo: T, hi: T) -> Result<usize> {
    if !(hi > lo) {
        return Ok(0);
    }
    Ok(count_below(h, hi)? - count_below(h, lo)?)
}

/// A set of resolvent entries `G(z; n, m)` to evaluate.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenQuery<T> {
    z: Complex<T>,
    pairs: Vec<(usize, usize)>,
}

impl<T: Real> GreenQuery<T> {
    pub fn new(z: Complex<T>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if !(z.im > T::zero()) {
            return Err(config_err!("spectral parameter needs Im z > 0, got {}", z.im));
        }
        Ok(Self { z, pairs })
    }

    pub fn z(&self) -> Complex<T> {
        self.z
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// `(H - z)^{-1}` held as a banded LDLᵀ factorization of the complex
/// symmetric matrix `H - z`.
pub struct Resolvent<T> {
    ldl: BandedLdl<Complex<T>>,
    n: usize,
}

impl<T: Real> Resolvent<T> {
    pub fn new(h: &FiniteHamiltonian<T>, z: Complex<T>) -> Result<Self> {
        if !(z.im > T::zero()) {
            return Err(config_err!("spectral parameter needs Im z > 0, got {}", z.im));
        }
        let mut a = h.banded().map(|x| Complex::new(x, T::zero()));
        a.shift_diagonal(-z);
        let ldl = BandedLdl::factor(&a).map_err(|i| Error::Numerical(format!("zero pivot {i} in resolvent ({})", h.provenance())))?;
        Ok(Self { ldl, n: h.dim() })
    }

    /// Column `G(z; ·, m)`; by symmetry also the row.
    pub fn column(&self, m: usize) -> Vec<Complex<T>> {
        let mut x = vec![Complex::new(T::zero(), T::zero()); self.n];
        x[m] = Complex::new(T::one(), T::zero());
        self.ldl.solve(&mut x);
        x
    }
}

/// Resolvent entries for the query, one linear solve per distinct column.
pub fn green<T: Real>(h: &FiniteHamiltonian<T>, q: &GreenQuery<T>) -> Result<BTreeMap<(usize, usize), Complex<T>>> {
    let n = h.dim();
    if let Some(&(a, b)) = q.pairs.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(domain_err!("pair ({a}, {b}) outside a box of {n} sites"));
    }
    let r = Resolvent::new(h, q.z)?;
    let mut by_col: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &q.pairs {
        by_col.entry(b).or_default().push(a);
    }
    let mut out = BTreeMap::new();
    for (m, rows) in by_col {
        let col = r.column(m);
        for a in rows {
            out.insert((a, m), col[a]);
        }
    }
    Ok(out)
}

/// `Σ_j ψ_j(n) ψ_j(m) / (E_j - z)` from a full decomposition.
pub fn green_spectral<T: Real>(s: &SpectralData<T>, z: Complex<T>, n: usize, m: usize) -> Complex<T> {
    (0..s.len()).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
        let v = s.vector(j);
        acc + Complex::new(v[n] * v[m], T::zero()) / (Complex::new(s.eigenvalues[j], T::zero()) - z)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxGeometry;
    use num_complex::Complex64;

    fn chain(pot: Vec<f64>) -> FiniteHamiltonian<f64> {
        let g = BoxGeometry::interval(0, pot.len() as i64).unwrap();
        FiniteHamiltonian::from_potential(g, pot).unwrap()
    }

    #[test]
    fn two_by_two() {
        let s = eigensolve(&chain(vec![0.0, 0.0])).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
        for w in s.weights(0) {
            assert!((w - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let dense = crate::linalg::DenseMatrix::<f64>::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let e = symmetric_eigen(&dense, true).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let z = e.vectors.unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(z[j * 3 + k].abs(), if j == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn window_counts() {
        let s = eigensolve(&chain(vec![0.0, 0.0])).unwrap();
        assert_eq!(s.count_in_window(0.0, 2.0), 1);
        assert_eq!(s.count_in_window(-5.0, -3.0), 0);
        assert_eq!(s.count_in_window(-10.0, 10.0), 2);
    }

    #[test]
    fn local_weight_rules() {
        let h = chain(vec![0.3, -1.2, 0.8, 2.0, -0.4, 0.1]);
        let s = eigensolve(&h).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let w = s.local_weight(-10.0, 10.0, &[0, 1, 2]).unwrap();
        assert!((w - 3.0).abs() < 1e-12);
        let w = s.local_weight(-0.5, 1.0, &all).unwrap();
        assert!((w - s.count_in_window(-0.5, 1.0) as f64).abs() < 1e-12);
        assert_eq!(s.local_weight(1.0, 1.0, &all).unwrap(), 0.0);
        assert!(matches!(s.local_weight(-1.0, 1.0, &[6]), Err(Error::Domain(_))));
    }

    #[test]
    fn inertia_agrees_with_eigenvalues() {
        let g = BoxGeometry::new(vec![0, 0], vec![5, 4]).unwrap();
        let pot: Vec<f64> = (0..20).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.4).collect();
        let h = FiniteHamiltonian::from_potential(g, pot).unwrap();
        let s = eigensolve(&h).unwrap();
        for (lo, hi) in [(-1.0, 0.5), (-9.0, 9.0), (0.2, 0.25), (1.0, 3.0), (0.0, 1e-9)] {
            assert_eq!(inertia_count(&h, lo, hi).unwrap(), s.count_in_window(lo, hi));
        }
    }

    #[test]
    fn window_pairs_in_two_dimensions() {
        let g = BoxGeometry::new(vec![0, 0], vec![4, 4]).unwrap();
        let pot: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.7).collect();
        let h = FiniteHamiltonian::from_potential(g, pot).unwrap();
        let w = eigenpairs_in_window(&h, -0.5, 1.5).unwrap();
        let s = eigensolve(&h).unwrap();
        assert_eq!(w.len(), s.count_in_window(-0.5, 1.5));
    }

    #[test]
    fn scalar_resolvent() {
        let h = chain(vec![0.7]);
        let q = GreenQuery::new(Complex64::new(0.0, 1.0), vec![(0, 0)]).unwrap();
        let g = green(&h, &q).unwrap()[&(0, 0)];
        let want = Complex64::new(1.0, 0.0) / Complex64::new(0.7, -1.0);
        assert!((g - want).norm() < 1e-15);
    }

    #[test]
    fn rejects_real_axis() {
        assert!(GreenQuery::new(Complex64::new(0.3, 0.0), vec![]).is_err());
    }

    #[test]
    fn f32_pipeline() {
        let g = BoxGeometry::interval(0, 30).unwrap();
        let pot: Vec<f32> = (0..30).map(|i| ((i * 13 % 7) as f32 - 3.0) * 0.5).collect();
        let h = FiniteHamiltonian::from_potential(g, pot).unwrap();
        let s = eigensolve(&h).unwrap();
        let all: Vec<usize> = (0..30).collect();
        assert!((s.local_weight(-10.0, 10.0, &all).unwrap() - 30.0).abs() < 1e-3);
        assert_eq!(inertia_count(&h, -1.0, 1.0).unwrap(), s.count_in_window(-1.0, 1.0));
    }
}
