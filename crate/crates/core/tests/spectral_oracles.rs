#![allow(clippy::needless_range_loop)]

use anderson_core::lattice::FiniteHamiltonian;
use anderson_core::linalg::{symmetric_eigen, DenseMatrix};
use anderson_core::spectral::{count_below, eigenvalues, green_spectral, inertia_count};
use anderson_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// det(A - x I) by Gaussian elimination with partial pivoting.
fn shifted_det(a: &[Vec<f64>], x: f64) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Roots of the characteristic polynomial: sign changes on a grid, then bisection.
fn charpoly_roots(a: &[Vec<f64>]) -> Vec<f64> {
    let bound: f64 = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let step = 1e-3;
    let mut roots = Vec::new();
    let mut x0 = -bound;
    let mut f0 = shifted_det(a, x0);
    while x0 < bound {
        let x1 = x0 + step;
        let f1 = shifted_det(a, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, flo) = (x0, x1, f0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = shifted_det(a, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn random_symmetric(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

#[test]
fn dense_eigenvalues_match_charpoly_roots() {
    for seed in [1u64, 2, 3] {
        let a = random_symmetric(8, seed);
        let oracle = charpoly_roots(&a);
        assert_eq!(oracle.len(), 8, "seed {seed}: roots not separated on the grid");
        let m = DenseMatrix::<f64>::from_rows(&a);
        let e = symmetric_eigen(&m, false).unwrap();
        for (x, y) in e.values.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-8, "seed {seed}: {x} vs {y}");
        }
    }
}

#[test]
fn random_8x8_lattice_instance_matches_charpoly() {
    let geom = BoxGeometry::cube(2, 3).unwrap();
    let spec = DisorderSpec::uniform(-0.5, 0.5, 4.0);
    let h: Hamiltonian = build_hamiltonian(&geom, &spec, Realization::new(11, 0)).unwrap();
    let sub = h.restrict(&BoxGeometry::new(vec![0, 0], vec![2, 3]).unwrap()).unwrap();
    let a: Vec<Vec<f64>> = (0..sub.dim()).map(|i| (0..sub.dim()).map(|j| sub.entry(i, j)).collect()).collect();
    let oracle = charpoly_roots(&a);
    assert_eq!(oracle.len(), sub.dim());
    for (x, y) in eigenvalues(&sub).unwrap().iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-8);
    }
}

fn sample(geom: &BoxGeometry, g: f64, index: u64) -> Hamiltonian {
    build_hamiltonian(geom, &DisorderSpec::uniform(-0.5, 0.5, g), Realization::new(5, index)).unwrap()
}

#[test]
fn green_solve_matches_spectral_representation() {
    let z = Complex::new(0.3, 0.05);
    for geom in [
        BoxGeometry::interval(0, 60).unwrap(),
        BoxGeometry::cube(2, 9).unwrap(),
        BoxGeometry::new(vec![0, 0, 0], vec![4, 3, 5]).unwrap(),
    ] {
        let h = sample(&geom, 3.0, 0);
        let s = eigensolve(&h).unwrap();
        let n = geom.len();
        let pairs: Vec<(usize, usize)> = (0..n).step_by(7).flat_map(|a| [(a, 0), (a, n - 1), (a, a)]).collect();
        let g = green(&h, &GreenQuery::new(z, pairs).unwrap()).unwrap();
        for (&(a, b), v) in &g {
            let w = green_spectral(&s, z, a, b);
            assert!((v - w).norm() < 1e-9, "{geom:?} ({a},{b}): {v} vs {w}");
        }
    }
}

#[test]
fn trace_formula_against_matrix_powers() {
    // f(E) = 1 - 2E + 0.5E² - 0.1E³
    let coeffs = [1.0, -2.0, 0.5, -0.1];
    for geom in [BoxGeometry::interval(0, 40).unwrap(), BoxGeometry::cube(2, 6).unwrap()] {
        let h = sample(&geom, 2.0, 3);
        let n = geom.len();
        let g: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 - 4.0).collect();
        let m = h.to_dense();
        let mut power = DenseMatrix::<f64>::identity(n);
        let mut f_h = vec![0.0; n];
        for &c in &coeffs {
            for (i, d) in f_h.iter_mut().enumerate() {
                *d += c * power[(i, i)];
            }
            power = power.matmul(&m);
        }
        let direct: f64 = f_h.iter().zip(&g).map(|(a, b)| a * b).sum();
        let s = eigensolve(&h).unwrap();
        let f = |e: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * e + c);
        let spectral = s.trace_sum(f, &g);
        assert!((direct - spectral).abs() < 1e-9 * direct.abs().max(1.0), "{direct} vs {spectral}");
    }
}

#[test]
fn degenerate_spectrum_keeps_orthonormal_basis() {
    // the free square has exactly degenerate levels
    let geom = BoxGeometry::cube(2, 6).unwrap();
    let h = FiniteHamiltonian::<f64>::from_potential(geom.clone(), vec![0.0; geom.len()]).unwrap();
    let s = eigensolve(&h).unwrap();
    let ev = s.eigenvalues();
    assert!(ev.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-12));
    for i in 0..s.len() {
        for j in 0..s.len() {
            let dot: f64 = s.vector(i).iter().zip(s.vector(j)).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-10);
        }
    }
    for site in 0..geom.len() {
        let total: f64 = s.weights(site).iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn eigensolve_is_repeatable() {
    let h = sample(&BoxGeometry::cube(2, 7).unwrap(), 5.0, 9);
    let a = eigensolve(&h).unwrap();
    let b = eigensolve(&h).unwrap();
    assert_eq!(a, b);
}

fn geometry_strategy() -> impl Strategy<Value = BoxGeometry> {
    prop_oneof![
        (1i64..40).prop_map(|n| BoxGeometry::interval(0, n).unwrap()),
        (1i64..8, 1i64..8).prop_map(|(a, b)| BoxGeometry::new(vec![0, 0], vec![a, b]).unwrap()),
        (1i64..4, 1i64..4, 1i64..4).prop_map(|(a, b, c)| BoxGeometry::new(vec![0, 0, 0], vec![a, b, c]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_are_complete(geom in geometry_strategy(), g in 0.0f64..10.0, k in 0u64..1000) {
        let s = eigensolve(&sample(&geom, g, k)).unwrap();
        for j in 0..s.len() {
            let norm: f64 = s.vector(j).iter().map(|v| v * v).sum();
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
        for site in 0..geom.len() {
            prop_assert!((s.weights(site).iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn resolvent_is_herglotz_and_bounded(geom in geometry_strategy(), g in 0.0f64..10.0, k in 0u64..1000,
                                         re in -6.0f64..6.0, im in 1e-3f64..2.0) {
        let h = sample(&geom, g, k);
        let z = Complex::new(re, im);
        let n = geom.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| [(a, a), (a, (a * 3) % n)]).collect();
        let gm = green(&h, &GreenQuery::new(z, pairs).unwrap()).unwrap();
        for (&(a, b), v) in &gm {
            prop_assert!(v.norm() <= 1.0 / im * (1.0 + 1e-9));
            if a == b {
                prop_assert!(v.im > 0.0);
            }
        }
    }

    #[test]
    fn inertia_matches_dense_counts(geom in geometry_strategy(), g in 0.0f64..10.0, k in 0u64..1000,
                                    lo in -7.0f64..7.0, w in 0.0f64..4.0) {
        let h = sample(&geom, g, k);
        let ev = eigenvalues(&h).unwrap();
        let below = |x: f64| ev.partition_point(|&v| v < x);
        // counts can differ only when an eigenvalue sits within rounding of an endpoint
        let near = |x: f64| ev.iter().any(|v| (v - x).abs() < 1e-9);
        if !near(lo) && !near(lo + w) {
            prop_assert_eq!(inertia_count(&h, lo, lo + w).unwrap(), below(lo + w) - below(lo));
            prop_assert_eq!(count_below(&h, lo).unwrap(), below(lo));
        }
    }

    #[test]
    fn window_counts_are_monotone(geom in geometry_strategy(), k in 0u64..1000,
                                  c in -3.0f64..3.0, w1 in 0.0f64..2.0, w2 in 0.0f64..2.0) {
        let s = eigensolve(&sample(&geom, 4.0, k)).unwrap();
        let (a, b) = (w1.min(w2), w1.max(w2));
        prop_assert!(s.count_in_window(c - a, c + a) <= s.count_in_window(c - b, c + b));
    }
}
