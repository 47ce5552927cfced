use anderson_core::poisson::*;
use anderson_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

fn poisson_samples(mean: f64, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = Poisson::new(mean).unwrap();
    (0..n).map(|_| p.sample(&mut rng) as usize).collect()
}

/// ½ Σ_k |Bin(n, p)_k - Poi(λ)_k| by the pmf recurrences, summed far into the tail.
fn exact_binomial_poisson_tv(n: u64, p: f64, lambda: f64) -> f64 {
    let mut b = (1.0 - p).powi(n as i32);
    let mut q = (-lambda).exp();
    let mut total = (b - q).abs();
    for k in 1..200u64 {
        b = if k <= n {
            b * (n - k + 1) as f64 / k as f64 * p / (1.0 - p)
        } else {
            0.0
        };
        q *= lambda / k as f64;
        total += (b - q).abs();
    }
    0.5 * total
}

#[test]
fn poisson_samples_pass_self_test() {
    let d = CountDistribution::from_counts(&poisson_samples(2.0, 100_000, 1), Some(2.0));
    let r = poisson_fit(&d, &PoissonThresholds::default()).unwrap();
    assert!(r.tv_distance <= 0.01, "{}", r.tv_distance);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn binomial_is_close_in_tv_but_detected_by_chi_square() {
    let exact = exact_binomial_poisson_tv(100, 0.02, 2.0);
    assert!(exact > 0.003 && exact < 0.01, "exact TV {exact}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bin = Binomial::new(100, 0.02).unwrap();
    let counts: Vec<usize> = (0..1_000_000).map(|_| bin.sample(&mut rng) as usize).collect();
    let d = CountDistribution::from_counts(&counts, Some(2.0));
    let r = poisson_fit(&d, &PoissonThresholds::default()).unwrap();
    assert!((r.tv_distance - exact).abs() < 0.003, "empirical {} exact {exact}", r.tv_distance);
    assert!(r.tv_ok);
    let target = r.chi_square_target.unwrap();
    assert!(target.p_value.unwrap() < 1e-3, "{target:?}");
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn poisson_fit_is_calibrated() {
    let runs = 300;
    let passed = (0..runs)
        .filter(|&s| {
            let d = CountDistribution::from_counts(&poisson_samples(1.5, 2000, 1000 + s), None);
            poisson_fit(&d, &PoissonThresholds::default()).unwrap().verdict == Verdict::Pass
        })
        .count();
    assert!(passed as f64 >= 0.99 * runs as f64, "{passed}/{runs}");
}

#[test]
fn characteristic_function_within_clt_band() {
    let grid: Vec<f64> = (0..=64)
        .map(|i| -std::f64::consts::PI + i as f64 * std::f64::consts::PI / 32.0)
        .collect();
    for (seed, gamma) in [(3u64, 0.5), (4, 2.0), (5, 6.0)] {
        let n = 10_000;
        let p = charfn_profile(&poisson_samples(gamma, n, seed), &grid, gamma).unwrap();
        assert!(p.sup_distance <= 3.0 / (n as f64).sqrt(), "γ={gamma}: {}", p.sup_distance);
    }
}

#[test]
fn wegner_and_minami_hold_for_alpha_power() {
    let spec = DisorderSpec::alpha_power(0.5, 1.0);
    let geom = BoxGeometry::interval(0, 200).unwrap();
    let w = wegner_check(&spec, &geom, [-0.02, 0.02], Ensemble::new(50, 500)).unwrap();
    assert!((w.bound - 320.0).abs() < 1e-9);
    assert!(w.pass && w.mean < 320.0);
    let m = minami_check(&spec, &geom, [-0.02, 0.02], Ensemble::new(51, 500)).unwrap();
    assert!(m.pass && m.mean < 0.01 * m.bound, "{m:?}");
}

#[test]
fn minami_is_nearly_tight_for_uniform_density() {
    // E N(N-1) ≈ (ρ_DOS |I| |Λ|)² while the bound uses sup ρ = 1/g
    let spec = DisorderSpec::uniform(-0.5, 0.5, 8.0);
    let geom = BoxGeometry::interval(0, 200).unwrap();
    let m = minami_check(&spec, &geom, [-0.01, 0.01], Ensemble::new(51, 2000)).unwrap();
    assert!(m.pass, "{m:?}");
    assert!(!m.trivially_satisfied);
}

proptest! {
    #[test]
    fn tv_is_a_probability_distance(counts in prop::collection::vec(0usize..15, 1..300), mean in 0.0f64..10.0) {
        let d = CountDistribution::from_counts(&counts, None);
        let tv = tv_to_poisson(&d, mean);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&tv));
    }
}
