//! Distributional checks on eigenvalue counts: Wegner and Minami bounds,
//! goodness of fit to a Poisson law, characteristic functions, and the
//! scaling of the per-cell second factorial moment.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::disorder::DisorderSpec;
use crate::ensemble::{mean_stderr, Ensemble};
use crate::error::{config_err, Result};
use crate::green_decay::fit_line;
use crate::lattice::{build_hamiltonian, BoxGeometry};
use crate::spectral::inertia_count;
use crate::Complex;

/// Empirical law of integer counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pub histogram: BTreeMap<usize, usize>,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Predicted Poisson intensity, when one is available.
    pub target_intensity: Option<f64>,
}

impl CountDistribution {
    pub fn from_counts(counts: &[usize], target_intensity: Option<f64>) -> Self {
        let mut histogram = BTreeMap::new();
        for &c in counts {
            *histogram.entry(c).or_insert(0) += 1;
        }
        let n = counts.len();
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
        let variance = if n > 1 {
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            histogram,
            n,
            mean,
            variance,
            target_intensity,
        }
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.histogram.get(&k).copied().unwrap_or(0) as f64 / self.n as f64
    }

    pub fn max_count(&self) -> usize {
        self.histogram.keys().next_back().copied().unwrap_or(0)
    }
}

fn poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    Poisson::new(mean).map(|p| p.pmf(k as u64)).unwrap_or(0.0)
}

fn poisson_sf(mean: f64, k: usize) -> f64 {
    // P(X > k)
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|p| p.sf(k as u64)).unwrap_or(0.0)
}

/// `½ Σ_k |p̂_k - π_k|` including the Poisson mass beyond the largest count.
pub fn tv_to_poisson(dist: &CountDistribution, mean: f64) -> f64 {
    let kmax = dist.max_count();
    let body: f64 = (0..=kmax).map(|k| (dist.frequency(k) - poisson_pmf(mean, k)).abs()).sum();
    0.5 * (body + poisson_sf(mean, kmax))
}

/// Pearson statistic over bins `k = 0, 1, …` merged until each expected
/// count reaches 5; the last bin collects the tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub bins: usize,
    pub dof: usize,
    /// `None` when too few bins remain for a test.
    pub p_value: Option<f64>,
}

pub fn chi_square_poisson(dist: &CountDistribution, mean: f64, fitted_params: usize) -> ChiSquare {
    let n = dist.n as f64;
    // (observed, expected) per bin; bins are [start, end) with the last one open
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut k = 0usize;
    let mut covered = 0.0;
    loop {
        let p = poisson_pmf(mean, k);
        obs += dist.frequency(k) * n;
        exp += p * n;
        covered += p;
        k += 1;
        let remaining = (1.0 - covered).max(0.0) * n;
        if exp >= 5.0 && remaining >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        } else if remaining < 5.0 {
            break;
        }
        if k > 100_000 {
            break;
        }
    }
    // everything from k on goes into the tail bin
    let tail_obs: f64 = dist.histogram.range(k..).map(|(_, &c)| c as f64).sum();
    obs += tail_obs;
    exp += poisson_sf(mean, k.saturating_sub(1)) * n;
    if exp >= 5.0 || bins.is_empty() {
        bins.push((obs, exp));
    } else {
        let last = bins.last_mut().expect("non-empty");
        last.0 += obs;
        last.1 += exp;
    }
    let statistic: f64 = bins.iter().filter(|b| b.1 > 0.0).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len().saturating_sub(1 + fitted_params);
    let p_value = (dof >= 1).then(|| ChiSquared::new(dof as f64).map(|c| c.sf(statistic)).unwrap_or(f64::NAN));
    ChiSquare {
        statistic,
        bins: bins.len(),
        dof,
        p_value,
    }
}

/// Pass thresholds; engineering choices, not derived constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonThresholds {
    pub max_tv: f64,
    pub dispersion: [f64; 2],
    pub min_chi_p: f64,
    pub min_samples: usize,
}

impl Default for PoissonThresholds {
    fn default() -> Self {
        Self {
            max_tv: 0.1,
            dispersion: [0.8, 1.2],
            min_chi_p: 1e-3,
            min_samples: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`.
    pub dispersion: f64,
    /// TV distance to Poisson with the sample mean.
    pub tv_distance: f64,
    /// Chi-square against Poisson with the sample mean (one fitted parameter).
    pub chi_square_shape: ChiSquare,
    /// Chi-square against Poisson with the target intensity.
    pub chi_square_target: Option<ChiSquare>,
    pub tv_ok: bool,
    pub dispersion_ok: bool,
    pub chi_square_ok: bool,
    pub verdict: Verdict,
    pub thresholds: PoissonThresholds,
}

/// Shape test of the counts against Poisson(sample mean).
pub fn poisson_fit(dist: &CountDistribution, thresholds: &PoissonThresholds) -> Result<PoissonReport> {
    if dist.n < thresholds.min_samples {
        return Err(config_err!(
            "Poisson fit needs at least {} samples, got {}",
            thresholds.min_samples,
            dist.n
        ));
    }
    let mean = dist.mean;
    let dispersion = if mean > 0.0 { dist.variance / mean } else { f64::NAN };
    let tv_distance = tv_to_poisson(dist, mean);
    let chi_square_shape = chi_square_poisson(dist, mean, 1);
    let chi_square_target = dist.target_intensity.map(|t| chi_square_poisson(dist, t, 0));
    let tv_ok = tv_distance <= thresholds.max_tv;
    let dispersion_ok = dispersion >= thresholds.dispersion[0] && dispersion <= thresholds.dispersion[1];
    let chi_square_ok = chi_square_shape.p_value.is_none_or(|p| p >= thresholds.min_chi_p);
    let verdict = if mean == 0.0 {
        Verdict::Inconclusive
    } else if tv_ok && dispersion_ok && chi_square_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(PoissonReport {
        n: dist.n,
        mean,
        variance: dist.variance,
        dispersion,
        tv_distance,
        chi_square_shape,
        chi_square_target,
        tv_ok,
        dispersion_ok,
        chi_square_ok,
        verdict,
        thresholds: thresholds.clone(),
    })
}

/// Sample mean against a predicted intensity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityCheck {
    pub mean: f64,
    pub mean_stderr: f64,
    pub target: f64,
    pub target_stderr: f64,
    pub relative_deviation: f64,
    /// Deviation in units of the combined standard error.
    pub z_score: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn intensity_check(counts: &[usize], target: f64, target_stderr: f64, tolerance: f64) -> IntensityCheck {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, mean_stderr) = mean_stderr(&xs);
    let relative_deviation = (mean - target).abs() / target;
    IntensityCheck {
        mean,
        mean_stderr,
        target,
        target_stderr,
        relative_deviation,
        z_score: (mean - target).abs() / mean_stderr.hypot(target_stderr),
        tolerance,
        pass: relative_deviation <= tolerance,
    }
}

/// Empirical moment of eigenvalue counts against the Wegner or Minami bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub interval: [f64; 2],
    pub box_size: usize,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `Q_μ(|I|)` of the law of the coupled potential.
    pub wegner_constant: f64,
    /// The bound holds for any matrix because `Q_μ(|I|) >= 1`.
    pub trivially_satisfied: bool,
    /// `mean - 3σ <= bound`.
    pub pass: bool,
}

fn bound_check(
    spec: &DisorderSpec,
    geom: &BoxGeometry,
    interval: [f64; 2],
    ensemble: Ensemble,
    statistic: fn(usize) -> f64,
    square: bool,
) -> Result<BoundReport> {
    ensemble.require(500, "Wegner and Minami checks")?;
    spec.validate()?;
    let width = interval[1] - interval[0];
    if width < 0.0 {
        return Err(config_err!("interval {interval:?} is reversed"));
    }
    let volume = geom.len() as f64;
    let q = if width > 0.0 { spec.coupled_wegner_constant(width)? } else { 0.0 };
    let bound = if square { (q * volume).powi(2) } else { q * volume };
    let xs = ensemble.map(|omega| {
        let h = build_hamiltonian::<f64>(geom, spec, omega)?;
        Ok(statistic(inertia_count(&h, interval[0], interval[1])?))
    })?;
    let (mean, stderr) = mean_stderr(&xs);
    Ok(BoundReport {
        interval,
        box_size: geom.len(),
        n: xs.len(),
        mean,
        stderr,
        bound,
        wegner_constant: q,
        trivially_satisfied: q >= 1.0,
        pass: mean - 3.0 * stderr <= bound,
    })
}

/// `E[Tr E_H(I)] <= Q_μ(|I|) |Λ|`.
pub fn wegner_check(spec: &DisorderSpec, geom: &BoxGeometry, interval: [f64; 2], ensemble: Ensemble) -> Result<BoundReport> {
    bound_check(spec, geom, interval, ensemble, |n| n as f64, false)
}

/// `E[N(N - 1)] <= (Q_μ(|I|) |Λ|)²` with `N = Tr E_H(I)`.
pub fn minami_check(spec: &DisorderSpec, geom: &BoxGeometry, interval: [f64; 2], ensemble: Ensemble) -> Result<BoundReport> {
    bound_check(spec, geom, interval, ensemble, |n| (n * n.saturating_sub(1)) as f64, true)
}

/// Empirical characteristic function of counts next to `exp(γ(e^{it} - 1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharFnProfile {
    pub t_grid: Vec<f64>,
    pub empirical: Vec<Complex>,
    pub target: Vec<Complex>,
    pub gamma: f64,
    pub sup_distance: f64,
}

pub fn charfn_profile(samples: &[usize], t_grid: &[f64], gamma: f64) -> Result<CharFnProfile> {
    if t_grid.iter().any(|t| !(t.abs() <= PI)) {
        return Err(config_err!("t grid must lie in [-π, π]"));
    }
    if samples.is_empty() {
        return Err(config_err!("characteristic function of an empty sample"));
    }
    let dist = CountDistribution::from_counts(samples, None);
    let empirical: Vec<Complex> = t_grid
        .iter()
        .map(|&t| {
            dist.histogram
                .iter()
                .map(|(&k, &c)| Complex::from_polar(c as f64 / dist.n as f64, t * k as f64))
                .sum()
        })
        .collect();
    let target: Vec<Complex> = t_grid
        .iter()
        .map(|&t| (gamma * (Complex::from_polar(1.0, t) - 1.0)).exp())
        .collect();
    let sup_distance = empirical.iter().zip(&target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(CharFnProfile {
        t_grid: t_grid.to_vec(),
        empirical,
        target,
        gamma,
        sup_distance,
    })
}

/// Accumulated per-cell second factorial moments at one scale `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditLevel {
    pub scale: usize,
    pub sub_scale: usize,
    /// `|Γ_L|`.
    pub gamma_size: usize,
    pub n_samples: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl AuditLevel {
    pub fn new(scale: usize, sub_scale: usize, gamma_size: usize) -> Self {
        Self {
            scale,
            sub_scale,
            gamma_size,
            n_samples: 0,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    pub fn push(&mut self, count: usize) {
        let f = (count * count.saturating_sub(1)) as f64;
        self.n_samples += 1;
        self.sum += f;
        self.sum_sq += f * f;
    }

    /// `|Γ_L| · Ê[N(N - 1)]` and its standard error.
    pub fn value(&self) -> (f64, f64) {
        let n = self.n_samples as f64;
        let m = self.sum / n;
        let var = ((self.sum_sq / n - m * m) * n / (n - 1.0)).max(0.0);
        let g = self.gamma_size as f64;
        (g * m, g * (var / n).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderAudit {
    pub scales: Vec<usize>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Log-log slope of value against `L`, if every value is positive.
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    /// `-d(1 - a)`.
    pub predicted_slope: f64,
    pub relative_error: Option<f64>,
}

pub fn remainder_audit(levels: &[AuditLevel], d: usize, a: f64) -> Result<RemainderAudit> {
    if levels.is_empty() || levels.iter().any(|l| l.n_samples < 2) {
        return Err(config_err!("remainder audit needs samples at every scale"));
    }
    let predicted_slope = -(d as f64) * (1.0 - a);
    let (values, stderrs): (Vec<f64>, Vec<f64>) = levels.iter().map(AuditLevel::value).unzip();
    let fit = (levels.len() >= 2 && values.iter().all(|&v| v > 0.0)).then(|| {
        let x: Vec<f64> = levels.iter().map(|l| (l.scale as f64).ln()).collect();
        let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        fit_line(&x, &y)
    });
    let slope = fit.as_ref().map(|f| f.slope);
    Ok(RemainderAudit {
        scales: levels.iter().map(|l| l.scale).collect(),
        relative_error: slope.map(|s| ((s - predicted_slope) / predicted_slope).abs()),
        slope_stderr: fit.map(|f| f.slope_stderr),
        slope,
        values,
        stderrs,
        predicted_slope,
    })
}

/// Factor by which the audit value shrinks when `L` doubles at fixed `a`.
pub fn predicted_doubling_factor(d: usize, a: f64) -> f64 {
    2f64.powf(-(d as f64) * (1.0 - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_nonzero_samples_fail() {
        let d = CountDistribution::from_counts(&vec![3; 1000], None);
        let r = poisson_fit(&d, &PoissonThresholds::default()).unwrap();
        assert_eq!(r.dispersion, 0.0);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn all_zero_is_inconclusive() {
        let d = CountDistribution::from_counts(&vec![0; 1000], None);
        let r = poisson_fit(&d, &PoissonThresholds::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn too_few_samples() {
        let d = CountDistribution::from_counts(&[1, 0, 2], None);
        assert!(poisson_fit(&d, &PoissonThresholds::default()).is_err());
    }

    #[test]
    fn charfn_closed_forms() {
        let p = charfn_profile(&[0; 50], &[0.0, 1.0, -2.0], 0.7).unwrap();
        assert!((p.empirical[0] - 1.0).norm() < 1e-15);
        assert!((p.target[0] - 1.0).norm() < 1e-15);
        for (i, &t) in [0.0f64, 1.0, -2.0].iter().enumerate() {
            assert!((p.empirical[i] - 1.0).norm() < 1e-15);
            let want = (1.0 - (0.7 * (Complex::from_polar(1.0, t) - 1.0)).exp()).norm();
            assert!(((p.empirical[i] - p.target[i]).norm() - want).abs() < 1e-14);
        }
        assert!(charfn_profile(&[1], &[4.0], 1.0).is_err());
    }

    #[test]
    fn audit_of_simple_counts_is_zero() {
        let mut l = AuditLevel::new(100, 10, 10);
        for c in [0, 1, 1, 0, 1] {
            l.push(c);
        }
        assert_eq!(l.value().0, 0.0);
        let a = remainder_audit(&[l], 1, 0.5).unwrap();
        assert!(a.slope.is_none());
    }

    #[test]
    fn doubling_factor() {
        assert!((predicted_doubling_factor(1, 0.5) - 2f64.powf(-0.5)).abs() < 1e-15);
        assert!((predicted_doubling_factor(2, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tv_of_exact_law_is_small() {
        // histogram proportional to the pmf (rounded): TV is the rounding error
        let mean = 1.5;
        let n = 100_000usize;
        let mut counts = Vec::new();
        for k in 0..20 {
            let c = (poisson_pmf(mean, k) * n as f64).round() as usize;
            counts.extend(std::iter::repeat_n(k, c));
        }
        let d = CountDistribution::from_counts(&counts, None);
        assert!(tv_to_poisson(&d, mean) < 1e-4);
    }
}
