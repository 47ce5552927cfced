//! Integrated density of states: finite-volume estimates, α-fractional
//! derivatives and the rescaled window measure `L^d ν(λ + β_L^{-1} I)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderSpec;
use crate::ensemble::{mean_stderr, Ensemble};
use crate::error::{config_err, Error, Result};
use crate::lattice::{build_hamiltonian, BoxGeometry, FiniteHamiltonian};
use crate::linalg::sturm_count;
use crate::spectral::{count_below, eigenvalues, DENSE_LIMIT};

/// Estimated mass of an energy interval under `ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub value: f64,
    pub stderr: f64,
}

/// Anything that can report `ν([lo, hi))`.
pub trait IdsSource: Sync {
    fn interval_mass(&self, lo: f64, hi: f64) -> Result<Mass>;

    /// Narrowest half-width the source can resolve.
    fn resolution(&self) -> f64;
}

/// `ν̂(E) = E[#{E_j < E}] / |Λ|` on an energy grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsTable {
    pub energies: Vec<f64>,
    pub nu_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub box_size: usize,
    pub n_realizations: usize,
}

impl IdsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("energy,nu_hat,stderr\n");
        for i in 0..self.energies.len() {
            let _ = writeln!(out, "{},{},{}", self.energies[i], self.nu_hat[i], self.stderr[i]);
        }
        out
    }

    fn interpolate(&self, e: f64) -> (f64, f64) {
        let k = self.energies.partition_point(|&x| x <= e);
        if k == 0 {
            return (self.nu_hat[0], self.stderr[0]);
        }
        if k == self.energies.len() {
            return (self.nu_hat[k - 1], self.stderr[k - 1]);
        }
        let (x0, x1) = (self.energies[k - 1], self.energies[k]);
        let t = (e - x0) / (x1 - x0);
        (
            self.nu_hat[k - 1] + t * (self.nu_hat[k] - self.nu_hat[k - 1]),
            self.stderr[k - 1].max(self.stderr[k]),
        )
    }
}

impl IdsSource for IdsTable {
    fn interval_mass(&self, lo: f64, hi: f64) -> Result<Mass> {
        let (a, ea) = self.interpolate(lo);
        let (b, eb) = self.interpolate(hi);
        Ok(Mass {
            value: (b - a).max(0.0),
            stderr: ea.hypot(eb),
        })
    }

    fn resolution(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Largest `|E|` any eigenvalue can reach: `2d + g·max|v|`.
pub fn spectral_bound(spec: &DisorderSpec, d: usize) -> f64 {
    2.0 * d as f64 + spec.max_abs_potential()
}

fn counts_below(h: &FiniteHamiltonian<f64>, grid: &[f64]) -> Result<Vec<usize>> {
    if let Some((d, e)) = h.tridiagonal() {
        return Ok(grid.iter().map(|&x| sturm_count(&d, &e, x)).collect());
    }
    if h.dim() <= DENSE_LIMIT {
        let ev = eigenvalues(h)?;
        return Ok(grid.iter().map(|&x| ev.partition_point(|&v| v < x)).collect());
    }
    grid.iter().map(|&x| count_below(h, x)).collect()
}

/// Finite-volume IDS on `[0, side)^d`, averaged over the ensemble.
pub fn estimate_ids(spec: &DisorderSpec, d: usize, side: usize, energy_grid: &[f64], ensemble: Ensemble) -> Result<IdsTable> {
    spec.validate()?;
    ensemble.require(1, "IDS estimation")?;
    let bound = spectral_bound(spec, d);
    if energy_grid.is_empty() || energy_grid.iter().any(|e| !(e.abs() <= bound)) {
        return Err(config_err!("energy grid must be non-empty and inside [-{bound}, {bound}]"));
    }
    if energy_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err!("energy grid must be strictly increasing"));
    }
    let geom = BoxGeometry::cube(d, side as i64)?;
    let n = geom.len();
    let per: Vec<Vec<usize>> = ensemble.map(|omega| {
        let h = build_hamiltonian::<f64>(&geom, spec, omega)?;
        counts_below(&h, energy_grid)
    })?;
    let mut nu_hat = Vec::with_capacity(energy_grid.len());
    let mut stderr = Vec::with_capacity(energy_grid.len());
    for i in 0..energy_grid.len() {
        let xs: Vec<f64> = per.iter().map(|c| c[i] as f64 / n as f64).collect();
        let (m, s) = mean_stderr(&xs);
        nu_hat.push(m);
        stderr.push(if s.is_nan() { 0.0 } else { s });
    }
    Ok(IdsTable {
        energies: energy_grid.to_vec(),
        nu_hat,
        stderr,
        box_size: n,
        n_realizations: ensemble.count,
    })
}

/// Interval masses computed on demand from eigenvalue counts of a fixed
/// ensemble of boxes. Every query reuses the same realizations, so ratios of
/// nearby windows share their fluctuations.
pub struct MonteCarloIds {
    spec: DisorderSpec,
    geom: BoxGeometry,
    ensemble: Ensemble,
}

impl MonteCarloIds {
    pub fn new(spec: DisorderSpec, d: usize, side: usize, ensemble: Ensemble) -> Result<Self> {
        spec.validate()?;
        ensemble.require(1, "IDS estimation")?;
        Ok(Self {
            spec,
            geom: BoxGeometry::cube(d, side as i64)?,
            ensemble,
        })
    }

    pub fn box_size(&self) -> usize {
        self.geom.len()
    }
}

impl IdsSource for MonteCarloIds {
    fn interval_mass(&self, lo: f64, hi: f64) -> Result<Mass> {
        let n = self.geom.len() as f64;
        let xs: Vec<f64> = self.ensemble.map(|omega| {
            let h = build_hamiltonian::<f64>(&self.geom, &self.spec, omega)?;
            let c = counts_below(&h, &[lo, hi])?;
            Ok((c[1] - c[0]) as f64 / n)
        })?;
        let (m, s) = mean_stderr(&xs);
        Ok(Mass {
            value: m,
            stderr: if s.is_nan() { 0.0 } else { s },
        })
    }

    /// Width of the spectrum divided by the number of eigenvalues the whole
    /// ensemble holds: windows narrower than this expect less than one count.
    fn resolution(&self) -> f64 {
        let width = 2.0 * spectral_bound(&self.spec, self.geom.dim());
        width / (self.geom.len() as f64 * self.ensemble.count as f64)
    }
}

/// A closed-form IDS `x ↦ ν((-∞, x))`.
pub struct AnalyticIds<F> {
    cdf: F,
    resolution: f64,
}

impl<F: Fn(f64) -> f64 + Sync> AnalyticIds<F> {
    pub fn new(cdf: F) -> Self {
        Self { cdf, resolution: 0.0 }
    }
}

impl<F: Fn(f64) -> f64 + Sync> IdsSource for AnalyticIds<F> {
    fn interval_mass(&self, lo: f64, hi: f64) -> Result<Mass> {
        Ok(Mass {
            value: (self.cdf)(hi) - (self.cdf)(lo),
            stderr: 0.0,
        })
    }

    fn resolution(&self) -> f64 {
        self.resolution
    }
}

/// IDS of the free Laplacian on ℤ: `arccos(-E/2) / π` on `[-2, 2]`.
pub fn free_laplacian_ids_1d(e: f64) -> f64 {
    if e <= -2.0 {
        0.0
    } else if e >= 2.0 {
        1.0
    } else {
        (-e / 2.0).acos() / std::f64::consts::PI
    }
}

/// Ratios `ν([λ-ε, λ+ε)) / (2ε)^α` along a decreasing sequence of `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracDerivEstimate {
    pub lambda: f64,
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    pub ratios: Vec<f64>,
    pub ratio_stderrs: Vec<f64>,
    /// Mean of the last three ratios when they agree within 10%.
    pub d_alpha: Option<f64>,
    /// Maximum over the tail (last half, at least three points), standing in
    /// for the limsup. `None` when the ratios blow up.
    pub d_alpha_upper: Option<f64>,
    /// Error of the tail maximum.
    pub d_alpha_upper_stderr: f64,
    pub stabilized: bool,
    /// Ratios grow like `(2ε)^{-α}`: the measure has an atom at `λ`.
    pub diverging: bool,
}

pub fn fractional_derivative(source: &dyn IdsSource, lambda: f64, alpha: f64, epsilons: &[f64]) -> Result<FracDerivEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(config_err!("alpha = {alpha} must lie in (0, 1]"));
    }
    if epsilons.is_empty() || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_err!("epsilons must be non-empty and strictly decreasing"));
    }
    let res = source.resolution();
    if let Some(&e) = epsilons.iter().find(|&&e| !(e > res)) {
        return Err(Error::Precision(format!("epsilon {e} is not above the resolution {res}")));
    }
    let mut ratios = Vec::with_capacity(epsilons.len());
    let mut ratio_stderrs = Vec::with_capacity(epsilons.len());
    for &e in epsilons {
        let m = source.interval_mass(lambda - e, lambda + e)?;
        let scale = (2.0 * e).powf(alpha);
        ratios.push(m.value / scale);
        ratio_stderrs.push(m.stderr / scale);
    }
    let n = ratios.len();
    let tail = n.div_ceil(2).max(3).min(n);
    let (imax, &upper) = ratios[n - tail..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty tail");
    let stabilized = n >= 3 && {
        let last = &ratios[n - 3..];
        let hi = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = last.iter().cloned().fold(f64::INFINITY, f64::min);
        hi > 0.0 && (hi - lo) <= 0.1 * hi
    };
    // an atom of mass m gives ratio m (2ε)^{-α}: a log-log slope of -α
    let diverging = n >= 3 && {
        let x: Vec<f64> = epsilons.iter().map(|e| (2.0 * e).ln()).collect();
        let pos = ratios.iter().all(|&r| r > 0.0);
        pos && {
            let y: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
            let fit = crate::green_decay::fit_line(&x, &y);
            fit.slope < -0.5 * alpha && ratios.windows(2).all(|w| w[1] > w[0])
        }
    };
    Ok(FracDerivEstimate {
        lambda,
        alpha,
        epsilons: epsilons.to_vec(),
        d_alpha: (stabilized && !diverging).then(|| ratios[n - 3..].iter().sum::<f64>() / 3.0),
        d_alpha_upper: (!diverging).then_some(upper),
        d_alpha_upper_stderr: ratio_stderrs[n - tail + imax],
        ratios,
        ratio_stderrs,
        stabilized,
        diverging,
    })
}

/// `β_L = L^{d/α}`, by integer powers whenever `d/α` is an integer.
pub fn beta_scale(l: usize, d: usize, alpha: f64) -> f64 {
    let p = d as f64 / alpha;
    let lf = l as f64;
    if (p - p.round()).abs() < 1e-12 && p.round() <= i32::MAX as f64 {
        lf.powi(p.round() as i32)
    } else {
        lf.powf(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub scale: usize,
    pub beta: f64,
    pub value: f64,
    pub stderr: f64,
}

/// `L ↦ L^d ν(λ + β_L^{-1}[-c, c))` with the heuristic subsequence choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledScan {
    pub lambda: f64,
    pub halfwidth: f64,
    pub alpha: f64,
    pub points: Vec<ScanPoint>,
    /// Scales `L` whose value is at least every value at larger `L`: they
    /// realize the running limsup. A heuristic stand-in for the subsequence.
    pub selected: Vec<usize>,
    pub warnings: Vec<String>,
}

impl ScaledScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,scaled_value,stderr,selected\n");
        for p in &self.points {
            let sel = self.selected.contains(&p.scale);
            let _ = writeln!(out, "{},{},{},{}", p.scale, p.value, p.stderr, sel);
        }
        out
    }
}

pub fn scaled_measure_scan(
    source: &dyn IdsSource,
    lambda: f64,
    halfwidth: f64,
    alpha: f64,
    d: usize,
    scales: &[usize],
) -> Result<ScaledScan> {
    if !(halfwidth > 0.0) {
        return Err(config_err!("window half-width must be positive"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(config_err!("alpha = {alpha} must lie in (0, 1]"));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let res = source.resolution();
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for &l in &sorted {
        let beta = beta_scale(l, d, alpha);
        let w = halfwidth / beta;
        if !(w > res) {
            warnings.push(format!(
                "scan truncated at L = {l}: window half-width {w:e} is below the resolution {res:e}"
            ));
            break;
        }
        let m = source.interval_mass(lambda - w, lambda + w)?;
        let vol = (l as f64).powi(d as i32);
        points.push(ScanPoint {
            scale: l,
            beta,
            value: vol * m.value,
            stderr: vol * m.stderr,
        });
    }
    let mut selected = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for p in points.iter().rev() {
        if p.value >= best {
            best = p.value;
            selected.push(p.scale);
        }
    }
    selected.reverse();
    Ok(ScaledScan {
        lambda,
        halfwidth,
        alpha,
        points,
        selected,
        warnings,
    })
}
