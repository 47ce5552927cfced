//! Fractional moments `E|G(z; n, m)|^s` of the finite-volume resolvent as a
//! function of `|n - m|`, and the exponential decay rate fitted to them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderSpec;
use crate::ensemble::Ensemble;
use crate::error::{config_err, domain_err, Result};
use crate::lattice::{build_hamiltonian, BoxGeometry};
use crate::spectral::Resolvent;
use crate::Complex;

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let slope_stderr = if x.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LineFit {
        intercept,
        slope,
        slope_stderr,
        r_squared,
        residuals,
    }
}

/// Decay profile of `E|G|^s` and its log-linear fit `log C - r·|n - m|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub s: f64,
    pub z: Complex,
    pub distances: Vec<usize>,
    /// `log` of the sample mean of `|G|^s` at each distance.
    pub log_means: Vec<f64>,
    /// Delta-method standard error of each log-mean.
    pub stderrs: Vec<f64>,
    pub fit: LineFit,
    /// `r = -slope`, an estimate, never a certified constant.
    pub rate: f64,
    pub n_realizations: usize,
}

impl DecayEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distance,log_mean,stderr\n");
        for ((d, m), e) in self.distances.iter().zip(&self.log_means).zip(&self.stderrs) {
            let _ = writeln!(out, "{d},{m},{e}");
        }
        out
    }
}

/// `E|G(z; n, m)|^s` grouped by `|n - m|₁` and fitted against the distance.
///
/// Pairs at the same distance are averaged inside each realization first, so
/// the standard errors come from independent samples.
pub fn estimate_fractional_moments(
    spec: &DisorderSpec,
    geom: &BoxGeometry,
    s: f64,
    z: Complex,
    pairs: &[(Vec<i64>, Vec<i64>)],
    ensemble: Ensemble,
) -> Result<DecayEstimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(config_err!("fractional exponent s = {s} must lie in (0, 1)"));
    }
    if !(z.im > 0.0) {
        return Err(config_err!("probe needs Im z > 0, got {}", z.im));
    }
    ensemble.require(100, "fractional moment estimation")?;
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (a, b) in pairs {
        let ia = geom.index_of(a).ok_or_else(|| domain_err!("site {a:?} outside the box"))?;
        let ib = geom.index_of(b).ok_or_else(|| domain_err!("site {b:?} outside the box"))?;
        let dist = a.iter().zip(b).map(|(x, y)| (x - y).unsigned_abs() as usize).sum();
        groups.entry(dist).or_default().push((ia, ib));
    }
    if groups.len() < 4 {
        return Err(config_err!("need at least 4 distinct distances, got {}", groups.len()));
    }
    let mut columns: Vec<usize> = groups.values().flatten().map(|&(_, b)| b).collect();
    columns.sort_unstable();
    columns.dedup();

    // per realization: mean |G|^s for every distance group
    let samples: Vec<Vec<f64>> = ensemble.map(|omega| {
        let h = build_hamiltonian::<f64>(geom, spec, omega)?;
        let r = Resolvent::new(&h, z)?;
        let cols: BTreeMap<usize, Vec<Complex>> = columns.iter().map(|&m| (m, r.column(m))).collect();
        Ok(groups
            .values()
            .map(|ps| {
                // |G|^s = exp(s ln|G|) stays finite for any |G| <= 1/Im z
                let sum: f64 = ps.iter().map(|&(a, b)| (s * cols[&b][a].norm().ln()).exp()).sum();
                sum / ps.len() as f64
            })
            .collect())
    })?;

    let n = samples.len() as f64;
    let mut log_means = Vec::with_capacity(groups.len());
    let mut stderrs = Vec::with_capacity(groups.len());
    for g in 0..groups.len() {
        let xs: Vec<f64> = samples.iter().map(|row| row[g]).collect();
        let (mean, se) = crate::ensemble::mean_stderr(&xs);
        log_means.push(mean.ln());
        stderrs.push(se / mean);
    }
    let distances: Vec<usize> = groups.keys().copied().collect();
    let xs: Vec<f64> = distances.iter().map(|&d| d as f64).collect();
    let fit = fit_line(&xs, &log_means);
    Ok(DecayEstimate {
        s,
        z,
        distances,
        log_means,
        stderrs,
        rate: -fit.slope,
        fit,
        n_realizations: n as usize,
    })
}

/// Pairs `(c, c + t·e_0)` from the box centre `c` along the first axis.
pub fn axis_pairs(geom: &BoxGeometry, distances: &[usize]) -> Result<Vec<(Vec<i64>, Vec<i64>)>> {
    let centre: Vec<i64> = geom.lows().iter().zip(geom.highs()).map(|(l, h)| l + (h - l - 1) / 2).collect();
    distances
        .iter()
        .map(|&t| {
            let mut far = centre.clone();
            far[0] += t as i64;
            if !geom.contains(&far) {
                return Err(domain_err!("distance {t} from the centre leaves the box"));
            }
            Ok((centre.clone(), far))
        })
        .collect()
}

/// Lower bound `(1/r)[(1 - s)d/α + d + (d - 1)a]` that the margin exponent
/// `gamma_log` has to exceed.
pub fn margin_threshold(r: f64, s: f64, d: usize, alpha: f64, a: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain_err!("decay rate r = {r} is not positive; no localization witnessed"));
    }
    if !(s > 0.0 && s < 1.0) || !(alpha > 0.0 && alpha <= 1.0) || !(a > 0.0 && a < 1.0) || d == 0 {
        return Err(config_err!("margin threshold needs s, a in (0,1), alpha in (0,1], d >= 1"));
    }
    let d = d as f64;
    Ok(((1.0 - s) * d / alpha + d + (d - 1.0) * a) / r)
}
