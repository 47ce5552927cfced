//! The experiment stages: decay → ids → simulate → stats → audit.
//!
//! Every stage draws from its own seed (see [`stage_seed`]), writes its
//! artifacts under the output directory and returns a typed report.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anderson_core::green_decay::{axis_pairs, estimate_fractional_moments, margin_threshold, DecayEstimate};
use anderson_core::ids::{
    estimate_ids, fractional_derivative, scaled_measure_scan, spectral_bound, FracDerivEstimate, IdsTable, MonteCarloIds, ScaledScan,
};
use anderson_core::point_process::{cell_counts, sample_realization, GapEstimate, WindowSpec};
use anderson_core::poisson::{
    charfn_profile, intensity_check, poisson_fit, remainder_audit, AuditLevel, CharFnProfile, CountDistribution, IntensityCheck,
    PoissonReport, RemainderAudit,
};
use anderson_core::{ensemble::mean_stderr, partition_box, BoxGeometry, Complex, Ensemble};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::manifest::{stage_seed, update_manifest, StageRecord};
use crate::svg::{Plot, Series, Style};

pub const SAMPLES: &str = "samples.jsonl";

fn write(path: PathBuf, text: &str) -> Result<(), LabError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<(), LabError> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, LabError> {
    let text = fs::read_to_string(path)
        .map_err(|e| LabError::Validation(format!("{} is missing; run the stage that writes it first ({e})", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn window(cfg: &ExperimentConfig, scale: usize, c: f64) -> Result<WindowSpec, LabError> {
    Ok(WindowSpec::new(cfg.lambda, c, cfg.q.clone(), scale, cfg.alpha)?)
}

// ---------------------------------------------------------------- decay

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub seed: u64,
    pub estimate: DecayEstimate,
    /// `None` when no positive rate was witnessed.
    pub margin_threshold: Option<f64>,
    pub gamma_log: f64,
    pub margin_ok: bool,
}

pub fn run_decay(cfg: &ExperimentConfig, out: &Path) -> Result<DecayReport, LabError> {
    let d = &cfg.decay;
    let seed = stage_seed(cfg.master_seed, "decay");
    let geom = BoxGeometry::cube(cfg.dimension, d.box_side as i64)?;
    let distances: Vec<usize> = (d.min_distance..=d.max_distance).collect();
    let pairs = axis_pairs(&geom, &distances)?;
    let z = Complex::new(cfg.lambda, d.eta);
    let estimate = estimate_fractional_moments(&cfg.disorder, &geom, d.s, z, &pairs, Ensemble::new(seed, d.n_realizations))?;
    let threshold = margin_threshold(estimate.rate, d.s, cfg.dimension, cfg.alpha, cfg.a_exponent).ok();
    let report = DecayReport {
        seed,
        margin_ok: threshold.is_some_and(|t| cfg.gamma_log > t),
        margin_threshold: threshold,
        gamma_log: cfg.gamma_log,
        estimate,
    };
    write_json(out.join("decay.json"), &report)?;
    write(out.join("decay.csv"), &report.estimate.to_csv())?;
    let e = &report.estimate;
    let pts: Vec<(f64, f64)> = e.distances.iter().zip(&e.log_means).map(|(&x, &y)| (x as f64, y)).collect();
    let fit: Vec<(f64, f64)> = e
        .distances
        .iter()
        .map(|&x| (x as f64, e.fit.intercept + e.fit.slope * x as f64))
        .collect();
    let plot = Plot::new("Fractional moment decay", "|n - m|", "log E|G|^s")
        .push(Series::new("log E|G|^s", pts, Style::Markers).with_errors(e.stderrs.clone()))
        .push(Series::new(format!("fit, rate {:.3}", e.rate), fit, Style::Line));
    write(out.join("plots/decay.svg"), &plot.render())?;
    Ok(report)
}

pub fn margin_error(r: &DecayReport) -> LabError {
    LabError::Validation(match r.margin_threshold {
        Some(t) => format!("gamma_log = {} does not exceed the margin threshold {t:.3}", r.gamma_log),
        None => format!("no positive decay rate witnessed (rate {:.4})", r.estimate.rate),
    })
}

// ---------------------------------------------------------------- ids

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsReport {
    pub seed: u64,
    pub derivative: FracDerivEstimate,
    pub scan: ScaledScan,
    /// `|I| · D̂ · |Q|`, the predicted mean of the window counts.
    pub target_intensity: f64,
    pub target_stderr: f64,
}

pub fn run_ids(cfg: &ExperimentConfig, out: &Path) -> Result<IdsReport, LabError> {
    let c = &cfg.ids;
    let seed = stage_seed(cfg.master_seed, "ids");
    let ensemble = Ensemble::new(seed, c.n_realizations);
    let source = MonteCarloIds::new(cfg.disorder.clone(), cfg.dimension, c.box_side, ensemble)?;
    let derivative = fractional_derivative(&source, cfg.lambda, cfg.alpha, &c.epsilons)?;
    let scan = scaled_measure_scan(
        &source,
        cfg.lambda,
        cfg.interval_halfwidth,
        cfg.alpha,
        cfg.dimension,
        &c.scan_scales,
    )?;
    let (d, d_se) = match derivative.d_alpha {
        Some(v) => (v, *derivative.ratio_stderrs.last().expect("non-empty")),
        None => (derivative.d_alpha_upper.unwrap_or(f64::NAN), derivative.d_alpha_upper_stderr),
    };
    let scale = (2.0 * cfg.interval_halfwidth).powf(cfg.alpha) * cfg.q.volume();
    let bound = spectral_bound(&cfg.disorder, cfg.dimension);
    let grid: Vec<f64> = (0..c.grid_points)
        .map(|i| -bound + 2.0 * bound * i as f64 / (c.grid_points - 1) as f64)
        .collect();
    let table: IdsTable = estimate_ids(&cfg.disorder, cfg.dimension, c.box_side, &grid, ensemble)?;
    let report = IdsReport {
        seed,
        target_intensity: scale * d,
        target_stderr: scale * d_se,
        derivative,
        scan,
    };
    write(out.join("ids.csv"), &table.to_csv())?;
    write(out.join("scan.csv"), &report.scan.to_csv())?;
    write_json(out.join("ids.json"), &report)?;
    let pts: Vec<(f64, f64)> = table.energies.iter().cloned().zip(table.nu_hat.iter().cloned()).collect();
    write(
        out.join("plots/ids.svg"),
        &Plot::new("Integrated density of states", "E", "ν̂(E)")
            .push(Series::new("ν̂", pts, Style::Line))
            .render(),
    )?;
    Ok(report)
}

// ---------------------------------------------------------------- simulate

/// One line of `samples.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleLine {
    pub scale: usize,
    pub realization: u64,
    pub xi: Option<f64>,
    pub eta_l: usize,
    pub cells: Vec<usize>,
}

/// Samples of one scale, in realization order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSamples {
    pub scale: usize,
    pub sub_scale: usize,
    pub lines: Vec<SampleLine>,
}

pub fn simulate_samples(cfg: &ExperimentConfig) -> Result<Vec<ScaleSamples>, LabError> {
    let seed = stage_seed(cfg.master_seed, "simulate");
    let mut scales = cfg.l_list.clone();
    scales.sort_unstable();
    scales.dedup();
    scales
        .into_iter()
        .map(|scale| {
            let w = window(cfg, scale, cfg.interval_halfwidth)?;
            let part = partition_box(scale, cfg.a_exponent, &cfg.q, cfg.gamma_log)?;
            let records = Ensemble::new(seed, cfg.n_realizations)
                .map(|omega| sample_realization(&cfg.disorder, &w, &part, cfg.padding, omega, true))?;
            let lines = records
                .into_iter()
                .map(|r| SampleLine {
                    scale,
                    realization: r.realization,
                    xi: r.xi,
                    eta_l: r.eta_l,
                    cells: r.cell_counts,
                })
                .collect();
            Ok(ScaleSamples {
                scale,
                sub_scale: part.sub_scale,
                lines,
            })
        })
        .collect()
}

/// The `samples.jsonl` bytes of `samples`.
pub fn samples_to_bytes(samples: &[ScaleSamples]) -> Result<Vec<u8>, LabError> {
    let mut buf = Vec::new();
    for s in samples {
        for line in &s.lines {
            serde_json::to_writer(&mut buf, line)?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn write_samples(path: &Path, samples: &[ScaleSamples]) -> Result<(), LabError> {
    fs::write(path, samples_to_bytes(samples)?)?;
    Ok(())
}

pub fn read_samples(path: &Path, cfg: &ExperimentConfig) -> Result<Vec<ScaleSamples>, LabError> {
    let f = fs::File::open(path).map_err(|e| LabError::Validation(format!("{} is missing; run `simulate` first ({e})", path.display())))?;
    let mut out: Vec<ScaleSamples> = Vec::new();
    for line in BufReader::new(f).lines() {
        let line: SampleLine = serde_json::from_str(&line?)?;
        match out.last_mut() {
            Some(s) if s.scale == line.scale => s.lines.push(line),
            _ => out.push(ScaleSamples {
                scale: line.scale,
                sub_scale: anderson_core::lattice::sub_scale(line.scale, cfg.a_exponent),
                lines: vec![line],
            }),
        }
    }
    Ok(out)
}

pub fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<ScaleSamples>, LabError> {
    let samples = simulate_samples(cfg)?;
    fs::create_dir_all(out)?;
    write_samples(&out.join(SAMPLES), &samples)?;
    let mut csv = String::from("scale,sub_scale,n,mean_eta,mean_xi\n");
    for s in &samples {
        let eta: Vec<f64> = s.lines.iter().map(|l| l.eta_l as f64).collect();
        let xi: Vec<f64> = s.lines.iter().filter_map(|l| l.xi).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            s.scale,
            s.sub_scale,
            eta.len(),
            mean_stderr(&eta).0,
            mean_stderr(&xi).0
        );
    }
    write(out.join("cells.csv"), &cell_table(&samples))?;
    write(out.join("simulate.csv"), &csv)?;
    Ok(samples)
}

/// Per-cell mean and second factorial moment of `η̃_p`, one row per cell and scale.
fn cell_table(samples: &[ScaleSamples]) -> String {
    let mut csv = String::from("scale,cell,mean,factorial2\n");
    for s in samples {
        let n = s.lines.len() as f64;
        let cells = s.lines.first().map_or(0, |l| l.cells.len());
        for p in 0..cells {
            let (m, f2) = s.lines.iter().fold((0.0, 0.0), |(m, f), l| {
                let c = l.cells[p] as f64;
                (m + c / n, f + c * (c - 1.0) / n)
            });
            let _ = writeln!(csv, "{},{p},{m},{f2}", s.scale);
        }
    }
    csv
}

// ---------------------------------------------------------------- stats

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleStats {
    pub scale: usize,
    pub sub_scale: usize,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub histogram: Vec<(usize, usize)>,
    /// `None` with fewer samples than the Poisson tests need.
    pub poisson: Option<PoissonReport>,
    pub intensity: Option<IntensityCheck>,
    pub gap: Option<GapEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub target_intensity: Option<f64>,
    pub scales: Vec<ScaleStats>,
    pub charfn: CharFnProfile,
}

pub fn compute_stats(cfg: &ExperimentConfig, samples: &[ScaleSamples], ids: Option<&IdsReport>) -> Result<StatsReport, LabError> {
    let thresholds = cfg.thresholds.poisson();
    let target = ids.map(|r| r.target_intensity);
    let mut scales = Vec::new();
    for s in samples {
        let counts: Vec<usize> = s.lines.iter().map(|l| l.eta_l).collect();
        let dist = CountDistribution::from_counts(&counts, target);
        let poisson = if dist.n >= thresholds.min_samples {
            Some(poisson_fit(&dist, &thresholds)?)
        } else {
            None
        };
        let intensity = ids.map(|r| intensity_check(&counts, r.target_intensity, r.target_stderr, cfg.thresholds.intensity_tolerance));
        let gaps: Vec<f64> = s.lines.iter().filter_map(|l| l.xi.map(|x| (x - l.eta_l as f64).abs())).collect();
        let gap = (!gaps.is_empty()).then(|| {
            let (mean, stderr) = mean_stderr(&gaps);
            GapEstimate {
                mean,
                stderr,
                n: gaps.len(),
            }
        });
        scales.push(ScaleStats {
            scale: s.scale,
            sub_scale: s.sub_scale,
            n: dist.n,
            mean: dist.mean,
            variance: dist.variance,
            histogram: dist.histogram.iter().map(|(&k, &v)| (k, v)).collect(),
            poisson,
            intensity,
            gap,
        });
    }
    let last = samples.last().ok_or_else(|| LabError::Validation("no samples".into()))?;
    let counts: Vec<usize> = last.lines.iter().map(|l| l.eta_l).collect();
    let gamma = target.unwrap_or_else(|| counts.iter().sum::<usize>() as f64 / counts.len() as f64);
    let t_grid: Vec<f64> = (0..=32)
        .map(|i| -std::f64::consts::PI + i as f64 * std::f64::consts::PI / 16.0)
        .collect();
    let charfn = charfn_profile(&counts, &t_grid, gamma)?;
    Ok(StatsReport {
        target_intensity: target,
        scales,
        charfn,
    })
}

pub fn run_stats(cfg: &ExperimentConfig, out: &Path, samples: &[ScaleSamples], ids: Option<&IdsReport>) -> Result<StatsReport, LabError> {
    let report = compute_stats(cfg, samples, ids)?;
    write_json(out.join("stats.json"), &report)?;
    let last = report.scales.last().expect("non-empty");
    let n = last.n as f64;
    let emp: Vec<(f64, f64)> = last.histogram.iter().map(|&(k, c)| (k as f64, c as f64 / n)).collect();
    let kmax = last.histogram.last().map_or(0, |h| h.0);
    let lambda = report.target_intensity.unwrap_or(last.mean);
    let mut pmf = Vec::new();
    let mut p = (-lambda).exp();
    for k in 0..=kmax {
        if k > 0 {
            p *= lambda / k as f64;
        }
        pmf.push((k as f64, p));
    }
    write(
        out.join("plots/histogram.svg"),
        &Plot::new(&format!("Window counts at L = {}", last.scale), "count", "frequency")
            .push(Series::new("empirical", emp, Style::Bars))
            .push(Series::new(format!("Poisson({lambda:.3})"), pmf, Style::Markers))
            .render(),
    )?;
    let cf = &report.charfn;
    let re = |v: &[Complex]| cf.t_grid.iter().zip(v).map(|(&t, z)| (t, z.re)).collect::<Vec<_>>();
    write(
        out.join("plots/charfn.svg"),
        &Plot::new("Characteristic function (real part)", "t", "Re φ(t)")
            .push(Series::new("empirical", re(&cf.empirical), Style::Markers))
            .push(Series::new("Poisson target", re(&cf.target), Style::Line))
            .render(),
    )?;
    let gaps: Vec<&ScaleStats> = report.scales.iter().filter(|s| s.gap.is_some()).collect();
    if !gaps.is_empty() {
        let pts = gaps.iter().map(|s| (s.scale as f64, s.gap.unwrap().mean)).collect();
        let err = gaps.iter().map(|s| s.gap.unwrap().stderr).collect();
        write(
            out.join("plots/gap.svg"),
            &Plot::new("E|ξ - η_L|", "L", "mean gap")
                .push(Series::new("gap", pts, Style::Markers).with_errors(err))
                .render(),
        )?;
    }
    Ok(report)
}

// ---------------------------------------------------------------- audit

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub seed: u64,
    pub interval_halfwidth: f64,
    pub levels: Vec<AuditLevel>,
    pub audit: RemainderAudit,
}

pub fn compute_audit(cfg: &ExperimentConfig) -> Result<AuditReport, LabError> {
    let a = &cfg.audit;
    let seed = stage_seed(cfg.master_seed, "audit");
    let mut levels = Vec::new();
    for &scale in &a.scales {
        let w = window(cfg, scale, a.interval_halfwidth)?;
        let part = partition_box(scale, cfg.a_exponent, &cfg.q, cfg.gamma_log)?;
        let per = Ensemble::new(seed, a.n_realizations).map(|omega| cell_counts(&part, &cfg.disorder, omega, &w))?;
        let mut level = AuditLevel::new(scale, part.sub_scale, part.cells.len());
        for counts in &per {
            for &c in counts {
                level.push(c);
            }
        }
        levels.push(level);
    }
    let audit = remainder_audit(&levels, cfg.dimension, cfg.a_exponent)?;
    Ok(AuditReport {
        seed,
        interval_halfwidth: a.interval_halfwidth,
        levels,
        audit,
    })
}

pub fn run_audit(cfg: &ExperimentConfig, out: &Path) -> Result<AuditReport, LabError> {
    let report = compute_audit(cfg)?;
    write_json(out.join("audit.json"), &report)?;
    let au = &report.audit;
    let pts: Vec<(f64, f64)> = au.scales.iter().zip(&au.values).map(|(&l, &v)| (l as f64, v)).collect();
    let mut plot = Plot::new("Remainder audit |Γ_L| E[N(N-1)]", "L", "audit value")
        .log_log()
        .push(Series::new("measured", pts.clone(), Style::Markers).with_errors(au.stderrs.clone()));
    if let Some(&(l0, v0)) = pts.first().filter(|p| p.1 > 0.0) {
        let pred = au
            .scales
            .iter()
            .map(|&l| (l as f64, v0 * (l as f64 / l0).powf(au.predicted_slope)))
            .collect();
        plot = plot.push(Series::new(format!("slope {:.2}", au.predicted_slope), pred, Style::Line));
    }
    write(out.join("plots/audit.svg"), &plot.render())?;
    Ok(report)
}

// ---------------------------------------------------------------- orchestration

/// Reports of a full pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub decay: DecayReport,
    pub ids: IdsReport,
    pub samples: Vec<ScaleSamples>,
    pub stats: StatsReport,
    pub audit: AuditReport,
    pub timings: Vec<(String, StageRecord)>,
}

pub(crate) fn timed<T>(
    name: &'static str,
    seed: u64,
    timings: &mut Vec<(String, StageRecord)>,
    f: impl FnOnce() -> Result<T, LabError>,
) -> Result<T, LabError> {
    let start = Instant::now();
    let v = f().map_err(|e| e.in_stage(name))?;
    timings.push((
        name.to_string(),
        StageRecord {
            seed,
            seconds: start.elapsed().as_secs_f64(),
        },
    ));
    Ok(v)
}

/// Runs every stage in order. A failing stage aborts the run; whatever the
/// earlier stages wrote stays on disk and is listed in the manifest.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<PipelineRun, LabError> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let m = cfg.master_seed;
    let mut timings = Vec::new();
    let result = (|| {
        let decay = timed("decay", stage_seed(m, "decay"), &mut timings, || run_decay(cfg, out))?;
        if !decay.margin_ok {
            return Err(margin_error(&decay).in_stage("decay"));
        }
        let ids = timed("ids", stage_seed(m, "ids"), &mut timings, || run_ids(cfg, out))?;
        let samples = timed("simulate", stage_seed(m, "simulate"), &mut timings, || run_simulate(cfg, out))?;
        let stats = timed("stats", stage_seed(m, "simulate"), &mut timings, || {
            run_stats(cfg, out, &samples, Some(&ids))
        })?;
        let audit = timed("audit", stage_seed(m, "audit"), &mut timings, || run_audit(cfg, out))?;
        Ok((decay, ids, samples, stats, audit))
    })();
    update_manifest(out, cfg, workers, &timings)?;
    let (decay, ids, samples, stats, audit) = result?;
    Ok(PipelineRun {
        decay,
        ids,
        samples,
        stats,
        audit,
        timings,
    })
}

/// Loads the reports of earlier stages for `stats` and `report`.
pub fn load_ids(out: &Path) -> Option<IdsReport> {
    read_json(&out.join("ids.json")).ok()
}

pub fn load_json<T: for<'de> Deserialize<'de>>(out: &Path, name: &str) -> Result<T, LabError> {
    read_json(&out.join(name))
}
