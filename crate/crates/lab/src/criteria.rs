//! The acceptance criteria C1–C9 and the suite that runs them.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anderson_core::ids::estimate_ids;
use anderson_core::linalg::DenseMatrix;
use anderson_core::point_process::{cell_counts, perturbation_identity_check};
use anderson_core::poisson::{minami_check, poisson_fit, wegner_check, CountDistribution, PoissonReport};
use anderson_core::spectral::green_spectral;
use anderson_core::{
    build_hamiltonian, eigensolve, green, partition_box, BoxGeometry, Complex, DisorderSpec, Ensemble, GreenQuery, Hamiltonian, Realization,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::manifest::{sha256_hex, stage_seed, update_manifest, StageRecord};
use crate::pipeline::{self, AuditReport, DecayReport, IdsReport, ScaleSamples, StatsReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    /// Wall time of the check plus the stages it consumes.
    pub seconds: f64,
    pub budget_seconds: f64,
    pub details: Value,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {} ({:.1} s, budget {:.0} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.summary,
            self.seconds,
            self.budget_seconds
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    pub failed: Vec<String>,
}

impl SuiteReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let _ = writeln!(s, "{}", c.line());
        }
        let _ = writeln!(
            s,
            "{}",
            if self.passed {
                "all criteria passed".to_string()
            } else {
                format!("failed: {}", self.failed.join(", "))
            }
        );
        s
    }
}

/// Outcome of one criterion before timing is attached.
pub struct Check {
    pub pass: bool,
    pub summary: String,
    pub details: Value,
}

fn criterion(id: &str, name: &str, budget: f64, prior: f64, f: impl FnOnce() -> Result<Check, LabError>) -> CriterionResult {
    let start = Instant::now();
    let (pass, summary, details) = match f() {
        Ok(c) => (c.pass, c.summary, c.details),
        Err(e) => (false, format!("error: {e}"), Value::Null),
    };
    CriterionResult {
        id: id.into(),
        name: name.into(),
        pass,
        summary,
        seconds: prior + start.elapsed().as_secs_f64(),
        budget_seconds: budget,
        details,
    }
}

// ---------------------------------------------------------------- C1

fn trace_and_green(h: &Hamiltonian, z: Complex) -> Result<(f64, f64), LabError> {
    let n = h.dim();
    let coeffs = [0.5, -1.0, 0.25, 0.1];
    let g: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();
    let m = h.to_dense();
    let mut power = DenseMatrix::<f64>::identity(n);
    let mut direct = 0.0;
    for &c in &coeffs {
        direct += c * (0..n).map(|i| g[i] * power[(i, i)]).sum::<f64>();
        power = power.matmul(&m);
    }
    let s = eigensolve(h)?;
    let via_spectrum = s.trace_sum(|e| coeffs.iter().rev().fold(0.0, |acc, c| acc * e + c), &g);
    let trace_err = (direct - via_spectrum).abs() / direct.abs().max(1.0);
    let pairs: Vec<(usize, usize)> = (0..n).step_by(3).flat_map(|a| [(a, a), (a, n - 1 - a)]).collect();
    let solved = green(h, &GreenQuery::new(z, pairs)?)?;
    let green_err = solved
        .iter()
        .map(|(&(a, b), v)| (v - green_spectral(&s, z, a, b)).norm())
        .fold(0.0, f64::max);
    Ok((trace_err, green_err))
}

pub fn c1_identities(cfg: &ExperimentConfig) -> Result<Check, LabError> {
    let seed = stage_seed(cfg.master_seed, "identities");
    let tol = cfg.thresholds.identity_residual;
    let mut worst_identity: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut worst_green: f64 = 0.0;
    for k in 0..100u64 {
        let omega = Realization::new(seed, k);
        let z = Complex::new(-2.0 + 0.04 * k as f64, 0.005 + 0.01 * (k % 17) as f64);
        let (host, cell, n) = if k < 50 {
            let side = 40 + (k as i64 * 37) % 361;
            let lo = side / 5 + (k as i64 % 5);
            let hi = lo + side / 2;
            (
                BoxGeometry::interval(0, side)?,
                BoxGeometry::interval(lo, hi)?,
                vec![lo + (hi - lo) / 2],
            )
        } else {
            let side = 8 + (k as i64 * 5) % 13;
            let cell = BoxGeometry::new(vec![1, 1], vec![side - 1, side - 2])?;
            (BoxGeometry::cube(2, side)?, cell, vec![side / 2 - 1, side / 2 - 1])
        };
        let h: Hamiltonian = build_hamiltonian(&host, &cfg.disorder, omega)?;
        worst_identity = worst_identity.max(perturbation_identity_check(&h, &cell, z, &n, 1)?.residual);
        if k % 10 == 0 {
            let (t, g) = trace_and_green(&h.restrict(&cell)?, z)?;
            worst_trace = worst_trace.max(t);
            worst_green = worst_green.max(g);
        }
    }
    Ok(Check {
        pass: worst_identity <= tol && worst_trace <= tol && worst_green <= tol,
        summary: format!(
            "max residuals: perturbation {worst_identity:.2e}, trace {worst_trace:.2e}, green {worst_green:.2e} (tol {tol:.0e})"
        ),
        details: json!({"perturbation": worst_identity, "trace": worst_trace, "green": worst_green, "configurations": 100}),
    })
}

// ---------------------------------------------------------------- C2

pub fn c2_wegner_minami(cfg: &ExperimentConfig) -> Result<Check, LabError> {
    let seed = stage_seed(cfg.master_seed, "wegner");
    let laws = [
        ("uniform g=8", DisorderSpec::uniform(-0.5, 0.5, 8.0)),
        ("alpha-power a=0.5 g=1", DisorderSpec::alpha_power(0.5, 1.0)),
    ];
    let widths = [0.02, 0.1, 0.5];
    let sides = [100i64, 200];
    let mut rows = Vec::new();
    let mut all = true;
    let mut k = 0u64;
    for (label, spec) in &laws {
        for &w in &widths {
            for &side in &sides {
                let geom = BoxGeometry::interval(0, side)?;
                let interval = [cfg.lambda - w / 2.0, cfg.lambda + w / 2.0];
                let ens = Ensemble::new(seed, 2000);
                let ens = Ensemble { first: k * 2000, ..ens };
                k += 1;
                let wr = wegner_check(spec, &geom, interval, ens)?;
                let mr = minami_check(spec, &geom, interval, ens)?;
                all &= wr.pass && mr.pass;
                rows.push(json!({
                    "law": label, "width": w, "side": side,
                    "wegner": {"mean": wr.mean, "stderr": wr.stderr, "bound": wr.bound, "pass": wr.pass},
                    "minami": {"mean": mr.mean, "stderr": mr.stderr, "bound": mr.bound, "pass": mr.pass},
                }));
            }
        }
    }
    Ok(Check {
        pass: all,
        summary: format!("{} Wegner and {} Minami checks, 2000 realizations each", rows.len(), rows.len()),
        details: Value::Array(rows),
    })
}

// ---------------------------------------------------------------- C3

pub fn c3_decay(cfg: &ExperimentConfig, decay: &DecayReport) -> Result<Check, LabError> {
    let e = &decay.estimate;
    Ok(Check {
        pass: e.rate > 0.0 && e.fit.r_squared > cfg.thresholds.min_r_squared,
        summary: format!(
            "rate {:.4} ± {:.4}, R² {:.4}, margin threshold {}",
            e.rate,
            e.fit.slope_stderr,
            e.fit.r_squared,
            decay
                .margin_threshold
                .map_or("n/a".into(), |t| format!("{t:.2} vs gamma_log {}", decay.gamma_log))
        ),
        details: json!({"rate": e.rate, "r_squared": e.fit.r_squared, "n_realizations": e.n_realizations, "margin_ok": decay.margin_ok}),
    })
}

// ---------------------------------------------------------------- C4

pub fn c4_free_ids(cfg: &ExperimentConfig) -> Result<Check, LabError> {
    let free = cfg.disorder.with_coupling(0.0);
    let grid: Vec<f64> = (0..=380).map(|i| -1.9 + 0.01 * i as f64).collect();
    let table = estimate_ids(&free, 1, 1000, &grid, Ensemble::new(cfg.master_seed, 1))?;
    let sup = grid
        .iter()
        .zip(&table.nu_hat)
        .map(|(&e, &nu)| (nu - (-e / 2.0).acos() / std::f64::consts::PI).abs())
        .fold(0.0, f64::max);
    Ok(Check {
        pass: sup <= cfg.thresholds.ids_sup_error,
        summary: format!("sup error {sup:.2e} on [-1.9, 1.9] (tol {})", cfg.thresholds.ids_sup_error),
        details: json!({"sup_error": sup}),
    })
}

// ---------------------------------------------------------------- C5

pub fn c5_poisson(stats: &StatsReport, ids: &IdsReport) -> Result<Check, LabError> {
    let s = stats.scales.last().ok_or_else(|| LabError::Validation("no scales".into()))?;
    let Some(p) = &s.poisson else {
        return Ok(Check {
            pass: false,
            summary: format!("only {} samples at L = {}", s.n, s.scale),
            details: Value::Null,
        });
    };
    let int = s.intensity.as_ref().expect("ids report given");
    let enough = s.n >= 2000;
    Ok(Check {
        pass: enough && p.tv_ok && p.dispersion_ok && int.pass,
        summary: format!(
            "L = {}, n = {}: TV {:.4}, var/mean {:.3}, chi-square p {}, mean {:.4} vs |I|D̂|Q| = {:.4} ({:.1}% off)",
            s.scale,
            s.n,
            p.tv_distance,
            p.dispersion,
            p.chi_square_shape.p_value.map_or("n/a".into(), |v| format!("{v:.3}")),
            int.mean,
            ids.target_intensity,
            100.0 * int.relative_deviation
        ),
        details: json!({"poisson": p, "intensity": int}),
    })
}

// ---------------------------------------------------------------- C6

pub fn c6_gap_trend(stats: &StatsReport) -> Result<Check, LabError> {
    let gaps: Vec<(usize, f64, f64)> = stats
        .scales
        .iter()
        .filter_map(|s| s.gap.map(|g| (s.scale, g.mean, g.stderr)))
        .collect();
    let decreasing = gaps.len() >= 2
        && gaps.windows(2).all(|w| {
            let sigma = w[0].2.hypot(w[1].2);
            w[0].1 - w[1].1 > sigma
        });
    let text: Vec<String> = gaps.iter().map(|(l, m, s)| format!("L={l}: {m:.4}±{s:.4}")).collect();
    Ok(Check {
        pass: decreasing,
        summary: text.join(", "),
        details: json!(gaps),
    })
}

// ---------------------------------------------------------------- C7

pub fn c7_remainder(cfg: &ExperimentConfig, audit: &AuditReport) -> Result<Check, LabError> {
    let a = &audit.audit;
    let pass = a.relative_error.is_some_and(|r| r <= cfg.thresholds.audit_slope_tolerance);
    Ok(Check {
        pass,
        summary: format!(
            "slope {} vs predicted {:.3} over L = {:?}, c = {}",
            a.slope
                .map_or("n/a".into(), |s| format!("{s:.3} ± {:.3}", a.slope_stderr.unwrap_or(f64::NAN))),
            a.predicted_slope,
            a.scales,
            audit.interval_halfwidth
        ),
        details: json!(a),
    })
}

// ---------------------------------------------------------------- C8

pub fn negative_control(cfg: &ExperimentConfig) -> Result<PoissonReport, LabError> {
    let free = cfg.disorder.with_coupling(0.0);
    let scale = cfg.largest_scale();
    let w = anderson_core::point_process::WindowSpec::new(
        cfg.lambda,
        cfg.negative_control.interval_halfwidth,
        cfg.q.clone(),
        scale,
        cfg.alpha,
    )?;
    let part = partition_box(scale, cfg.a_exponent, &cfg.q, cfg.gamma_log)?;
    let counts = Ensemble::new(stage_seed(cfg.master_seed, "negative"), cfg.negative_control.n_realizations)
        .map(|omega| Ok(cell_counts(&part, &free, omega, &w)?.iter().sum::<usize>()))?;
    Ok(poisson_fit(
        &CountDistribution::from_counts(&counts, None),
        &cfg.thresholds.poisson(),
    )?)
}

pub fn c8_negative_control(cfg: &ExperimentConfig) -> Result<Check, LabError> {
    let p = negative_control(cfg)?;
    Ok(Check {
        pass: !(p.tv_ok && p.dispersion_ok),
        summary: format!(
            "g = 0: mean {:.3}, var/mean {:.3}, TV {:.3}, verdict {:?}",
            p.mean, p.dispersion, p.tv_distance, p.verdict
        ),
        details: json!(p),
    })
}

// ---------------------------------------------------------------- C9

/// Serialized sample stream of `cfg` on a pool of `workers` threads.
pub fn stream_bytes(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<u8>, LabError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Resource(e.to_string()))?;
    let samples: Vec<ScaleSamples> = pool.install(|| pipeline::simulate_samples(cfg))?;
    pipeline::samples_to_bytes(&samples)
}

pub fn c9_determinism(cfg: &ExperimentConfig) -> Result<Check, LabError> {
    let mut small = cfg.clone();
    small.l_list = vec![*cfg.l_list.iter().min().expect("validated")];
    small.n_realizations = cfg.n_realizations.min(1000);
    let mut digests = Vec::new();
    for w in [1, 4, 8] {
        digests.push((w, sha256_hex(&stream_bytes(&small, w)?)));
    }
    let same = digests.windows(2).all(|p| p[0].1 == p[1].1);
    Ok(Check {
        pass: same,
        summary: format!(
            "sha256 of the stream at workers 1, 4, 8: {}",
            if same { &digests[0].1[..16] } else { "differ" }
        ),
        details: json!(digests),
    })
}

// ---------------------------------------------------------------- suite

fn stage<T>(
    name: &'static str,
    seed: u64,
    timings: &mut Vec<(String, StageRecord)>,
    f: impl FnOnce() -> Result<T, LabError>,
) -> (Result<T, String>, f64) {
    let start = Instant::now();
    let r = pipeline::timed(name, seed, timings, f).map_err(|e| e.to_string());
    (r, start.elapsed().as_secs_f64())
}

fn failed(id: &str, name: &str, budget: f64, secs: f64, msg: &str) -> CriterionResult {
    criterion(id, name, budget, secs, || Err(LabError::Compute(msg.to_string())))
}

/// Runs every stage, then the nine criteria. Stage failures turn into failed
/// criteria instead of aborting, so a broken configuration is still reported.
pub fn verify_suite(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<SuiteReport, LabError> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let m = cfg.master_seed;
    let mut timings = Vec::new();
    let mut results = Vec::new();

    results.push(criterion("C1", "exact identities", 60.0, 0.0, || c1_identities(cfg)));
    results.push(criterion("C2", "Wegner and Minami bounds", 600.0, 0.0, || c2_wegner_minami(cfg)));

    let (decay, t_decay) = stage("decay", stage_seed(m, "decay"), &mut timings, || pipeline::run_decay(cfg, out));
    results.push(match &decay {
        Ok(d) => criterion("C3", "fractional moment decay", 300.0, t_decay, || c3_decay(cfg, d)),
        Err(e) => failed("C3", "fractional moment decay", 300.0, t_decay, e),
    });
    results.push(criterion("C4", "free Laplacian IDS", 60.0, 0.0, || c4_free_ids(cfg)));

    let (ids, t_ids) = stage("ids", stage_seed(m, "ids"), &mut timings, || pipeline::run_ids(cfg, out));
    let (samples, t_sim) = stage("simulate", stage_seed(m, "simulate"), &mut timings, || {
        pipeline::run_simulate(cfg, out)
    });
    let (stats, t_stats) = match (&samples, &ids) {
        (Ok(s), Ok(i)) => stage("stats", stage_seed(m, "simulate"), &mut timings, || {
            pipeline::run_stats(cfg, out, s, Some(i))
        }),
        (Err(e), _) | (_, Err(e)) => (Err(e.clone()), 0.0),
    };
    results.push(match (&stats, &ids) {
        (Ok(s), Ok(i)) => criterion("C5", "Poisson shape and intensity", 1800.0, t_ids + t_sim + t_stats, || {
            c5_poisson(s, i)
        }),
        (Err(e), _) | (_, Err(e)) => failed("C5", "Poisson shape and intensity", 1800.0, t_ids + t_sim + t_stats, e),
    });
    results.push(match &stats {
        Ok(s) => criterion("C6", "xi-eta proximity trend", 900.0, t_sim + t_stats, || c6_gap_trend(s)),
        Err(e) => failed("C6", "xi-eta proximity trend", 900.0, t_sim + t_stats, e),
    });

    let (audit, t_audit) = stage("audit", stage_seed(m, "audit"), &mut timings, || pipeline::run_audit(cfg, out));
    results.push(match &audit {
        Ok(a) => criterion("C7", "remainder scaling", 900.0, t_audit, || c7_remainder(cfg, a)),
        Err(e) => failed("C7", "remainder scaling", 900.0, t_audit, e),
    });
    results.push(criterion("C8", "negative control", 600.0, 0.0, || c8_negative_control(cfg)));
    results.push(criterion("C9", "determinism across workers", 600.0, 0.0, || c9_determinism(cfg)));

    let failed: Vec<String> = results.iter().filter(|r| !r.pass).map(|r| r.id.clone()).collect();
    let report = SuiteReport {
        passed: failed.is_empty(),
        failed,
        criteria: results,
    };
    std::fs::write(out.join("verify.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    std::fs::write(out.join("verify.txt"), report.text())?;
    update_manifest(out, cfg, workers, &timings)?;
    Ok(report)
}
