use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anderson_lab::manifest::{stage_seed, update_manifest, StageRecord};
use anderson_lab::pipeline::{self, AuditReport, DecayReport, IdsReport, StatsReport};
use anderson_lab::{verify_suite, ExperimentConfig, LabError, SuiteReport};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "anderson-lab", version, about = "Eigenvalue statistics of the Anderson model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true, default_value = "configs/reference.json")]
    config: PathBuf,
    /// Replaces `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size of the worker pool; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; defaults to `outputs.dir` of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key.path=value`, repeatable.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sample window counts and ξ at every scale into samples.jsonl.
    Simulate,
    /// Estimate the IDS and the fractional derivative at lambda.
    Ids,
    /// Fit the fractional-moment decay rate and check the margin threshold.
    Decay,
    /// Poisson tests on samples.jsonl.
    Stats,
    /// Run every stage and then the acceptance criteria.
    Verify,
    /// Summarize the reports already in the output directory.
    Report,
    /// Run every stage without the criteria.
    Run,
}

fn stage_run<T>(
    cfg: &ExperimentConfig,
    out: &Path,
    workers: usize,
    name: &'static str,
    seed_stage: &str,
    f: impl FnOnce() -> Result<T, LabError>,
) -> Result<T, LabError> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let start = std::time::Instant::now();
    let v = f().map_err(|e| e.in_stage(name))?;
    let rec = StageRecord {
        seed: stage_seed(cfg.master_seed, seed_stage),
        seconds: start.elapsed().as_secs_f64(),
    };
    update_manifest(out, cfg, workers, &[(name.to_string(), rec)])?;
    Ok(v)
}

fn report(out: &Path) -> Result<String, LabError> {
    let mut s = String::new();
    let _ = writeln!(s, "reports in {}", out.display());
    if let Ok(d) = pipeline::load_json::<DecayReport>(out, "decay.json") {
        let _ = writeln!(
            s,
            "decay: rate {:.4}, R² {:.4}, margin threshold {}, gamma_log {}",
            d.estimate.rate,
            d.estimate.fit.r_squared,
            d.margin_threshold.map_or("n/a".into(), |t| format!("{t:.3}")),
            d.gamma_log
        );
    }
    if let Ok(i) = pipeline::load_json::<IdsReport>(out, "ids.json") {
        let _ = writeln!(
            s,
            "ids: D̂ {}, target intensity {:.4} ± {:.4}",
            i.derivative.d_alpha.map_or("not stabilized".into(), |v| format!("{v:.4}")),
            i.target_intensity,
            i.target_stderr
        );
    }
    if let Ok(st) = pipeline::load_json::<StatsReport>(out, "stats.json") {
        for sc in &st.scales {
            let _ = write!(s, "stats L={}: n {}, mean {:.4}, var {:.4}", sc.scale, sc.n, sc.mean, sc.variance);
            if let Some(p) = &sc.poisson {
                let _ = write!(s, ", TV {:.4}, verdict {:?}", p.tv_distance, p.verdict);
            }
            if let Some(g) = &sc.gap {
                let _ = write!(s, ", gap {:.4} ± {:.4}", g.mean, g.stderr);
            }
            s.push('\n');
        }
    }
    if let Ok(a) = pipeline::load_json::<AuditReport>(out, "audit.json") {
        let _ = writeln!(
            s,
            "audit: slope {} vs {:.3}",
            a.audit.slope.map_or("n/a".into(), |v| format!("{v:.3}")),
            a.audit.predicted_slope
        );
    }
    if let Ok(v) = pipeline::load_json::<SuiteReport>(out, "verify.json") {
        s.push_str(&v.text());
    }
    if s.lines().count() == 1 {
        return Err(LabError::Validation(format!("no reports found in {}", out.display())));
    }
    std::fs::write(out.join("summary.txt"), &s)?;
    Ok(s)
}

fn run(cli: Cli) -> Result<(), LabError> {
    let mut cfg = ExperimentConfig::load(&cli.config)?.with_overrides(&cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.outputs.dir.clone());
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(LabError::Validation("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| LabError::Resource(e.to_string()))?;

    match cli.command {
        Command::Simulate => {
            let samples = stage_run(&cfg, &out, workers, "simulate", "simulate", || pipeline::run_simulate(&cfg, &out))?;
            for s in &samples {
                println!("L = {}: {} realizations", s.scale, s.lines.len());
            }
        }
        Command::Ids => {
            let r = stage_run(&cfg, &out, workers, "ids", "ids", || pipeline::run_ids(&cfg, &out))?;
            println!("target intensity {:.4} ± {:.4}", r.target_intensity, r.target_stderr);
        }
        Command::Decay => {
            let r = stage_run(&cfg, &out, workers, "decay", "decay", || pipeline::run_decay(&cfg, &out))?;
            println!("rate {:.4}, R² {:.4}", r.estimate.rate, r.estimate.fit.r_squared);
            if !r.margin_ok {
                return Err(pipeline::margin_error(&r).in_stage("decay"));
            }
        }
        Command::Stats => {
            let samples = pipeline::read_samples(&out.join(pipeline::SAMPLES), &cfg)?;
            let ids = pipeline::load_ids(&out);
            stage_run(&cfg, &out, workers, "stats", "simulate", || {
                pipeline::run_stats(&cfg, &out, &samples, ids.as_ref())
            })?;
            print!("{}", report(&out)?);
        }
        Command::Verify => {
            let r = verify_suite(&cfg, &out, workers)?;
            print!("{}", r.text());
            if !r.passed {
                return Err(LabError::Criteria(r.failed));
            }
        }
        Command::Report => print!("{}", report(&out)?),
        Command::Run => {
            pipeline::run_pipeline(&cfg, &out, workers)?;
            print!("{}", report(&out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
