//! Flocking simulator CLI.
//!
//! ```bash
//! # 30-agent homogeneous assembly, 90 s
//! hetflock --scenario homogeneous --seed 1 --duration 90 --out runs/h1
//!
//! # 7 heterogeneous agents without negotiation
//! hetflock --scenario heterogeneous --no-negotiation --seed 1
//!
//! # ten seeds in parallel with an aggregate summary
//! hetflock --scenario homogeneous --sweep-seeds 10 --out runs/sweep
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use hetflock::output::run_to_dir;
use hetflock::{config, RunRecord, ScenarioConfig};
use rayon::prelude::*;

/// Environment variable consulted when `--out` is absent.
const OUT_DIR_ENV: &str = "HETFLOCK_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "hetflock",
    version,
    about = "Deterministic heterogeneous flocking simulator"
)]
struct Args {
    /// Preset to start from: homogeneous | heterogeneous
    #[arg(long, default_value = "homogeneous")]
    scenario: String,

    /// TOML config layered onto the preset
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Simulated time in seconds
    #[arg(long)]
    duration: Option<f64>,

    /// Step size in seconds
    #[arg(long)]
    dt: Option<f64>,

    /// Output directory (default: $HETFLOCK_OUT_DIR or ./out)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Keep every desired separation fixed at its initial value
    #[arg(long)]
    no_negotiation: bool,

    /// Run N consecutive seeds starting at the configured seed
    #[arg(long, value_name = "N")]
    sweep_seeds: Option<u64>,

    /// Worker threads for per-agent control evaluation
    #[arg(long)]
    workers: Option<usize>,
}

fn resolve(args: &Args) -> hetflock::Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => config::load(path, &args.scenario)?,
        None => ScenarioConfig::preset(&args.scenario)?,
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(duration) = args.duration {
        cfg.duration = duration;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if args.no_negotiation {
        cfg.negotiation_enabled = false;
    }
    cfg.validate()
}

fn summary_row(out: &mut String, record: &RunRecord) {
    let f = record.frames.last().expect("runs have at least one frame");
    let max_err = f
        .sep_error_row
        .iter()
        .map(|(_, e)| e.abs())
        .fold(0.0, f64::max);
    let _ = writeln!(
        out,
        "{},{},{},{},{},{:.6}",
        record.seed,
        f.n_edges,
        f.n_components,
        f.mean_conn_dist
            .map(|d| format!("{d:.6}"))
            .unwrap_or_default(),
        f.n_violation_edges,
        max_err
    );
}

fn sweep(cfg: &ScenarioConfig, n: u64, out: &Path) -> hetflock::Result<()> {
    let results: Vec<hetflock::Result<RunRecord>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let seed = cfg.seed + k;
            let run_cfg = ScenarioConfig {
                seed,
                ..cfg.clone()
            };
            run_to_dir(&run_cfg, &out.join(format!("seed_{seed}"))).map(|(r, _)| r)
        })
        .collect();
    let mut summary = String::from(
        "seed,final_n_edges,final_n_components,final_mean_conn_dist,final_n_violation_edges,final_max_abs_sep_error\n",
    );
    let mut first_err = None;
    for r in results {
        match r {
            Ok(record) => summary_row(&mut summary, &record),
            Err(e) => {
                eprintln!("error: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    std::fs::write(out.join("summary.csv"), summary)?;
    first_err.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match resolve(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let result = match args.sweep_seeds {
        Some(0) => {
            eprintln!("error: --sweep-seeds must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => std::fs::create_dir_all(&out)
            .map_err(Into::into)
            .and_then(|_| sweep(&cfg, n, &out)),
        None => run_to_dir(&cfg, &out).map(|(record, bundle)| {
            let last = record.frames.last().expect("at least one frame");
            println!(
                "{} steps, t = {:.2} s, {} edges, {} components -> {}",
                record.frames.len(),
                last.time,
                last.n_edges,
                last.n_components,
                bundle.metrics.parent().unwrap_or(Path::new(".")).display()
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
