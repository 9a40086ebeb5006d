//! Command-line front end: runs the scenario sweep and writes the artifacts.
//!
//! Exit status: 0 when every point succeeded, 2 when some points failed,
//! 1 for configuration or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dwdm_rof::harness::{emit_artifacts, load_config, parse_config, run_scenario, LinkConfig, Mitigation, DEFAULT_CONFIG};
use dwdm_rof::RngSeed;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Soa,
    Scro,
    Both,
}

#[derive(Debug, Parser)]
#[command(version, about = "Simulate the DWDM radio-over-fiber link and export metrics")]
struct Args {
    /// Configuration file; the built-in desk-scale configuration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSVs and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated distances in km, e.g. 50,100,300.
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Reject parameters outside the reference system's stated ranges.
    #[arg(long)]
    strict_paper: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn configure(args: &Args) -> dwdm_rof::Result<LinkConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => parse_config(DEFAULT_CONFIG)?,
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = RngSeed(seed);
    }
    if let Some(d) = &args.distances {
        cfg.distances_km = d.clone();
    }
    match args.scenario {
        Some(ScenarioArg::Soa) => cfg.scenarios = vec![Mitigation::Soa],
        Some(ScenarioArg::Scro) => cfg.scenarios = vec![Mitigation::Scro],
        Some(ScenarioArg::Both) => cfg.scenarios = vec![Mitigation::Soa, Mitigation::Scro],
        None => {}
    }
    cfg.strict_paper |= args.strict_paper;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("cannot set up {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match configure(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(1);
        }
    };
    let manifest = match emit_artifacts(&result, &args.out) {
        Ok(m) => m,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(1);
        }
    };
    for p in &result.points {
        if p.outcome.is_ok() {
            let r = result.report.point(p.scenario.name(), p.distance_km);
            log::info!(
                "{} {:>6.1} km: EVM {:.2} %, BER {:.3e}, Q {:.2}",
                p.scenario.name(),
                p.distance_km,
                r.mean_evm_percent(),
                r.mean_ber(),
                r.mean_q_factor()
            );
        }
    }
    log::info!("{} files written to {} in {:.1} s", manifest.files.len(), args.out.display(), result.telemetry.wall_clock_s);
    if manifest.failed_points.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
