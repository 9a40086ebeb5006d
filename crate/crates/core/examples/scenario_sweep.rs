//! Runs both mitigation scenarios over a distance sweep and prints a summary.
//!
//! `cargo run --release --example scenario_sweep [config-file]`
//! With no argument a shortened version of the shipped configuration runs.

use dwdm_rof::harness::{parse_config, run_scenario, DEFAULT_CONFIG};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cfg = match std::env::args().nth(1) {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => {
            let mut cfg = parse_config(DEFAULT_CONFIG)?;
            cfg.grid.channel_count = 4;
            cfg.symbols_per_run = 512;
            cfg.distances_km = vec![0.0, 100.0];
            cfg
        }
    };
    let run = run_scenario(&cfg)?;
    println!("{:<5} {:>8} {:>9} {:>11} {:>8} {:>12}", "case", "km", "EVM %", "BER", "Q", "HD2 dB");
    for p in &run.points {
        match &p.outcome {
            Ok(_) => {
                let r = run.report.point(p.scenario.name(), p.distance_km);
                println!(
                    "{:<5} {:>8.1} {:>9.3} {:>11.3e} {:>8.2} {:>12.2}",
                    p.scenario.name(),
                    p.distance_km,
                    r.mean_evm_percent(),
                    r.mean_ber(),
                    r.mean_q_factor(),
                    r.mean_harmonic_db()
                );
            }
            Err(e) => println!("{:<5} {:>8.1} failed: {e}", p.scenario.name(), p.distance_km),
        }
    }
    let t = &run.telemetry;
    println!(
        "wall {:.1} s (tx {:.1}, fiber {:.1}, rx {:.1}), {} SSFM steps, {} optical samples",
        t.wall_clock_s, t.transmitter_s, t.propagation_s, t.receiver_s, t.ssfm_steps, t.optical_samples
    );
    Ok(())
}
