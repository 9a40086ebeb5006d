//! CSV tables, spectra, eyes and the hashed manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::write_power_log_csv;
use crate::error::{Error, Result};
use crate::metrics::{q_from_ber, MetricsReport};
use crate::units::{decimal, frequency_to_wavelength_m};

use super::config::Mitigation;
use super::pipeline::{constellation_rows, RunResult, Telemetry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailedPoint {
    pub scenario: String,
    pub distance_km: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
    pub failed_points: Vec<FailedPoint>,
    /// Effective configuration in file syntax.
    pub config: String,
    pub tx_field_sha256: Option<String>,
    pub telemetry: TelemetryRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub wall_clock_s: f64,
    pub transmitter_s: f64,
    pub propagation_s: f64,
    pub receiver_s: f64,
    pub ssfm_steps: u64,
    pub threads: usize,
    pub optical_samples: usize,
}

impl From<&Telemetry> for TelemetryRecord {
    fn from(t: &Telemetry) -> Self {
        Self {
            wall_clock_s: t.wall_clock_s,
            transmitter_s: t.transmitter_s,
            propagation_s: t.propagation_s,
            receiver_s: t.receiver_s,
            ssfm_steps: t.ssfm_steps,
            threads: t.threads,
            optical_samples: t.optical_samples,
        }
    }
}

impl Manifest {
    pub fn entry(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|e| e.path == path)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Emitter {
    dir: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Emitter {
    fn write(&mut self, name: &str, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let mut f = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
        f.write_all(&buf).map_err(|e| Error::io(&path, e))?;
        f.flush().map_err(|e| Error::io(&path, e))?;
        self.files.push(ManifestEntry { path: name.to_string(), sha256: hex::encode(Sha256::digest(&buf)), bytes: buf.len() as u64 });
        Ok(())
    }
}

fn point_tag(scenario: Mitigation, distance_km: f64) -> String {
    format!("{}_{}km", scenario.name(), decimal(distance_km, 1))
}

/// Writes every artifact of `result` into `out_dir` and returns the manifest,
/// which is also saved as `manifest.json` (not listed in itself).
pub fn emit_artifacts(result: &RunResult, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut em = Emitter { dir: out_dir.to_path_buf(), files: Vec::new() };

    if !result.points.is_empty() {
        em.write("metrics.csv", |w| result.report.write_csv(w))?;
        if let Some(sp) = &result.input_spectrum {
            em.write("spectrum_input.csv", |w| sp.write_csv(w, true))?;
        }
        for p in &result.points {
            let Ok(data) = &p.outcome else { continue };
            let tag = point_tag(p.scenario, p.distance_km);
            em.write(&format!("spectrum_optical_{tag}.csv"), |w| data.optical_spectrum.write_csv(w, true))?;
            em.write(&format!("spectrum_rf_{tag}.csv"), |w| data.views.rf_spectrum.write_csv(w, false))?;
            em.write(&format!("eye_{tag}.csv"), |w| data.views.eye.write_csv(w))?;
            em.write(&format!("power_{tag}.csv"), |w| write_power_log_csv(&data.power_log, w))?;
            em.write(&format!("constellation_{tag}.csv"), |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["channel", "symbol_index", "i", "q"])?;
                for (k, ch) in data.channels.iter().enumerate() {
                    for (idx, z) in constellation_rows(&ch.symbols, result.config.constellation_symbols) {
                        c.write_record([k.to_string(), idx.to_string(), format!("{:.6}", z.re), format!("{:.6}", z.im)])?;
                    }
                }
                c.flush().map_err(|e| Error::io("constellation", e))?;
                Ok(())
            })?;
        }
        em.write("ber_vs_wavelength.csv", |w| ber_vs_wavelength(&result.report, w))?;
        em.write("q_vs_distance.csv", |w| distance_table(result, w, Column::Q))?;
        em.write("ber_vs_distance.csv", |w| distance_table(result, w, Column::Ber))?;
        em.write("evm_vs_distance.csv", |w| distance_table(result, w, Column::Evm))?;
    }

    let manifest = Manifest {
        files: em.files,
        failed_points: result
            .failures()
            .map(|p| FailedPoint {
                scenario: p.scenario.name().to_string(),
                distance_km: p.distance_km,
                reason: p.outcome.as_ref().err().cloned().unwrap_or_default(),
            })
            .collect(),
        config: result.config.render(),
        tx_field_sha256: result.points.first().map(|p| p.tx_field_hash.clone()),
        telemetry: (&result.telemetry).into(),
    };
    let path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Mismatch(e.to_string()))?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn ber_vs_wavelength(report: &MetricsReport, w: &mut dyn Write) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record(["scenario", "distance_km", "channel", "wavelength_nm", "ber", "ber_source"])?;
    for m in &report.channels {
        c.write_record([
            m.scenario.clone(),
            decimal(m.distance_km, 6),
            m.channel.to_string(),
            format!("{:.4}", frequency_to_wavelength_m(m.freq_thz * 1e12) * 1e9),
            format!("{:.6e}", m.ber),
            m.ber_source.to_string(),
        ])?;
    }
    c.flush().map_err(|e| Error::io("ber_vs_wavelength", e))?;
    Ok(())
}

#[derive(Clone, Copy)]
enum Column {
    Q,
    Ber,
    Evm,
}

/// Long-format table of channel statistics per (scenario, distance).
fn distance_table(result: &RunResult, w: &mut dyn Write, col: Column) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    let header = match col {
        Column::Q => ["scenario", "distance_km", "q_of_mean_ber", "min_q", "max_q"],
        Column::Ber => ["scenario", "distance_km", "mean_ber", "min_ber", "max_ber"],
        Column::Evm => ["scenario", "distance_km", "mean_evm_percent", "min_evm_percent", "max_evm_percent"],
    };
    c.write_record(header)?;
    for p in &result.points {
        if p.outcome.is_err() {
            continue;
        }
        let point = result.report.point(p.scenario.name(), p.distance_km);
        let values: Vec<f64> = point
            .channels
            .iter()
            .map(|m| match col {
                Column::Q => m.q_factor,
                Column::Ber => m.ber,
                Column::Evm => m.evm_percent,
            })
            .collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let center = match col {
            Column::Q => {
                let b = point.mean_ber();
                if b > 0.0 {
                    q_from_ber(b.min(0.5))?
                } else {
                    f64::INFINITY
                }
            }
            Column::Ber => point.mean_ber(),
            Column::Evm => point.mean_evm_percent(),
        };
        let fmt = |x: f64| match col {
            Column::Ber => format!("{x:.6e}"),
            _ => format!("{x:.6}"),
        };
        c.write_record([p.scenario.name().to_string(), decimal(p.distance_km, 6), fmt(center), fmt(lo), fmt(hi)])?;
    }
    c.flush().map_err(|e| Error::io("distance table", e))?;
    Ok(())
}
