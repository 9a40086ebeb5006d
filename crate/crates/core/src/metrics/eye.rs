//! Eye diagrams of real waveforms.

use std::io::Write;

use crate::error::{Error, Result};
use crate::signal::ComplexEnvelope;

#[derive(Debug, Clone, PartialEq)]
pub struct EyeData {
    /// Time of each trace sample in unit intervals, spanning two symbols.
    pub time_ui: Vec<f64>,
    pub traces: Vec<Vec<f64>>,
    /// Largest vertical opening over sampling phases.
    pub opening: f64,
    /// Phase of the largest opening within a symbol (UI).
    pub best_phase_ui: f64,
    /// The waveform never crosses its mean, so no eye exists.
    pub degenerate: bool,
}

impl EyeData {
    /// First row is the time axis, then one row per trace.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(self.time_ui.iter().map(|t| format!("{t:.6}")))?;
        for tr in &self.traces {
            w.write_record(tr.iter().map(|v| format!("{v:.9e}")))?;
        }
        w.flush().map_err(|e| Error::io("eye diagram", e))?;
        Ok(())
    }
}

/// [`eye_diagram_aligned`] with traces starting on sample 0.
pub fn eye_diagram(waveform: &ComplexEnvelope, symbol_period_s: f64, max_traces: usize) -> Result<EyeData> {
    eye_diagram_aligned(waveform, symbol_period_s, max_traces, 0)
}

/// Cuts the real part of `waveform` into two-UI traces starting at
/// `offset_samples + k * sps`. The opening at each phase is the gap between
/// the lowest sample above the mean and the highest sample below it.
pub fn eye_diagram_aligned(waveform: &ComplexEnvelope, symbol_period_s: f64, max_traces: usize, offset_samples: usize) -> Result<EyeData> {
    let exact = symbol_period_s * waveform.sample_rate_hz();
    let sps = exact.round() as usize;
    if sps < 2 || (exact - sps as f64).abs() > 1e-6 * exact {
        return Err(Error::invalid("symbol_period_s", format!("must span a whole number (>= 2) of samples, got {exact}")));
    }
    let x = waveform.real_part();
    let n = x.len();
    if n < 2 * sps {
        return Err(Error::invalid("waveform", format!("{n} samples are shorter than two symbols")));
    }
    let symbols = n / sps;
    let traces = (0..symbols.saturating_sub(1).min(max_traces))
        .map(|k| (0..2 * sps).map(|j| x[(offset_samples + k * sps + j) % n]).collect())
        .collect();
    let time_ui = (0..2 * sps).map(|j| j as f64 / sps as f64).collect();

    let mut opening = 0.0f64;
    let mut best = 0;
    let mut crossed = false;
    for phase in 0..sps {
        let v: Vec<f64> = (0..symbols).map(|k| x[(offset_samples + k * sps + phase) % n]).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let low = v.iter().copied().filter(|&a| a < mean).fold(f64::NEG_INFINITY, f64::max);
        let high = v.iter().copied().filter(|&a| a >= mean).fold(f64::INFINITY, f64::min);
        if low.is_finite() && high.is_finite() {
            crossed = true;
            let o = (high - low).max(0.0);
            if o > opening {
                opening = o;
                best = phase;
            }
        }
    }
    Ok(EyeData { time_ui, traces, opening, best_phase_ui: best as f64 / sps as f64, degenerate: !crossed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_wave_full_swing() {
        let sps = 8;
        let x: Vec<f64> = (0..64 * sps).map(|k| if (k / sps) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = ComplexEnvelope::from_real(&x, 8e9, 0.0).unwrap();
        let eye = eye_diagram(&e, 1e-9, 10).unwrap();
        assert!((eye.opening - 2.0).abs() < 1e-12);
        assert_eq!(eye.traces.len(), 10);
        assert!(eye.traces.iter().all(|t| t.len() == 16));
        assert!(!eye.degenerate);
    }

    #[test]
    fn constant_is_degenerate() {
        let e = ComplexEnvelope::from_real(&[0.3; 64], 8e9, 0.0).unwrap();
        let eye = eye_diagram(&e, 1e-9, 4).unwrap();
        assert_eq!(eye.opening, 0.0);
        assert!(eye.degenerate);
    }

    #[test]
    fn too_short() {
        let e = ComplexEnvelope::from_real(&[0.0; 12], 8e9, 0.0).unwrap();
        assert!(eye_diagram(&e, 1e-9, 4).is_err());
    }

    #[test]
    fn csv_shape() {
        let x: Vec<f64> = (0..32).map(|k| (k % 4) as f64).collect();
        let e = ComplexEnvelope::from_real(&x, 4e9, 0.0).unwrap();
        let eye = eye_diagram(&e, 1e-9, 3).unwrap();
        let mut buf = Vec::new();
        eye.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("0.000000,0.250000"));
    }
}
