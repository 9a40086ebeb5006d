//! DWDM grid and multiplexer.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::ComplexEnvelope;

/// Bins below this fraction of a channel's strongest bin are ignored by the Nyquist check.
const SPILL_THRESHOLD: f64 = 1e-6;

/// Equally spaced channel plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WdmGrid {
    pub channel_count: usize,
    pub start_hz: f64,
    pub spacing_hz: f64,
}

impl Default for WdmGrid {
    fn default() -> Self {
        Self { channel_count: 16, start_hz: 193.414e12, spacing_hz: 100e9 }
    }
}

impl WdmGrid {
    pub fn channel_frequency(&self, k: usize) -> f64 {
        self.start_hz + k as f64 * self.spacing_hz
    }

    pub fn last_frequency(&self) -> f64 {
        self.channel_frequency(self.channel_count.saturating_sub(1))
    }

    /// Midpoint of the first and last channel; the reference of the muxed envelope.
    pub fn center_hz(&self) -> f64 {
        0.5 * (self.start_hz + self.last_frequency())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.channel_count).map(|k| self.channel_frequency(k)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_count == 0 {
            return Err(Error::invalid("channel_count", "must be at least 1"));
        }
        if !(self.start_hz > 0.0) {
            return Err(Error::invalid("start_hz", "must be positive"));
        }
        if !(self.spacing_hz > 0.0) && self.channel_count > 1 {
            return Err(Error::invalid("spacing_hz", "must be positive"));
        }
        Ok(())
    }
}

/// Places every channel at its grid offset from the band center and sums them.
///
/// Each channel envelope must be referenced to its own carrier
/// (`center_frequency_hz` = grid frequency) and all channels must share duration
/// and sample rate. The output runs at `out_sample_rate_hz`; channels are
/// interpolated spectrally, and each offset is rounded to the nearest bin of the
/// output grid (`1/duration` apart) so the block stays periodic.
pub fn dwdm_mux(channel_fields: &[ComplexEnvelope], grid: &WdmGrid, out_sample_rate_hz: f64) -> Result<ComplexEnvelope> {
    grid.validate()?;
    if channel_fields.len() != grid.channel_count {
        return Err(Error::Mismatch(format!(
            "{} channel fields for a {}-channel grid",
            channel_fields.len(),
            grid.channel_count
        )));
    }
    let first = &channel_fields[0];
    for (k, f) in channel_fields.iter().enumerate() {
        if f.len() != first.len() || f.sample_rate_hz() != first.sample_rate_hz() {
            return Err(Error::Mismatch(format!("channel {k} is not on the common sample grid")));
        }
    }
    let duration = first.duration_s();
    let exact = duration * out_sample_rate_hz;
    let n_out = exact.round() as usize;
    if n_out < first.len() || (exact - n_out as f64).abs() > 1e-6 * exact {
        return Err(Error::invalid(
            "out_sample_rate_hz",
            format!("must give a whole number of samples not fewer than the channel length, got {exact}"),
        ));
    }
    let df = 1.0 / duration;
    let n_in = first.len();
    let half_out = out_sample_rate_hz / 2.0;
    let center = grid.center_hz();
    let mut total = vec![Complex64::new(0.0, 0.0); n_out];
    let scale = n_out as f64 / n_in as f64;
    for (k, field) in channel_fields.iter().enumerate() {
        let target = grid.channel_frequency(k);
        let tol = grid.spacing_hz.max(df) * 1e-3;
        if (field.center_frequency_hz() - target).abs() > tol {
            return Err(Error::Mismatch(format!(
                "channel {k} carrier {} Hz is off its grid slot {target} Hz",
                field.center_frequency_hz()
            )));
        }
        let offset_bins = ((target - center) / df).round() as i64;
        let mut spec = field.samples().to_vec();
        fft::forward(&mut spec);
        let peak = spec.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        for (j, a) in spec.iter().enumerate() {
            let signed = fft::bin_frequency(j, n_in, field.sample_rate_hz()) / df;
            let dest = signed.round() as i64 + offset_bins;
            let f_dest = dest as f64 * df;
            if f_dest < -half_out || f_dest >= half_out {
                if a.norm_sqr() > SPILL_THRESHOLD * peak {
                    return Err(Error::Aliasing(format!(
                        "channel {k} content at {f_dest:.6e} Hz falls outside the +/-{half_out:.6e} Hz band"
                    )));
                }
                continue;
            }
            total[fft::bin_index(dest, n_out)] += a * scale;
        }
    }
    fft::inverse(&mut total);
    Ok(ComplexEnvelope::from_parts(total, out_sample_rate_hz, center))
}
