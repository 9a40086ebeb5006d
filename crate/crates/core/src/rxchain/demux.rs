//! Optical demultiplexer: super-Gaussian bandpass per grid slot.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::ComplexEnvelope;
use crate::txchain::WdmGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemuxFilter {
    pub center_hz: f64,
    pub bandwidth_3db_hz: f64,
    /// Super-Gaussian order; 1 is a plain Gaussian.
    pub order: u32,
}

impl DemuxFilter {
    /// Second-order, 70 GHz filter on `center_hz`.
    pub fn standard(center_hz: f64) -> Self {
        Self { center_hz, bandwidth_3db_hz: 70e9, order: 2 }
    }

    /// Power transmission at offset `df` from the center: `exp(-ln2 (2 df / B)^(2n))`.
    pub fn power_response(&self, df: f64) -> f64 {
        let x = 2.0 * df / self.bandwidth_3db_hz;
        (-std::f64::consts::LN_2 * x.powi(2 * self.order as i32)).exp()
    }

    pub fn validate(&self, grid: &WdmGrid) -> Result<()> {
        if self.order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        if !(self.bandwidth_3db_hz > 0.0) {
            return Err(Error::invalid("bandwidth_3db_hz", "must be positive"));
        }
        if grid.channel_count > 1 && self.bandwidth_3db_hz >= grid.spacing_hz {
            return Err(Error::invalid(
                "bandwidth_3db_hz",
                format!("{} Hz is not below the {} Hz grid spacing", self.bandwidth_3db_hz, grid.spacing_hz),
            ));
        }
        let slot = (self.center_hz - grid.start_hz) / grid.spacing_hz;
        let on_grid = slot.round() >= 0.0 && (slot.round() as usize) < grid.channel_count && (slot - slot.round()).abs() < 1e-6;
        if !on_grid {
            return Err(Error::invalid("center_hz", format!("{} Hz is not a grid frequency", self.center_hz)));
        }
        Ok(())
    }
}

/// Filters one channel out of `total` and shifts it to baseband, keeping the input sample rate.
pub fn dwdm_demux(total: &ComplexEnvelope, f: &DemuxFilter, grid: &WdmGrid) -> Result<ComplexEnvelope> {
    dwdm_demux_to_rate(total, f, grid, total.sample_rate_hz())
}

/// [`dwdm_demux`] that also decimates to `out_rate_hz` by keeping only the
/// bins within `+/- out_rate_hz / 2` of the channel. The offset is rounded to
/// the frequency grid of the block, as the multiplexer does.
pub fn dwdm_demux_to_rate(total: &ComplexEnvelope, f: &DemuxFilter, grid: &WdmGrid, out_rate_hz: f64) -> Result<ComplexEnvelope> {
    let mut out = dwdm_demux_many(total, std::slice::from_ref(f), grid, out_rate_hz)?;
    Ok(out.pop().expect("one filter in, one channel out"))
}

/// Several channels from one transform of `total`; same result as calling
/// [`dwdm_demux_to_rate`] per filter.
pub fn dwdm_demux_many(total: &ComplexEnvelope, filters: &[DemuxFilter], grid: &WdmGrid, out_rate_hz: f64) -> Result<Vec<ComplexEnvelope>> {
    for f in filters {
        f.validate(grid)?;
    }
    let n_in = total.len();
    let df = total.frequency_resolution_hz();
    let exact = out_rate_hz / df;
    let n_out = exact.round() as usize;
    if n_out == 0 || n_out > n_in || (exact - n_out as f64).abs() > 1e-6 * exact {
        return Err(Error::invalid("out_rate_hz", format!("must give a whole number of samples up to {n_in}, got {exact}")));
    }
    let mut spec = total.samples().to_vec();
    fft::forward(&mut spec);
    let scale = n_out as f64 / n_in as f64;
    Ok(filters
        .iter()
        .map(|f| {
            let offset = ((f.center_hz - total.center_frequency_hz()) / df).round() as i64;
            let mut out = vec![Complex64::new(0.0, 0.0); n_out];
            for (j, o) in out.iter_mut().enumerate() {
                let rel = fft::bin_frequency(j, n_out, out_rate_hz);
                let src = (rel / df).round() as i64 + offset;
                *o = spec[fft::bin_index(src, n_in)] * (f.power_response(rel).sqrt() * scale);
            }
            fft::inverse(&mut out);
            ComplexEnvelope::from_parts(out, out_rate_hz, f.center_hz)
        })
        .collect())
}
