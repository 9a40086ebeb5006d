//! Second-harmonic distortion read off a power spectrum.

use crate::error::{Error, Result};
use crate::signal::SpectrumEstimate;
use crate::units::{dbm_to_watts, linear_to_db, PSD_FLOOR_DBM_PER_HZ};

/// Window half-width, in resolution bandwidths, used by [`harmonic_ratio`].
pub const TONE_WINDOW_RBW: f64 = 3.0;

/// Power within `3 RBW` of `2 f_rf` relative to the power within `3 RBW` of
/// `f_rf`, in dB. Frequencies are relative to the spectrum center.
pub fn harmonic_ratio(spec: &SpectrumEstimate, f_rf: f64) -> Result<f64> {
    harmonic_ratio_with(spec, f_rf, TONE_WINDOW_RBW * spec.resolution_bw_hz, false)
}

/// Harmonic ratio with an explicit window half-width. With `both_sides` the
/// mirror bands at `-f_rf` and `-2 f_rf` are added, which suits optical fields
/// whose sidebands need not be symmetric.
pub fn harmonic_ratio_with(spec: &SpectrumEstimate, f_rf: f64, half_width_hz: f64, both_sides: bool) -> Result<f64> {
    if !(f_rf > 0.0 && half_width_hz > 0.0) {
        return Err(Error::invalid("f_rf", "frequency and window must be positive"));
    }
    if f_rf + half_width_hz > 2.0 * f_rf - half_width_hz {
        return Err(Error::invalid("half_width_hz", "fundamental and harmonic windows overlap"));
    }
    let lo = spec.freq_hz.first().copied().unwrap_or(0.0);
    let hi = spec.freq_hz.last().copied().unwrap_or(0.0);
    let reach = 2.0 * f_rf + half_width_hz;
    if reach > hi || (both_sides && -reach < lo) {
        return Err(Error::invalid("f_rf", format!("second harmonic window reaches {reach} Hz, beyond the spectrum")));
    }
    let band = |f: f64| {
        let mut p = spec.band_power(f - half_width_hz, f + half_width_hz);
        if both_sides {
            p += spec.band_power(-f - half_width_hz, -f + half_width_hz);
        }
        p
    };
    let fundamental = band(f_rf);
    if fundamental <= 0.0 {
        return Err(Error::invalid("spec", "no power at the fundamental"));
    }
    // an empty harmonic window reads as the spectrum floor rather than -inf
    let floor = dbm_to_watts(PSD_FLOOR_DBM_PER_HZ) * 2.0 * half_width_hz * if both_sides { 2.0 } else { 1.0 };
    Ok(linear_to_db(band(2.0 * f_rf).max(floor) / fundamental))
}
