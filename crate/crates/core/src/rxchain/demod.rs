//! RF quadrature demodulation back to complex baseband.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::ComplexEnvelope;

/// Demodulator low-pass cutoff: half the RRC occupied band plus a 20% guard.
pub fn demod_cutoff_hz(symbol_rate_hz: f64, rolloff: f64) -> f64 {
    1.2 * (1.0 + rolloff) * symbol_rate_hz / 2.0
}

/// Ideal (brick-wall) low-pass over the periodic block: bins above `cutoff_hz` are zeroed.
pub fn lowpass(env: &ComplexEnvelope, cutoff_hz: f64) -> Result<ComplexEnvelope> {
    if !(cutoff_hz > 0.0) {
        return Err(Error::invalid("cutoff_hz", "must be positive"));
    }
    let n = env.len();
    let fs = env.sample_rate_hz();
    let mut spec = env.samples().to_vec();
    fft::forward(&mut spec);
    for (k, a) in spec.iter_mut().enumerate() {
        if fft::bin_frequency(k, n, fs).abs() > cutoff_hz {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    fft::inverse(&mut spec);
    Ok(env.with_samples(spec))
}

/// `I = 2 LPF(s cos(2 pi f t))`, `Q = -2 LPF(s sin(2 pi f t))`, with `t = k / fs`
/// as on the transmit side. Only the real part of `current` is used.
pub fn quadrature_demodulate(current: &ComplexEnvelope, rf_hz: f64, cutoff_hz: f64) -> Result<ComplexEnvelope> {
    let fs = current.sample_rate_hz();
    if !(rf_hz > 0.0 && rf_hz < fs / 2.0) {
        return Err(Error::invalid("rf_hz", format!("{rf_hz} Hz is outside (0, {}) Hz", fs / 2.0)));
    }
    let w = 2.0 * PI * rf_hz / fs;
    // s * (cos - i sin) = s e^{-i w k}
    let mixed: Vec<Complex64> = current
        .samples()
        .iter()
        .enumerate()
        .map(|(k, a)| Complex64::from_polar(2.0 * a.re, -w * k as f64))
        .collect();
    lowpass(&ComplexEnvelope::from_parts(mixed, fs, 0.0), cutoff_hz)
}
