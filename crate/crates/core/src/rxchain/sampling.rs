//! Symbol recovery: matched filtering, decimation and data-aided calibration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::{ComplexEnvelope, SymbolStream};
use crate::txchain::PulseShaper;

use super::demod::lowpass;

/// Minimum stream length accepted by [`estimate_calibration`].
pub const MIN_CALIBRATION_SYMBOLS: usize = 64;

/// Correction applied to raw symbol decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RxCalibration {
    /// Complex scalar multiplying every aligned symbol.
    pub gain: Complex64,
    /// Symbol `k` of the output is raw symbol `k + timing_offset` (circular).
    pub timing_offset: i64,
}

impl Default for RxCalibration {
    fn default() -> Self {
        Self { gain: Complex64::new(1.0, 0.0), timing_offset: 0 }
    }
}

impl RxCalibration {
    pub fn apply(&self, raw: &SymbolStream) -> SymbolStream {
        let n = raw.len() as i64;
        let s = raw.symbols();
        let out = (0..n).map(|k| s[(k + self.timing_offset).rem_euclid(n) as usize] * self.gain).collect();
        SymbolStream::from_parts(out, raw.symbol_rate_hz(), raw.bits_per_symbol())
    }
}

fn decimate(filtered: &[Complex64], sps: usize, delay: usize, symbol_rate: f64, bits_per_symbol: u32) -> SymbolStream {
    let n = filtered.len();
    let count = n / sps;
    let out = (0..count).map(|k| filtered[(k * sps + delay) % n]).collect();
    SymbolStream::from_parts(out, symbol_rate, bits_per_symbol)
}

fn check_rate(baseband: &ComplexEnvelope, sps: usize) -> Result<()> {
    if sps == 0 || baseband.len() % sps != 0 {
        return Err(Error::Mismatch(format!("{} samples do not hold a whole number of {sps}-sample symbols", baseband.len())));
    }
    Ok(())
}

/// Filters with the shaper's own taps and samples every symbol at
/// `k * sps + 2 * group_delay`, the pulse peak after transmit and receive
/// filters, then applies `cal`. `bits_per_symbol` is carried into the stream.
pub fn matched_filter_sample(baseband: &ComplexEnvelope, p: &PulseShaper, cal: &RxCalibration, bits_per_symbol: u32) -> Result<SymbolStream> {
    let sps = p.samples_per_symbol();
    if baseband.len() < p.taps().len() {
        return Err(Error::invalid(
            "baseband",
            format!("{} samples are shorter than the {}-tap filter", baseband.len(), p.taps().len()),
        ));
    }
    check_rate(baseband, sps)?;
    let filtered = fft::circular_convolve(baseband.samples(), p.taps());
    let symbol_rate = baseband.sample_rate_hz() / sps as f64;
    let raw = decimate(&filtered, sps, 2 * p.group_delay_samples(), symbol_rate, bits_per_symbol);
    Ok(cal.apply(&raw))
}

/// Receiver without a matched filter: brick-wall low-pass at `cutoff_hz`, then
/// samples at `k * sps + delay_samples` (the transmit pulse peak).
pub fn lowpass_sample(
    baseband: &ComplexEnvelope,
    samples_per_symbol: usize,
    cutoff_hz: f64,
    delay_samples: usize,
    cal: &RxCalibration,
    bits_per_symbol: u32,
) -> Result<SymbolStream> {
    check_rate(baseband, samples_per_symbol)?;
    let filtered = lowpass(baseband, cutoff_hz)?;
    let symbol_rate = baseband.sample_rate_hz() / samples_per_symbol as f64;
    let raw = decimate(filtered.samples(), samples_per_symbol, delay_samples, symbol_rate, bits_per_symbol);
    Ok(cal.apply(&raw))
}

/// Circular lag maximizing `|sum_k rx[k + lag] conj(tx[k])|`, then the
/// least-squares scalar `c` minimizing `sum |c rx_aligned - tx|^2`.
pub fn estimate_calibration(rx_raw: &SymbolStream, tx_known: &SymbolStream) -> Result<RxCalibration> {
    let n = rx_raw.len();
    if n != tx_known.len() {
        return Err(Error::Mismatch(format!("{n} received symbols against {} known symbols", tx_known.len())));
    }
    if n < MIN_CALIBRATION_SYMBOLS {
        return Err(Error::invalid("rx_raw", format!("needs at least {MIN_CALIBRATION_SYMBOLS} symbols, got {n}")));
    }
    let mut a = rx_raw.symbols().to_vec();
    let mut b = tx_known.symbols().to_vec();
    fft::forward(&mut a);
    fft::forward(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y.conj());
    fft::inverse(&mut a);
    let mags: Vec<f64> = a.iter().map(|c| c.norm()).collect();
    let (best, &best_mag) = mags.iter().enumerate().fold((0, &f64::NEG_INFINITY), |acc, x| if *x.1 > *acc.1 { x } else { acc });
    let runner_up = mags.iter().enumerate().filter(|&(k, _)| k != best).map(|(_, &m)| m).fold(0.0, f64::max);
    if !(best_mag > 0.0) || runner_up >= 0.99 * best_mag {
        return Err(Error::AmbiguousTiming { best: best_mag, runner_up });
    }
    // report lags as the smallest signed shift
    let lag = if best > n / 2 { best as i64 - n as i64 } else { best as i64 };
    let aligned = RxCalibration { gain: Complex64::new(1.0, 0.0), timing_offset: lag }.apply(rx_raw);
    let num: Complex64 = aligned.symbols().iter().zip(tx_known.symbols()).map(|(r, t)| r.conj() * t).sum();
    let den: f64 = aligned.symbols().iter().map(|r| r.norm_sqr()).sum();
    Ok(RxCalibration { gain: num / den, timing_offset: lag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_symbols(n: usize, seed: u64) -> SymbolStream {
        let mut rng = crate::signal::RngSeed(seed).rng();
        let s = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        SymbolStream::from_parts(s, 1e9, 2)
    }

    #[test]
    fn identity_calibration() {
        let tx = random_symbols(256, 1);
        let cal = estimate_calibration(&tx, &tx).unwrap();
        assert_eq!(cal.timing_offset, 0);
        assert!((cal.gain - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_gain_inverse() {
        let tx = random_symbols(256, 2);
        let c = Complex64::from_polar(2.0, std::f64::consts::FRAC_PI_4);
        let rx = SymbolStream::from_parts(tx.symbols().iter().map(|s| s * c).collect(), 1e9, 2);
        let cal = estimate_calibration(&rx, &tx).unwrap();
        assert!((cal.gain - Complex64::from_polar(0.5, -std::f64::consts::FRAC_PI_4)).norm() < 1e-9);
    }

    #[test]
    fn zero_stream_is_ambiguous() {
        let tx = random_symbols(128, 3);
        let rx = SymbolStream::from_parts(vec![Complex64::new(0.0, 0.0); 128], 1e9, 2);
        assert!(matches!(estimate_calibration(&rx, &tx), Err(Error::AmbiguousTiming { .. })));
    }

    #[test]
    fn short_stream_rejected() {
        let tx = random_symbols(32, 4);
        assert!(estimate_calibration(&tx, &tx).is_err());
    }
}
