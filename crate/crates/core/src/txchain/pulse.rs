//! Squared-cosine roll-off (root-raised-cosine) pulse shaping.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::{ComplexEnvelope, SymbolStream};

/// Root-raised-cosine FIR with unit energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShaper {
    rolloff: f64,
    samples_per_symbol: usize,
    span_symbols: usize,
    taps: Vec<f64>,
}

impl PulseShaper {
    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn span_symbols(&self) -> usize {
        self.span_symbols
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Delay of the causal filter, in samples.
    pub fn group_delay_samples(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Two-sided occupied bandwidth `(1 + rolloff) * symbol_rate`.
    pub fn occupied_bandwidth_hz(&self, symbol_rate_hz: f64) -> f64 {
        (1.0 + self.rolloff) * symbol_rate_hz
    }
}

/// Continuous root-raised-cosine impulse response at `t` symbol periods (T = 1).
pub fn rrc_impulse(t: f64, rolloff: f64) -> f64 {
    let b = rolloff;
    if t.abs() < 1e-12 {
        return 1.0 - b + 4.0 * b / PI;
    }
    if b > 0.0 && (t.abs() - 1.0 / (4.0 * b)).abs() < 1e-9 {
        let a = PI / (4.0 * b);
        return b * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos();
    let den = PI * t * (1.0 - (4.0 * b * t).powi(2));
    num / den
}

/// Root-raised-cosine taps spanning `span_symbols` symbols, `span * sps + 1` taps long,
/// normalised so that the squared taps sum to one.
///
/// For a nonzero roll-off the sampled response is nudged so that the cascade
/// of two truncated filters stays free of intersymbol interference; the change
/// is a few percent of the tap energy at a 32-symbol span.
pub fn scro_taps(rolloff: f64, samples_per_symbol: usize, span_symbols: usize) -> Result<PulseShaper> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::invalid("rolloff", format!("{rolloff} is outside [0, 1]")));
    }
    if samples_per_symbol < 2 {
        return Err(Error::invalid("samples_per_symbol", "must be at least 2"));
    }
    if span_symbols < 8 || span_symbols % 2 != 0 {
        return Err(Error::invalid("span_symbols", format!("{span_symbols} must be even and at least 8")));
    }
    let len = span_symbols * samples_per_symbol + 1;
    let center = (len - 1) as f64 / 2.0;
    let mut taps: Vec<f64> =
        (0..len).map(|i| rrc_impulse((i as f64 - center) / samples_per_symbol as f64, rolloff)).collect();
    if rolloff > 0.0 {
        nyquist_correct(&mut taps, samples_per_symbol, span_symbols);
    }
    // the two halves are mirrored explicitly so symmetry is exact
    for i in 0..len / 2 {
        taps[len - 1 - i] = taps[i];
    }
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let scale = energy.sqrt().recip();
    taps.iter_mut().for_each(|t| *t *= scale);
    Ok(PulseShaper { rolloff, samples_per_symbol, span_symbols, taps })
}

/// Truncating the RRC leaves the transmit/receive cascade slightly off the
/// Nyquist condition. Gauss-Newton with minimum-norm steps moves the taps to
/// the nearest set whose autocorrelation vanishes at every nonzero symbol lag.
/// Left untouched when the iteration does not improve the cascade.
fn nyquist_correct(taps: &mut [f64], sps: usize, lags: usize) {
    let len = taps.len();
    let cascade = |h: &[f64]| -> DVector<f64> {
        DVector::from_iterator(lags, (1..=lags).map(|k| (0..len - k * sps).map(|i| h[i] * h[i + k * sps]).sum()))
    };
    let peak: f64 = taps.iter().map(|t| t * t).sum();
    let worst = |c: &DVector<f64>| c.amax() / peak;
    let mut h = DVector::from_column_slice(taps);
    let before = worst(&cascade(taps));
    for _ in 0..8 {
        let c = cascade(h.as_slice());
        let mut jac = DMatrix::<f64>::zeros(lags, len);
        for k in 1..=lags {
            let s = k * sps;
            for i in 0..len - s {
                jac[(k - 1, i)] += h[i + s];
                jac[(k - 1, i + s)] += h[i];
            }
        }
        let Some(chol) = (&jac * jac.transpose()).cholesky() else { return };
        h -= jac.transpose() * chol.solve(&c);
    }
    if worst(&cascade(h.as_slice())) < before {
        taps.copy_from_slice(h.as_slice());
    }
}

/// Output of [`pulse_shape`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedSignal {
    pub envelope: ComplexEnvelope,
    /// Delay from a symbol to the peak of its pulse, in samples.
    pub group_delay_samples: usize,
}

/// Zero-stuffs the symbols by `samples_per_symbol` and filters them with the taps.
///
/// The convolution is circular over the block: symbol `k` peaks at sample
/// `k * sps + group_delay` (modulo the block length).
pub fn pulse_shape(sym: &SymbolStream, p: &PulseShaper) -> Result<ShapedSignal> {
    if sym.is_empty() {
        return Err(Error::invalid("symbols", "cannot shape an empty symbol stream"));
    }
    let sps = p.samples_per_symbol;
    let mut up = vec![Complex64::new(0.0, 0.0); sym.len() * sps];
    for (k, s) in sym.symbols().iter().enumerate() {
        up[k * sps] = *s;
    }
    let shaped = fft::circular_convolve(&up, &p.taps);
    Ok(ShapedSignal {
        envelope: ComplexEnvelope::from_parts(shaped, sym.symbol_rate_hz() * sps as f64, 0.0),
        group_delay_samples: p.group_delay_samples(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolloff_out_of_range() {
        assert!(scro_taps(-0.1, 8, 32).is_err());
        assert!(scro_taps(1.1, 8, 32).is_err());
        assert!(scro_taps(0.2, 8, 7).is_err());
        assert!(scro_taps(0.2, 1, 32).is_err());
    }

    #[test]
    fn zero_rolloff_is_sinc() {
        let p = scro_taps(0.0, 4, 16).unwrap();
        let c = p.group_delay_samples();
        let scale = p.taps()[c];
        for (i, &h) in p.taps().iter().enumerate() {
            let t = (i as f64 - c as f64) / 4.0;
            let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
            assert!((h / scale - sinc).abs() < 1e-12);
        }
        let peak = p.taps().iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, scale);
    }

    #[test]
    fn singular_points_are_continuous() {
        // t = 1/(4 beta) lands on a tap for beta = 0.25, sps = 8 (t = 1 symbol = 8 samples)
        let b = 0.25;
        let at = rrc_impulse(1.0, b);
        let near = rrc_impulse(1.0 + 1e-6, b);
        assert!((at - near).abs() < 1e-5, "{at} vs {near}");
        let at0 = rrc_impulse(0.0, b);
        assert!((at0 - rrc_impulse(1e-7, b)).abs() < 1e-9);
    }

    #[test]
    fn single_symbol_reproduces_taps() {
        let p = scro_taps(0.35, 4, 8).unwrap();
        let mut syms = vec![Complex64::new(0.0, 0.0); 20];
        syms[0] = Complex64::new(1.0, 0.0);
        let s = SymbolStream::new(syms, 1e9, 2).unwrap();
        let out = pulse_shape(&s, &p).unwrap();
        for (i, &t) in p.taps().iter().enumerate() {
            assert!((out.envelope.samples()[i].re - t).abs() < 1e-12);
        }
        assert_eq!(out.envelope.sample_rate_hz(), 4e9);
    }
}
