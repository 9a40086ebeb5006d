//! Waveform and spectrum value types shared by every stage of the link.
//!
//! The whole DWDM band is carried as a single complex envelope whose
//! `center_frequency_hz` is the absolute optical (or RF) reference. Sample
//! amplitudes are in sqrt(W), so `|a|^2` is instantaneous power. Signals are
//! treated as periodic over their duration: every filter in the crate is a
//! circular one, which keeps FFT-based propagation free of edge transients.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fft;
use crate::units::{decimal, PSD_FLOOR_DBM_PER_HZ};

/// Bins weaker than this (relative to the strongest) do not count as occupied
/// when checking a shift against the Nyquist band.
const OCCUPIED_THRESHOLD: f64 = 1e-6;

/// Uniformly sampled complex field or baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
    center_frequency_hz: f64,
}

impl ComplexEnvelope {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64, center_frequency_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample_rate_hz", format!("must be positive, got {sample_rate_hz}")));
        }
        if !center_frequency_hz.is_finite() {
            return Err(Error::invalid("center_frequency_hz", "must be finite"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("samples", "an envelope needs at least one sample"));
        }
        if let Some(k) = samples.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::invalid("samples", format!("sample {k} is not finite")));
        }
        Ok(Self { samples, sample_rate_hz, center_frequency_hz })
    }

    /// Builds an envelope from a real waveform (imaginary parts zero).
    pub fn from_real(values: &[f64], sample_rate_hz: f64, center_frequency_hz: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), sample_rate_hz, center_frequency_hz)
    }

    pub fn zeros(len: usize, sample_rate_hz: f64, center_frequency_hz: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate_hz, center_frequency_hz)
    }

    /// Constructor for stages that already guarantee the invariants.
    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_rate_hz: f64, center_frequency_hz: f64) -> Self {
        debug_assert!(!samples.is_empty() && sample_rate_hz > 0.0);
        Self { samples, sample_rate_hz, center_frequency_hz }
    }

    /// Same rate and center frequency, new samples.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self::from_parts(samples, self.sample_rate_hz, self.center_frequency_hz)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn center_frequency_hz(&self) -> f64 {
        self.center_frequency_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Spacing of the DFT bins over the envelope duration.
    pub fn frequency_resolution_hz(&self) -> f64 {
        self.sample_rate_hz / self.samples.len() as f64
    }

    /// Real parts, for waveforms that live in the complex container with imag = 0.
    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|a| a.re).collect()
    }

    pub fn peak_power(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max)
    }

    /// SHA-256 over the sample bits and metadata; used to prove two runs built identical fields.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.sample_rate_hz.to_le_bytes());
        h.update(self.center_frequency_hz.to_le_bytes());
        for a in &self.samples {
            h.update(a.re.to_le_bytes());
            h.update(a.im.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Band-limited periodic resampling to `new_rate_hz` by spectral zero-padding or cropping.
    ///
    /// The new length is `duration * new_rate_hz`, which must be an integer.
    pub fn resample(&self, new_rate_hz: f64) -> Result<Self> {
        let exact = self.duration_s() * new_rate_hz;
        let new_len = exact.round();
        if new_len < 1.0 || (exact - new_len).abs() > 1e-6 * exact.max(1.0) {
            return Err(Error::invalid(
                "new_rate_hz",
                format!("duration x rate = {exact} is not a whole number of samples"),
            ));
        }
        let new_len = new_len as usize;
        let n = self.len();
        if new_len == n {
            return Ok(self.clone());
        }
        let mut spec = self.samples.clone();
        fft::forward(&mut spec);
        let mut out = vec![Complex64::new(0.0, 0.0); new_len];
        let keep = n.min(new_len);
        // keep the lowest `keep` frequencies; an unpaired Nyquist bin is split evenly
        let half = keep / 2;
        for s in -(half as i64)..=(half as i64) {
            if keep % 2 == 0 && s == half as i64 {
                continue;
            }
            out[fft::bin_index(s, new_len)] = spec[fft::bin_index(s, n)];
        }
        if keep % 2 == 0 && half > 0 {
            let s = half as i64;
            if n > new_len {
                out[fft::bin_index(-s, new_len)] = spec[fft::bin_index(-s, n)] + spec[fft::bin_index(s, n)];
            } else {
                let v = spec[fft::bin_index(s, n)] * 0.5;
                out[fft::bin_index(s, new_len)] = v;
                out[fft::bin_index(-s, new_len)] = v;
            }
        }
        fft::inverse(&mut out);
        let scale = new_len as f64 / n as f64;
        out.iter_mut().for_each(|a| *a *= scale);
        Ok(Self::from_parts(out, new_rate_hz, self.center_frequency_hz))
    }
}

/// Mean power `(1/N) sum |a_k|^2` in W.
pub fn mean_power(env: &ComplexEnvelope) -> f64 {
    env.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() / env.samples.len() as f64
}

/// Frequency span `[lo, hi]` (Hz, relative to the envelope center) of the occupied bins.
/// Returns `None` for an all-zero field.
pub fn occupied_band(env: &ComplexEnvelope) -> Option<(f64, f64)> {
    let mut spec = env.samples.clone();
    fft::forward(&mut spec);
    let powers: Vec<f64> = spec.iter().map(|a| a.norm_sqr()).collect();
    let peak = powers.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return None;
    }
    let n = env.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (k, &p) in powers.iter().enumerate() {
        if p >= OCCUPIED_THRESHOLD * peak {
            let f = fft::bin_frequency(k, n, env.sample_rate_hz);
            lo = lo.min(f);
            hi = hi.max(f);
        }
    }
    Some((lo, hi))
}

/// Moves the envelope content by `delta_hz`: samples times `exp(i 2 pi delta t_k)`.
pub fn frequency_shift(env: &ComplexEnvelope, delta_hz: f64) -> Result<ComplexEnvelope> {
    let nyquist = env.sample_rate_hz / 2.0;
    if !delta_hz.is_finite() || delta_hz.abs() >= nyquist {
        return Err(Error::Aliasing(format!("shift of {delta_hz} Hz is outside the +/-{nyquist} Hz band")));
    }
    if delta_hz == 0.0 {
        return Ok(env.clone());
    }
    if let Some((lo, hi)) = occupied_band(env) {
        if lo + delta_hz < -nyquist || hi + delta_hz >= nyquist {
            return Err(Error::Aliasing(format!(
                "occupied band [{lo:.6e}, {hi:.6e}] Hz shifted by {delta_hz:.6e} Hz leaves the +/-{nyquist:.6e} Hz band"
            )));
        }
    }
    let w = 2.0 * std::f64::consts::PI * delta_hz / env.sample_rate_hz;
    let samples = env
        .samples
        .iter()
        .enumerate()
        .map(|(k, a)| a * Complex64::from_polar(1.0, w * k as f64))
        .collect();
    Ok(ComplexEnvelope::from_parts(samples, env.sample_rate_hz, env.center_frequency_hz + delta_hz))
}

/// Pointwise sum of envelopes sharing rate, length and reference frequency.
pub fn combine(envs: &[ComplexEnvelope]) -> Result<ComplexEnvelope> {
    let first = envs.first().ok_or_else(|| Error::Mismatch("nothing to combine".into()))?;
    for (i, e) in envs.iter().enumerate().skip(1) {
        if e.len() != first.len() || e.sample_rate_hz != first.sample_rate_hz {
            return Err(Error::Mismatch(format!("envelope {i} differs in length or sample rate")));
        }
        if e.center_frequency_hz != first.center_frequency_hz {
            return Err(Error::Mismatch(format!("envelope {i} uses a different reference frequency")));
        }
    }
    let mut acc = first.samples.clone();
    for e in &envs[1..] {
        acc.iter_mut().zip(&e.samples).for_each(|(a, b)| *a += b);
    }
    Ok(first.with_samples(acc))
}

/// Welch-averaged power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Bin centers relative to `center_frequency_hz` (Hz), strictly increasing.
    pub freq_hz: Vec<f64>,
    /// Power spectral density per bin, dBm/Hz, floored at -200 dBm/Hz.
    pub psd_dbm_per_hz: Vec<f64>,
    pub resolution_bw_hz: f64,
    /// Absolute reference the relative bin frequencies are measured from.
    pub center_frequency_hz: f64,
}

impl SpectrumEstimate {
    pub fn psd_linear(&self) -> impl Iterator<Item = f64> + '_ {
        self.psd_dbm_per_hz
            .iter()
            .map(|&d| if d <= PSD_FLOOR_DBM_PER_HZ { 0.0 } else { 10f64.powf((d - 30.0) / 10.0) })
    }

    /// Integrated power (W) over all bins.
    pub fn total_power(&self) -> f64 {
        self.psd_linear().sum::<f64>() * self.resolution_bw_hz
    }

    /// Integrated power (W) of the bins whose centers fall in `[lo, hi]`.
    pub fn band_power(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        self.freq_hz
            .iter()
            .zip(self.psd_linear())
            .filter(|(f, _)| **f >= lo_hz && **f <= hi_hz)
            .map(|(_, p)| p)
            .sum::<f64>()
            * self.resolution_bw_hz
    }

    /// Index of the strongest bin.
    pub fn peak_index(&self) -> usize {
        (0..self.psd_dbm_per_hz.len())
            .max_by(|&a, &b| self.psd_dbm_per_hz[a].total_cmp(&self.psd_dbm_per_hz[b]))
            .unwrap_or(0)
    }

    /// CSV with header `freq_hz,psd_dbm_per_hz`; frequencies are absolute when `absolute` is set.
    pub fn write_csv<W: Write>(&self, out: W, absolute: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["freq_hz", "psd_dbm_per_hz"])?;
        let offset = if absolute { self.center_frequency_hz } else { 0.0 };
        for (f, p) in self.freq_hz.iter().zip(&self.psd_dbm_per_hz) {
            w.write_record([decimal(f + offset, 12), decimal(*p, 9)])?;
        }
        w.flush().map_err(|e| Error::io("<spectrum csv>", e))?;
        Ok(())
    }
}

/// Welch periodogram with a Hann window and 50% overlap.
///
/// The segment length is `ceil(fs / resolution_bw_hz)`, so the reported resolution
/// is never coarser than requested. Integrated PSD equals the mean power for
/// signals whose envelope is stationary over a segment.
pub fn spectrum(env: &ComplexEnvelope, resolution_bw_hz: f64) -> Result<SpectrumEstimate> {
    let fs = env.sample_rate_hz;
    let n = env.len();
    if !(resolution_bw_hz.is_finite() && resolution_bw_hz > 0.0) {
        return Err(Error::invalid("resolution_bw_hz", "must be positive"));
    }
    let seg = (fs / resolution_bw_hz - 1e-9).ceil().max(1.0) as usize;
    if seg > n {
        return Err(Error::invalid(
            "resolution_bw_hz",
            format!("{resolution_bw_hz} Hz needs {seg} samples but the envelope has {n}"),
        ));
    }
    let window: Vec<f64> = if seg == 1 {
        vec![1.0]
    } else {
        // periodic Hann
        (0..seg).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos()).collect()
    };
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let step = (seg / 2).max(1);
    let segments = (n - seg) / step + 1;

    let mut acc = vec![0.0; seg];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    for s in 0..segments {
        let start = s * step;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = env.samples[start + i] * window[i];
        }
        fft::forward(&mut buf);
        acc.iter_mut().zip(&buf).for_each(|(a, x)| *a += x.norm_sqr());
    }
    let norm = 1.0 / (segments as f64 * fs * window_power);

    // reorder bins from transform order to increasing frequency
    let first_negative = (seg + 1) / 2;
    let order: Vec<usize> = (first_negative..seg).chain(0..first_negative).collect();
    let freq_hz = order.iter().map(|&k| fft::bin_frequency(k, seg, fs)).collect();
    let psd_dbm_per_hz = order
        .iter()
        .map(|&k| {
            let w_per_hz = acc[k] * norm;
            if w_per_hz > 0.0 {
                (10.0 * w_per_hz.log10() + 30.0).max(PSD_FLOOR_DBM_PER_HZ)
            } else {
                PSD_FLOOR_DBM_PER_HZ
            }
        })
        .collect();
    Ok(SpectrumEstimate {
        freq_hz,
        psd_dbm_per_hz,
        resolution_bw_hz: fs / seg as f64,
        center_frequency_hz: env.center_frequency_hz,
    })
}

/// Sequence of hard bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BitStream {
    bits: Vec<u8>,
    bit_rate_hz: f64,
}

impl BitStream {
    pub fn new(bits: Vec<u8>, bit_rate_hz: f64) -> Result<Self> {
        if !(bit_rate_hz.is_finite() && bit_rate_hz > 0.0) {
            return Err(Error::invalid("bit_rate_hz", "must be positive"));
        }
        if let Some(k) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid("bits", format!("bit {k} is {} (expected 0 or 1)", bits[k])));
        }
        Ok(Self { bits, bit_rate_hz })
    }

    pub(crate) fn from_parts(bits: Vec<u8>, bit_rate_hz: f64) -> Self {
        Self { bits, bit_rate_hz }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit_rate_hz(&self) -> f64 {
        self.bit_rate_hz
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Complex symbols at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    symbols: Vec<Complex64>,
    symbol_rate_hz: f64,
    bits_per_symbol: u32,
}

impl SymbolStream {
    pub fn new(symbols: Vec<Complex64>, symbol_rate_hz: f64, bits_per_symbol: u32) -> Result<Self> {
        if !(symbol_rate_hz.is_finite() && symbol_rate_hz > 0.0) {
            return Err(Error::invalid("symbol_rate_hz", "must be positive"));
        }
        if bits_per_symbol == 0 {
            return Err(Error::invalid("bits_per_symbol", "must be at least 1"));
        }
        Ok(Self { symbols, symbol_rate_hz, bits_per_symbol })
    }

    pub(crate) fn from_parts(symbols: Vec<Complex64>, symbol_rate_hz: f64, bits_per_symbol: u32) -> Self {
        Self { symbols, symbol_rate_hz, bits_per_symbol }
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.symbol_rate_hz
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.symbols.len() as f64
    }
}

/// Seed for every stochastic stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }

    /// Child seed for a labelled sub-stream; independent of evaluation order.
    pub fn derive(self, label: &str, index: u64) -> RngSeed {
        let mut h = Sha256::new();
        h.update(self.0.to_le_bytes());
        h.update(label.as_bytes());
        h.update(index.to_le_bytes());
        let d = h.finalize();
        RngSeed(u64::from_le_bytes(d[..8].try_into().expect("sha256 output has 32 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize, fs: f64, f: f64, amp: f64) -> ComplexEnvelope {
        let s = (0..n).map(|k| Complex64::from_polar(amp, 2.0 * PI * f * k as f64 / fs)).collect();
        ComplexEnvelope::new(s, fs, 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_envelopes() {
        assert!(ComplexEnvelope::new(vec![], 1.0, 0.0).is_err());
        assert!(ComplexEnvelope::new(vec![Complex64::new(1.0, 0.0)], 0.0, 0.0).is_err());
        assert!(ComplexEnvelope::new(vec![Complex64::new(f64::NAN, 0.0)], 1.0, 0.0).is_err());
    }

    #[test]
    fn mean_power_examples() {
        let z = ComplexEnvelope::zeros(8, 1.0, 0.0).unwrap();
        assert_eq!(mean_power(&z), 0.0);
        let one = ComplexEnvelope::new(vec![Complex64::new(1.0, 0.0); 5], 1.0, 0.0).unwrap();
        assert_eq!(mean_power(&one), 1.0);
        let r = 2f64.sqrt();
        let quad = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()];
        let e = ComplexEnvelope::new(quad.iter().map(|a| a * r).collect(), 1.0, 0.0).unwrap();
        assert!((mean_power(&e) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let e = tone(64, 64.0, 3.0, 1.0);
        assert_eq!(frequency_shift(&e, 0.0).unwrap(), e);
    }

    #[test]
    fn shift_moves_periodogram_peak() {
        let n = 256;
        let fs = 256.0;
        let e = ComplexEnvelope::new(vec![Complex64::new(1.0, 0.0); n], fs, 100.0).unwrap();
        let s = frequency_shift(&e, 20.0).unwrap();
        assert_eq!(s.center_frequency_hz(), 120.0);
        let sp = spectrum(&s, 4.0).unwrap();
        assert!((sp.freq_hz[sp.peak_index()] - 20.0).abs() < 1e-9);
    }

    #[test]
    fn shift_out_of_band_is_aliasing() {
        let e = tone(64, 64.0, 20.0, 1.0);
        assert!(matches!(frequency_shift(&e, 15.0), Err(Error::Aliasing(_))));
        assert!(matches!(frequency_shift(&e, 40.0), Err(Error::Aliasing(_))));
        assert!(frequency_shift(&e, -15.0).is_ok());
    }

    #[test]
    fn combine_rules() {
        let a = tone(32, 32.0, 2.0, 1.0);
        assert_eq!(combine(std::slice::from_ref(&a)).unwrap(), a);
        let neg = a.with_samples(a.samples().iter().map(|x| -x).collect());
        let z = combine(&[a.clone(), neg]).unwrap();
        assert!(z.samples().iter().all(|x| x.norm() == 0.0));
        let b = ComplexEnvelope::zeros(16, 32.0, 0.0).unwrap();
        assert!(combine(&[a.clone(), b]).is_err());
        let c = ComplexEnvelope::zeros(32, 32.0, 5.0).unwrap();
        assert!(combine(&[a, c]).is_err());
    }

    #[test]
    fn two_tones_have_equal_peaks() {
        let fs = 160e9;
        let n = 4096;
        let df = fs / n as f64;
        let f = (10e9 / df).round() * df;
        let sum = combine(&[tone(n, fs, f, 1.0), tone(n, fs, -f, 1.0)]).unwrap();
        let sp = spectrum(&sum, fs / 512.0).unwrap();
        let pick = |target: f64| {
            let k = sp.freq_hz.iter().position(|&x| (x - target).abs() < sp.resolution_bw_hz / 2.0).unwrap();
            sp.psd_dbm_per_hz[k]
        };
        assert!((pick(f) - pick(-f)).abs() < 0.1);
    }

    #[test]
    fn spectrum_of_zero_field_is_floor() {
        let z = ComplexEnvelope::zeros(64, 1.0, 0.0).unwrap();
        let sp = spectrum(&z, 1.0 / 16.0).unwrap();
        assert!(sp.psd_dbm_per_hz.iter().all(|&p| p == PSD_FLOOR_DBM_PER_HZ));
        assert_eq!(sp.total_power(), 0.0);
    }

    #[test]
    fn spectrum_rejects_too_fine_resolution() {
        let z = ComplexEnvelope::zeros(64, 64.0, 0.0).unwrap();
        assert!(spectrum(&z, 0.5).is_err());
        assert!(spectrum(&z, 1.0).is_ok());
    }

    #[test]
    fn unit_tone_integrates_to_one_watt() {
        let e = ComplexEnvelope::new(vec![Complex64::new(1.0, 0.0); 4096], 1e9, 0.0).unwrap();
        let sp = spectrum(&e, 1e9 / 256.0).unwrap();
        assert!((sp.total_power() - 1.0).abs() < 0.01);
        assert_eq!(sp.freq_hz[sp.peak_index()], 0.0);
        assert!(sp.freq_hz.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn resample_preserves_band_limited_signal() {
        let e = tone(64, 64.0, 5.0, 0.7);
        let up = e.resample(256.0).unwrap();
        assert_eq!(up.len(), 256);
        let want = tone(256, 256.0, 5.0, 0.7);
        for (a, b) in up.samples().iter().zip(want.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
        let down = up.resample(64.0).unwrap();
        for (a, b) in down.samples().iter().zip(e.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(e.resample(100.5).is_err());
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let s = RngSeed(42);
        assert_eq!(s.derive("edfa", 1), s.derive("edfa", 1));
        assert_ne!(s.derive("edfa", 1), s.derive("edfa", 2));
        assert_ne!(s.derive("edfa", 1), s.derive("pin", 1));
    }
}
