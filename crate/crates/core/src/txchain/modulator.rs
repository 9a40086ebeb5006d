//! Electrical and electro-optic modulation: RF quadrature upconversion, CW laser, MZM.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::{ComplexEnvelope, RngSeed};
use crate::units::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    pub power_dbm: f64,
    /// Absolute optical frequency (Hz).
    pub frequency_hz: f64,
    /// Lorentzian FWHM (Hz); zero disables phase noise.
    pub linewidth_hz: f64,
    /// Initial optical phase (rad).
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzmParams {
    /// Half-wave voltage (V).
    pub v_pi: f64,
    pub bias_v: f64,
    pub insertion_loss_db: f64,
    /// Ratio of maximum to minimum transmitted power (dB).
    pub extinction_ratio_db: f64,
}

impl MzmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > 0.0) {
            return Err(Error::invalid("v_pi", "must be positive"));
        }
        if !(self.insertion_loss_db >= 0.0) {
            return Err(Error::invalid("insertion_loss_db", "must be non-negative"));
        }
        if !(self.extinction_ratio_db > 0.0) {
            return Err(Error::invalid("extinction_ratio_db", "must be positive"));
        }
        Ok(())
    }

    /// Bias at the quadrature point of the power transfer.
    pub fn quadrature(v_pi: f64, insertion_loss_db: f64, extinction_ratio_db: f64) -> Self {
        Self { v_pi, bias_v: v_pi / 2.0, insertion_loss_db, extinction_ratio_db }
    }
}

/// Upconverts a complex baseband to a real RF waveform:
/// `s(t) = I(t) cos(2 pi f t) - Q(t) sin(2 pi f t)`.
///
/// `signal_bandwidth_hz` is the two-sided width of the baseband signal; the
/// carrier must clear half of it and the upper band edge must stay below Nyquist.
/// Baseband content at or beyond `rf_hz` (pulse-shaping sidelobes) is dropped
/// first: around a real carrier it would fold back onto the wanted band.
pub fn quadrature_modulate(baseband: &ComplexEnvelope, rf_hz: f64, signal_bandwidth_hz: f64) -> Result<ComplexEnvelope> {
    let half = signal_bandwidth_hz / 2.0;
    if !(rf_hz > half) {
        return Err(Error::invalid("rf_hz", format!("carrier {rf_hz} Hz must exceed half the signal bandwidth ({half} Hz)")));
    }
    let nyquist = baseband.sample_rate_hz() / 2.0;
    if rf_hz + half >= nyquist {
        return Err(Error::Aliasing(format!("upper band edge {} Hz reaches Nyquist {nyquist} Hz", rf_hz + half)));
    }
    let fs = baseband.sample_rate_hz();
    let n = baseband.len();
    let mut limited = baseband.samples().to_vec();
    fft::forward(&mut limited);
    for (k, a) in limited.iter_mut().enumerate() {
        if fft::bin_frequency(k, n, fs).abs() >= rf_hz {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    fft::inverse(&mut limited);
    let w = 2.0 * PI * rf_hz / fs;
    let out = limited
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let (s, c) = (w * k as f64).sin_cos();
            Complex64::new(a.re * c - a.im * s, 0.0)
        })
        .collect();
    Ok(ComplexEnvelope::from_parts(out, baseband.sample_rate_hz(), 0.0))
}

/// Constant-power optical carrier, optionally with Wiener phase noise.
///
/// The returned envelope is referenced to `params.frequency_hz`.
pub fn cw_laser(params: &LaserParams, len: usize, sample_rate_hz: f64, seed: RngSeed) -> Result<ComplexEnvelope> {
    if !(params.linewidth_hz >= 0.0) {
        return Err(Error::invalid("linewidth_hz", "must be non-negative"));
    }
    if !(params.frequency_hz > 0.0) {
        return Err(Error::invalid("frequency_hz", "must be positive"));
    }
    let amp = dbm_to_watts(params.power_dbm).sqrt();
    let mut phase = params.phase_rad;
    let samples = if params.linewidth_hz > 0.0 {
        let sigma = (2.0 * PI * params.linewidth_hz / sample_rate_hz).sqrt();
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        let mut rng = seed.rng();
        (0..len)
            .map(|_| {
                let a = Complex64::from_polar(amp, phase);
                phase += normal.sample(&mut rng);
                a
            })
            .collect()
    } else {
        vec![Complex64::from_polar(amp, phase); len]
    };
    ComplexEnvelope::new(samples, sample_rate_hz, params.frequency_hz)
}

/// Field transmission of an MZM with finite extinction at electrode voltage `v`.
///
/// Arms with splitting imbalance `delta = 10^(-ER/20)` give
/// `cos(theta) + i delta sin(theta)` with `theta = (pi/2) v / v_pi`, whose power
/// swings between 1 and `1/ER`.
pub fn mzm_field_transfer(v: f64, m: &MzmParams) -> Complex64 {
    let theta = 0.5 * PI * v / m.v_pi;
    let delta = 10f64.powf(-m.extinction_ratio_db / 20.0);
    let il = 10f64.powf(-m.insertion_loss_db / 20.0);
    Complex64::new(theta.cos(), delta * theta.sin()) * il
}

/// Intensity modulation of `carrier` by the real `drive` voltage (V).
pub fn mzm_modulate(carrier: &ComplexEnvelope, drive: &ComplexEnvelope, m: &MzmParams) -> Result<ComplexEnvelope> {
    m.validate()?;
    if carrier.len() != drive.len() || carrier.sample_rate_hz() != drive.sample_rate_hz() {
        return Err(Error::Mismatch("carrier and drive are sampled on different grids".into()));
    }
    let out = carrier
        .samples()
        .iter()
        .zip(drive.samples())
        .map(|(e, v)| e * mzm_field_transfer(v.re + m.bias_v, m))
        .collect();
    Ok(carrier.with_samples(out))
}

/// Scales a real RF waveform into drive volts for modulation index `index`.
///
/// The index is `pi * V_peak / v_pi` of the sinusoid with the same RMS, so a
/// sinusoid of index `m` moves the MZM phase by `(m/2) sin(wt)` around the bias.
pub fn drive_for_index(rf: &ComplexEnvelope, index: f64, v_pi: f64) -> ComplexEnvelope {
    let rms = crate::signal::mean_power(rf).sqrt();
    let target_rms = index * v_pi / (PI * std::f64::consts::SQRT_2);
    let g = if rms > 0.0 { target_rms / rms } else { 0.0 };
    rf.with_samples(rf.samples().iter().map(|a| Complex64::new(a.re * g, 0.0)).collect())
}
