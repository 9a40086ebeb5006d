//! Optical amplifiers: EDFA with ASE, and a reservoir-model SOA.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::signal::{mean_power, ComplexEnvelope, RngSeed};
use crate::units::{db_to_linear, PLANCK_J_S};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdfaParams {
    pub gain_db: f64,
    /// Noise figure in dB; 0 disables ASE.
    pub noise_figure_db: f64,
    /// Optical frequency at which `h nu` is evaluated (Hz).
    pub center_hz: f64,
}

impl EdfaParams {
    pub fn validate(&self) -> Result<()> {
        if !self.gain_db.is_finite() {
            return Err(Error::invalid("gain_db", "must be finite"));
        }
        if !(self.noise_figure_db == 0.0 || self.noise_figure_db >= 3.0) {
            return Err(Error::invalid("noise_figure_db", "must be 0 (noiseless) or at least 3 dB"));
        }
        if !(self.center_hz > 0.0) {
            return Err(Error::invalid("center_hz", "must be positive"));
        }
        Ok(())
    }

    /// ASE power spectral density in the simulated polarization (W/Hz):
    /// `n_sp (G - 1) h nu` with `n_sp = NF / 2`.
    pub fn ase_psd_w_per_hz(&self) -> f64 {
        if self.noise_figure_db == 0.0 {
            return 0.0;
        }
        let g = db_to_linear(self.gain_db);
        let nsp = db_to_linear(self.noise_figure_db) / 2.0;
        (nsp * (g - 1.0) * PLANCK_J_S * self.center_hz).max(0.0)
    }
}

/// Amplifies by `gain_db` and adds white circular Gaussian ASE across the simulated band.
pub fn edfa_amplify(env: &ComplexEnvelope, p: &EdfaParams, seed: RngSeed) -> Result<ComplexEnvelope> {
    p.validate()?;
    let g = db_to_linear(p.gain_db).sqrt();
    let psd = p.ase_psd_w_per_hz();
    let mut out: Vec<Complex64> = env.samples().iter().map(|a| a * g).collect();
    if psd > 0.0 {
        // E|n|^2 = psd * fs, split evenly between the quadratures
        let sigma = (0.5 * psd * env.sample_rate_hz()).sqrt();
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        let mut rng = seed.rng();
        for a in out.iter_mut() {
            *a += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(env.with_samples(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoaParams {
    pub small_signal_gain_db: f64,
    pub saturation_energy_j: f64,
    pub carrier_lifetime_s: f64,
    /// Henry linewidth-enhancement factor.
    pub linewidth_enhancement: f64,
}

impl Default for SoaParams {
    fn default() -> Self {
        Self { small_signal_gain_db: 20.0, saturation_energy_j: 5e-12, carrier_lifetime_s: 200e-12, linewidth_enhancement: 5.0 }
    }
}

impl SoaParams {
    pub fn validate(&self) -> Result<()> {
        if !self.small_signal_gain_db.is_finite() {
            return Err(Error::invalid("small_signal_gain_db", "must be finite"));
        }
        if !(self.saturation_energy_j > 0.0) {
            return Err(Error::invalid("saturation_energy_j", "must be positive"));
        }
        if !(self.carrier_lifetime_s > 0.0) {
            return Err(Error::invalid("carrier_lifetime_s", "must be positive"));
        }
        if !(self.linewidth_enhancement >= 0.0) {
            return Err(Error::invalid("linewidth_enhancement", "must be non-negative"));
        }
        Ok(())
    }

    pub fn saturation_power_w(&self) -> f64 {
        self.saturation_energy_j / self.carrier_lifetime_s
    }

    /// Integrated gain `h = ln G` in steady state for a constant input power (W).
    pub fn steady_state_log_gain(&self, p_in: f64) -> Result<f64> {
        let h0 = db_to_linear(self.small_signal_gain_db).ln();
        let rhs = |h: f64| (h0 - h) / self.carrier_lifetime_s - (h.exp() - 1.0) * p_in / self.saturation_energy_j;
        // rhs is strictly decreasing in h and changes sign between 0 and h0
        let (mut lo, mut hi) = if h0 >= 0.0 { (0.0, h0) } else { (h0, 0.0) };
        if p_in == 0.0 {
            return Ok(h0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rhs(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = 0.5 * (lo + hi);
        if !h.is_finite() || rhs(h).abs() * self.carrier_lifetime_s > 1e-9 * h0.abs().max(1.0) {
            return Err(Error::Convergence(format!("SOA steady state for {p_in} W did not converge")));
        }
        Ok(h)
    }
}

/// Gain dynamics `dh/dt = (h0 - h)/tau - (e^h - 1) P_in(t) / E_sat`, output
/// `A_in exp((1 - i alpha_H) h / 2)`. Integrated with RK4 per sample, input
/// power linearly interpolated between samples.
pub fn soa_amplify(env: &ComplexEnvelope, p: &SoaParams) -> Result<ComplexEnvelope> {
    p.validate()?;
    let dt = 1.0 / env.sample_rate_hz();
    let tau = p.carrier_lifetime_s;
    if dt > tau / 10.0 {
        log::warn!("SOA sample interval {dt:.3e} s is coarse against the carrier lifetime {tau:.3e} s");
    }
    let h0 = db_to_linear(p.small_signal_gain_db).ln();
    let esat = p.saturation_energy_j;
    let powers: Vec<f64> = env.samples().iter().map(|a| a.norm_sqr()).collect();

    let lead = ((10.0 * tau / dt).ceil() as usize).clamp(1, env.len());
    let lead_power = powers[..lead].iter().sum::<f64>() / lead as f64;
    let mut h = p.steady_state_log_gain(lead_power)?;

    let deriv = |h: f64, pw: f64| (h0 - h) / tau - (h.exp() - 1.0) * pw / esat;
    let alpha_h = p.linewidth_enhancement;
    let mut out = Vec::with_capacity(env.len());
    for (k, a) in env.samples().iter().enumerate() {
        out.push(a * Complex64::new(0.5 * h, -0.5 * alpha_h * h).exp());
        let p0 = powers[k];
        let p1 = powers[(k + 1) % powers.len()];
        let pm = 0.5 * (p0 + p1);
        let k1 = deriv(h, p0);
        let k2 = deriv(h + 0.5 * dt * k1, pm);
        let k3 = deriv(h + 0.5 * dt * k2, pm);
        let k4 = deriv(h + dt * k3, p1);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !h.is_finite() {
            return Err(Error::Convergence(format!("SOA gain diverged at sample {k}")));
        }
    }
    Ok(env.with_samples(out))
}

/// Mean power gain of the SOA for the given field (linear).
pub fn soa_mean_gain(input: &ComplexEnvelope, output: &ComplexEnvelope) -> f64 {
    mean_power(output) / mean_power(input)
}
