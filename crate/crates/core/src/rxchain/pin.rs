//! PIN photodiode: square-law detection with shot, thermal and dark current.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal::{ComplexEnvelope, RngSeed};
use crate::units::ELEMENTARY_CHARGE_C;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinParams {
    pub responsivity_a_per_w: f64,
    /// Thermal noise current density (A/sqrt(Hz)).
    pub thermal_noise_a_per_sqrt_hz: f64,
    pub dark_current_a: f64,
    pub shot_noise_enabled: bool,
}

impl Default for PinParams {
    fn default() -> Self {
        Self { responsivity_a_per_w: 0.9, thermal_noise_a_per_sqrt_hz: 10e-12, dark_current_a: 1e-9, shot_noise_enabled: true }
    }
}

impl PinParams {
    pub fn noiseless(responsivity_a_per_w: f64) -> Self {
        Self { responsivity_a_per_w, thermal_noise_a_per_sqrt_hz: 0.0, dark_current_a: 0.0, shot_noise_enabled: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.responsivity_a_per_w > 0.0) {
            return Err(Error::invalid("responsivity_a_per_w", "must be positive"));
        }
        if !(self.thermal_noise_a_per_sqrt_hz >= 0.0) {
            return Err(Error::invalid("thermal_noise_a_per_sqrt_hz", "must be non-negative"));
        }
        if !(self.dark_current_a >= 0.0) {
            return Err(Error::invalid("dark_current_a", "must be non-negative"));
        }
        Ok(())
    }
}

/// Photocurrent `R |E|^2 + I_d` plus Gaussian shot and thermal noise.
///
/// Noise is white over the simulated band `B = fs / 2`: shot variance
/// `2 q (R P + I_d) B`, thermal variance `i_th^2 B`. The result is real and
/// referenced to 0 Hz.
pub fn pin_detect(env: &ComplexEnvelope, p: &PinParams, seed: RngSeed) -> Result<ComplexEnvelope> {
    p.validate()?;
    let bandwidth = env.sample_rate_hz() / 2.0;
    let thermal_var = p.thermal_noise_a_per_sqrt_hz.powi(2) * bandwidth;
    let mut rng = seed.rng();
    let out = env
        .samples()
        .iter()
        .map(|a| {
            let mean = p.responsivity_a_per_w * a.norm_sqr() + p.dark_current_a;
            let mut var = thermal_var;
            if p.shot_noise_enabled {
                var += 2.0 * ELEMENTARY_CHARGE_C * mean * bandwidth;
            }
            let noise = if var > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * var.sqrt()
            } else {
                0.0
            };
            Complex64::new(mean + noise, 0.0)
        })
        .collect();
    Ok(ComplexEnvelope::from_parts(out, env.sample_rate_hz(), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_law() {
        let e = ComplexEnvelope::new(vec![Complex64::new(0.0, 1e-3f64.sqrt()); 8], 1e9, 194e12).unwrap();
        let i = pin_detect(&e, &PinParams::noiseless(1.0), RngSeed(0)).unwrap();
        assert!(i.samples().iter().all(|a| (a.re - 1e-3).abs() < 1e-15 && a.im == 0.0));
    }

    #[test]
    fn dark_current_only() {
        let e = ComplexEnvelope::zeros(8, 1e9, 194e12).unwrap();
        let p = PinParams { dark_current_a: 1e-9, ..PinParams::noiseless(1.0) };
        let i = pin_detect(&e, &p, RngSeed(0)).unwrap();
        assert!(i.samples().iter().all(|a| a.re == 1e-9));
    }

    #[test]
    fn seed_determinism() {
        let e = ComplexEnvelope::new(vec![Complex64::new(1e-2, 0.0); 64], 1e10, 194e12).unwrap();
        let p = PinParams::default();
        assert_eq!(pin_detect(&e, &p, RngSeed(4)).unwrap(), pin_detect(&e, &p, RngSeed(4)).unwrap());
        assert_ne!(pin_detect(&e, &p, RngSeed(4)).unwrap(), pin_detect(&e, &p, RngSeed(5)).unwrap());
    }
}
