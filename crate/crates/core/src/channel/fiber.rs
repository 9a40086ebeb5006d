//! Symmetric split-step Fourier solver for the scalar NLSE
//!
//! `dA/dz = -(alpha/2) A - i (beta2/2) d2A/dt2 + (beta3/6) d3A/dt3 + i gamma |A|^2 A`
//!
//! applied to the whole multiplexed band at once, so SPM, XPM and FWM between
//! channels all come out of the one Kerr term.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::ComplexEnvelope;
use crate::units::{alpha_db_to_per_km, dispersion_to_beta2};

/// Configuration guard on the number of split steps.
pub const MAX_STEPS: u64 = 10_000_000;

/// Outermost fraction of the band (each side) inspected by the aliasing check.
const EDGE_FRACTION: f64 = 0.05;
/// Edge content above this fraction of the spectral peak (-40 dB) is flagged.
const EDGE_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    pub length_km: f64,
    pub alpha_db_per_km: f64,
    /// Group-velocity dispersion (ps^2/km).
    pub beta2_ps2_per_km: f64,
    /// Third-order dispersion (ps^3/km).
    pub beta3_ps3_per_km: f64,
    /// Kerr coefficient (1/(W km)).
    pub gamma_per_w_km: f64,
}

impl FiberParams {
    /// Standard single-mode fiber: 0.2 dB/km, D = 16.75 ps/nm/km at 1550 nm, gamma 1.3 /W/km.
    pub fn standard_smf(length_km: f64) -> Self {
        Self {
            length_km,
            alpha_db_per_km: 0.2,
            beta2_ps2_per_km: dispersion_to_beta2(16.75, 1550e-9),
            beta3_ps3_per_km: 0.0,
            gamma_per_w_km: 1.3,
        }
    }

    pub fn with_length(self, length_km: f64) -> Self {
        Self { length_km, ..self }
    }

    pub fn loss_db(&self) -> f64 {
        self.alpha_db_per_km * self.length_km
    }

    /// Effective nonlinear length `(1 - e^{-alpha L}) / alpha` (km).
    pub fn effective_length_km(&self) -> f64 {
        let a = alpha_db_to_per_km(self.alpha_db_per_km);
        if a == 0.0 {
            self.length_km
        } else {
            (1.0 - (-a * self.length_km).exp()) / a
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.length_km, self.alpha_db_per_km, self.beta2_ps2_per_km, self.beta3_ps3_per_km, self.gamma_per_w_km]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("fiber", "parameters must be finite"));
        }
        if self.length_km < 0.0 {
            return Err(Error::invalid("length_km", "must be non-negative"));
        }
        if self.alpha_db_per_km < 0.0 {
            return Err(Error::invalid("alpha_db_per_km", "must be non-negative"));
        }
        if self.gamma_per_w_km < 0.0 {
            return Err(Error::invalid("gamma_per_w_km", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsfmConfig {
    pub max_step_km: f64,
    /// Upper bound on `gamma * P_peak * h` for every step (rad).
    pub max_nl_phase_rad: f64,
    /// Turn the band-edge aliasing warning into an error.
    pub strict: bool,
}

impl Default for SsfmConfig {
    fn default() -> Self {
        Self { max_step_km: 1.0, max_nl_phase_rad: 0.003, strict: false }
    }
}

impl SsfmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_step_km > 0.0 && self.max_step_km.is_finite()) {
            return Err(Error::invalid("max_step_km", "must be positive"));
        }
        if !(self.max_nl_phase_rad > 0.0 && self.max_nl_phase_rad.is_finite()) {
            return Err(Error::invalid("max_nl_phase_rad", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SsfmStats {
    pub steps: u64,
    /// Largest `gamma * P_peak * h` actually taken (rad).
    pub max_step_phase_rad: f64,
    /// Band-edge to peak spectral power ratio of the output.
    pub edge_ratio: f64,
}

/// Angular frequencies (rad/s) of the transform bins.
fn angular_frequencies(n: usize, fs: f64) -> Vec<f64> {
    fft::frequencies(n, fs).into_iter().map(|f| 2.0 * std::f64::consts::PI * f).collect()
}

/// Linear-operator phase per km for each bin: `beta2 w^2 / 2 - beta3 w^3 / 6` (rad/km).
fn dispersion_phase_per_km(omega: &[f64], beta2_ps2_per_km: f64, beta3_ps3_per_km: f64) -> Vec<f64> {
    let b2 = beta2_ps2_per_km * 1e-24;
    let b3 = beta3_ps3_per_km * 1e-36;
    omega.iter().map(|&w| 0.5 * b2 * w * w - b3 * w * w * w / 6.0).collect()
}

/// Index `k` of the longest step `max_km * 2^(-k/8)` not above `limit_km`.
/// Quantized steps repeat, so their linear factors can be reused.
fn ladder_rung(max_km: f64, limit_km: f64) -> i32 {
    if limit_km >= max_km {
        return 0;
    }
    ((max_km / limit_km).log2() * LADDER_PER_OCTAVE).ceil() as i32
}

fn ladder_length(max_km: f64, rung: i32) -> f64 {
    max_km * (-(rung as f64) / LADDER_PER_OCTAVE).exp2()
}

const LADDER_PER_OCTAVE: f64 = 8.0;

/// Linear-step factors for recently used step lengths, least recently used
/// evicted first.
struct LinearCache<'a> {
    phase_per_km: &'a [f64],
    alpha_per_km: f64,
    entries: Vec<(f64, Vec<Complex64>)>,
}

impl<'a> LinearCache<'a> {
    const CAPACITY: usize = 5;

    fn new(phase_per_km: &'a [f64], alpha_per_km: f64) -> Self {
        Self { phase_per_km, alpha_per_km, entries: Vec::new() }
    }

    fn apply(&mut self, spec: &mut [Complex64], h_km: f64) {
        match self.entries.iter().position(|(h, _)| *h == h_km) {
            Some(pos) => {
                let hit = self.entries.remove(pos);
                self.entries.push(hit);
            }
            None => {
                let decay = (-0.5 * self.alpha_per_km * h_km).exp();
                let factor = self
                    .phase_per_km
                    .iter()
                    .map(|&p| cis(p * h_km) * decay)
                    .collect();
                if self.entries.len() == Self::CAPACITY {
                    self.entries.remove(0);
                }
                self.entries.push((h_km, factor));
            }
        }
        let factor = &self.entries.last().expect("just inserted").1;
        spec.iter_mut().zip(factor).for_each(|(a, f)| *a *= f);
    }
}

fn apply_linear(spec: &mut [Complex64], phase_per_km: &[f64], alpha_per_km: f64, h_km: f64) {
    let decay = (-0.5 * alpha_per_km * h_km).exp();
    for (a, &p) in spec.iter_mut().zip(phase_per_km) {
        let (s, c) = (p * h_km).sin_cos();
        *a *= Complex64::new(decay * c, decay * s);
    }
}

/// Kerr phase rotation of a field still carrying the factor `1/scale` of an
/// unnormalized inverse transform; returns the peak power seen.
fn apply_nonlinear(field: &mut [Complex64], gamma: f64, h_km: f64, scale: f64) -> f64 {
    let mut peak = 0.0f64;
    for a in field.iter_mut() {
        *a *= scale;
        let p = a.norm_sqr();
        peak = peak.max(p);
        *a *= cis(gamma * p * h_km);
    }
    peak
}

/// `e^{i theta}`; a Taylor polynomial for the small phases of a split step
/// (error below 1e-13 there), `sin_cos` otherwise.
#[inline]
fn cis(theta: f64) -> Complex64 {
    if theta.abs() > 0.2 {
        let (s, c) = theta.sin_cos();
        return Complex64::new(c, s);
    }
    let t2 = theta * theta;
    let c = 1.0 - t2 / 2.0 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0)));
    let s = theta * (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0))));
    Complex64::new(c, s)
}

fn edge_ratio(spec: &[Complex64], n: usize) -> f64 {
    let peak = spec.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let edge_bins = ((n as f64 * EDGE_FRACTION).ceil() as usize).max(1);
    let half = n / 2;
    let lo = half.saturating_sub(edge_bins);
    let hi = (half + edge_bins).min(n);
    spec[lo..hi].iter().map(|a| a.norm_sqr()).fold(0.0, f64::max) / peak
}

/// Propagates `env` through `fiber`.
pub fn propagate_ssfm(env: &ComplexEnvelope, fiber: &FiberParams, cfg: &SsfmConfig) -> Result<ComplexEnvelope> {
    propagate_ssfm_stats(env, fiber, cfg).map(|(e, _)| e)
}

/// [`propagate_ssfm`] plus step telemetry.
pub fn propagate_ssfm_stats(env: &ComplexEnvelope, fiber: &FiberParams, cfg: &SsfmConfig) -> Result<(ComplexEnvelope, SsfmStats)> {
    fiber.validate()?;
    cfg.validate()?;
    let length = fiber.length_km;
    if length == 0.0 {
        return Ok((env.clone(), SsfmStats::default()));
    }
    let n = env.len();
    let gamma = fiber.gamma_per_w_km;
    let alpha = alpha_db_to_per_km(fiber.alpha_db_per_km);
    let omega = angular_frequencies(n, env.sample_rate_hz());
    let phase = dispersion_phase_per_km(&omega, fiber.beta2_ps2_per_km, fiber.beta3_ps3_per_km);
    drop(omega);

    let mut field = env.samples().to_vec();
    let mut peak = env.peak_power();
    let mut stats = SsfmStats::default();

    let nl_limited = gamma > 0.0 && peak > 0.0;
    let estimated = (length / cfg.max_step_km).ceil()
        + if nl_limited { (gamma * peak * length / cfg.max_nl_phase_rad).ceil() } else { 0.0 };
    if estimated > MAX_STEPS as f64 {
        return Err(Error::StepLimit { estimated: estimated as u64, limit: MAX_STEPS });
    }

    if !nl_limited {
        // purely linear over the whole length: one exact step
        fft::forward(&mut field);
        apply_linear(&mut field, &phase, alpha, length);
        stats.edge_ratio = edge_ratio(&field, n);
        fft::inverse(&mut field);
        stats.steps = 1;
        return finish(env, field, stats, cfg);
    }

    // Ladder rung of the current step. Shorter rungs are taken at once; a longer
    // one only when the bound clears it by a full rung, so jitter in the peak
    // does not flip between two step lengths.
    let mut rung = 0i32;
    let mut choose = |peak: f64, remaining: f64| -> f64 {
        if peak > 0.0 {
            let needed = ladder_rung(cfg.max_step_km, cfg.max_nl_phase_rad / (gamma * peak));
            if needed > rung || needed + 1 < rung {
                rung = needed.max(rung.min(needed + 1));
            }
        }
        let mut h = ladder_length(cfg.max_step_km, rung);
        // take the remainder whole rather than leave a sliver
        if remaining - h < 1e-9 * length {
            h = remaining;
        }
        h.min(remaining)
    };

    let mut linear = LinearCache::new(&phase, alpha);
    let mut z = 0.0;
    let mut h = choose(peak, length);
    fft::forward(&mut field);
    linear.apply(&mut field, 0.5 * h);
    fft::inverse_unscaled(&mut field);
    let scale = 1.0 / n as f64;
    loop {
        let seen = apply_nonlinear(&mut field, gamma, h, scale);
        stats.max_step_phase_rad = stats.max_step_phase_rad.max(gamma * seen * h);
        peak = seen;
        z += h;
        stats.steps += 1;
        let remaining = length - z;
        fft::forward(&mut field);
        if remaining <= 1e-12 * length {
            linear.apply(&mut field, 0.5 * h);
            stats.edge_ratio = edge_ratio(&field, n);
            fft::inverse(&mut field);
            break;
        }
        // peak power decays with loss before the next nonlinear evaluation
        let next = choose(peak * (-alpha * 0.5 * h).exp(), remaining);
        // two cached half steps rather than one merged factor per step pair
        linear.apply(&mut field, 0.5 * h);
        linear.apply(&mut field, 0.5 * next);
        fft::inverse_unscaled(&mut field);
        h = next;
    }
    finish(env, field, stats, cfg)
}

fn finish(env: &ComplexEnvelope, field: Vec<Complex64>, stats: SsfmStats, cfg: &SsfmConfig) -> Result<(ComplexEnvelope, SsfmStats)> {
    if stats.edge_ratio > EDGE_LIMIT {
        let msg = format!(
            "spectral content at the band edge is {:.1} dB below the peak (limit -40 dB)",
            -10.0 * stats.edge_ratio.log10()
        );
        if cfg.strict {
            return Err(Error::Aliasing(msg));
        }
        log::warn!("{msg}");
    }
    Ok((env.with_samples(field), stats))
}

/// Lossless all-pass dispersion of a given accumulated amount (ps^2, ps^3).
///
/// A dispersion-compensating module is this with the negated span dispersion.
pub fn apply_dispersion(env: &ComplexEnvelope, beta2_ps2: f64, beta3_ps3: f64) -> ComplexEnvelope {
    if beta2_ps2 == 0.0 && beta3_ps3 == 0.0 {
        return env.clone();
    }
    let n = env.len();
    let omega = angular_frequencies(n, env.sample_rate_hz());
    let phase = dispersion_phase_per_km(&omega, beta2_ps2, beta3_ps3);
    let mut field = env.samples().to_vec();
    fft::forward(&mut field);
    apply_linear(&mut field, &phase, 0.0, 1.0);
    fft::inverse(&mut field);
    env.with_samples(field)
}
