//! Split-step fiber propagation: self-phase modulation, dispersion and four-wave mixing.
//!
//! `cargo run --release --example ssfm_nonlinear`

use std::f64::consts::PI;

use dwdm_rof::channel::{propagate_ssfm_stats, FiberParams, SsfmConfig};
use dwdm_rof::ComplexEnvelope;
use num_complex::Complex64;

fn fiber(len: f64, beta2: f64, gamma: f64) -> FiberParams {
    FiberParams { length_km: len, alpha_db_per_km: 0.0, beta2_ps2_per_km: beta2, beta3_ps3_per_km: 0.0, gamma_per_w_km: gamma }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SsfmConfig::default();

    // CW self-phase modulation: the phase is gamma * P * L
    let p: f64 = 0.1;
    let cw = ComplexEnvelope::new(vec![Complex64::new(p.sqrt(), 0.0); 64], 1e12, 193.1e12)?;
    let (out, stats) = propagate_ssfm_stats(&cw, &fiber(10.0, 0.0, 1.3), &cfg)?;
    println!("SPM: phase {:.6} rad, expected {:.6} rad, {} steps", out.samples()[0].arg(), 1.3 * p * 10.0, stats.steps);

    // Gaussian pulse in anomalous dispersion
    let t0 = 10e-12;
    let beta2: f64 = -21.7;
    let ld = (t0 * 1e12_f64).powi(2) / beta2.abs();
    let fs = 2e12;
    let n = 1 << 14;
    let pulse: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = (k as f64 - n as f64 / 2.0) / fs;
            Complex64::new((-t * t / (2.0 * t0 * t0)).exp(), 0.0)
        })
        .collect();
    let pulse = ComplexEnvelope::new(pulse, fs, 193.1e12)?;
    let width = |e: &ComplexEnvelope| {
        let p: Vec<f64> = e.samples().iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = p.iter().sum();
        let mean = p.iter().enumerate().map(|(k, x)| k as f64 * x).sum::<f64>() / total;
        (p.iter().enumerate().map(|(k, x)| (k as f64 - mean).powi(2) * x).sum::<f64>() / total).sqrt()
    };
    let w0 = width(&pulse);
    for ratio in [0.5, 1.0, 2.0] {
        let (out, _) = propagate_ssfm_stats(&pulse, &fiber(ratio * ld, beta2, 0.0), &cfg)?;
        println!("dispersion: z/LD {ratio}: width x{:.4}, expected x{:.4}", width(&out) / w0, (1.0 + ratio * ratio).sqrt());
    }

    // two CW tones create an idler at 2 f1 - f2
    let fs = 1e12;
    let n = 1024;
    let df = fs / n as f64;
    let (f1, f2) = (-8.0 * df, 8.0 * df);
    let pump: f64 = 0.01;
    let s: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            pump.sqrt() * (Complex64::from_polar(1.0, 2.0 * PI * f1 * t) + Complex64::from_polar(1.0, 2.0 * PI * f2 * t))
        })
        .collect();
    let len = 1.0;
    let gamma = 1.3;
    let (out, _) = propagate_ssfm_stats(&ComplexEnvelope::new(s, fs, 193.1e12)?, &fiber(len, 0.0, gamma), &cfg)?;
    let fi = 2.0 * f1 - f2;
    let w = -2.0 * PI * fi / fs;
    let idler: Complex64 = out.samples().iter().enumerate().map(|(k, a)| a * Complex64::from_polar(1.0, w * k as f64)).sum::<Complex64>() / n as f64;
    // undepleted, phase-matched estimate: (gamma P L)^2 P
    let expected = (gamma * pump * len).powi(2) * pump;
    println!("FWM: idler {:.3e} W, small-signal estimate {:.3e} W", idler.norm_sqr(), expected);
    Ok(())
}
