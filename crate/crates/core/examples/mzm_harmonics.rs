//! Harmonics of a single RF tone after the Mach-Zehnder modulator and square-law detection.
//!
//! `cargo run --release --example mzm_harmonics`
//! Sweeps the modulation index at quadrature and slightly off it.

use std::f64::consts::PI;

use dwdm_rof::txchain::{cw_laser, drive_for_index, mzm_modulate, LaserParams, MzmParams};
use dwdm_rof::{ComplexEnvelope, RngSeed};
use num_complex::Complex64;

fn harmonic_powers(index: f64, bias_fraction: f64) -> Result<[f64; 3], dwdm_rof::Error> {
    let fs = 64e9;
    let n = 4096;
    let f = 64.0 * fs / n as f64;
    let tone: Vec<f64> = (0..n).map(|k| (2.0 * PI * f * k as f64 / fs).sin()).collect();
    let v_pi = 4.0;
    let drive = drive_for_index(&ComplexEnvelope::from_real(&tone, fs, 0.0)?, index, v_pi);
    let mzm = MzmParams { bias_v: bias_fraction * v_pi, ..MzmParams::quadrature(v_pi, 0.0, 60.0) };
    let laser = LaserParams { power_dbm: 0.0, frequency_hz: 193.1e12, linewidth_hz: 0.0, phase_rad: 0.0 };
    let out = mzm_modulate(&cw_laser(&laser, n, fs, RngSeed(1))?, &drive, &mzm)?;
    let mut h = [0.0; 3];
    for (i, slot) in h.iter_mut().enumerate() {
        let w = 2.0 * PI * (i + 1) as f64 * f / fs;
        let c: Complex64 = out.samples().iter().enumerate().map(|(k, a)| a.norm_sqr() * Complex64::from_polar(1.0, -w * k as f64)).sum();
        *slot = (2.0 * c.norm() / n as f64).powi(2);
    }
    Ok(h)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>6} {:>12} {:>12} {:>12}", "bias", "m", "fund dBm", "HD2 dBc", "HD3 dBc");
    for bias in [0.5, 0.45] {
        for index in [0.05, 0.1, 0.2, 0.5, 1.0] {
            let [h1, h2, h3] = harmonic_powers(index, bias)?;
            // below -200 dBc only rounding is left
            let dbc = |h: f64| (10.0 * (h / h1).log10()).max(-200.0);
            println!("{bias:>6.2} {index:>6.2} {:>12.2} {:>12.2} {:>12.2}", 10.0 * (h1 * 1e3).log10(), dbc(h2), dbc(h3));
        }
    }
    Ok(())
}
