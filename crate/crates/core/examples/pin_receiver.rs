//! PIN photodiode noise: shot and thermal variance against their closed forms.
//!
//! `cargo run --release --example pin_receiver`

use dwdm_rof::rxchain::{pin_detect, PinParams};
use dwdm_rof::{ComplexEnvelope, RngSeed};
use num_complex::Complex64;

const Q: f64 = 1.602_176_634e-19;

fn variance(x: &ComplexEnvelope) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.samples().iter().map(|a| a.re).sum::<f64>() / n;
    (mean, x.samples().iter().map(|a| (a.re - mean).powi(2)).sum::<f64>() / n)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fs = 40e9;
    let n = 1 << 20;
    let power: f64 = 1e-3;
    let light = ComplexEnvelope::new(vec![Complex64::new(power.sqrt(), 0.0); n], fs, 193.4e12)?;
    let base = PinParams::default();

    let shot_only = PinParams { thermal_noise_a_per_sqrt_hz: 0.0, dark_current_a: 0.0, ..base.clone() };
    let (i, var) = variance(&pin_detect(&light, &shot_only, RngSeed(1))?);
    println!("photocurrent {:.4e} A", i);
    println!("shot variance {:.4e} A^2, 2 q I B = {:.4e} A^2", var, 2.0 * Q * i * fs / 2.0);

    let thermal_only = PinParams { shot_noise_enabled: false, dark_current_a: 0.0, ..base.clone() };
    let (_, var) = variance(&pin_detect(&light, &thermal_only, RngSeed(2))?);
    println!(
        "thermal variance {:.4e} A^2, i_n^2 B = {:.4e} A^2",
        var,
        base.thermal_noise_a_per_sqrt_hz.powi(2) * fs / 2.0
    );
    Ok(())
}
