//! EDFA noise and SOA gain saturation on CW inputs.
//!
//! `cargo run --release --example amplifiers`

use dwdm_rof::channel::{edfa_amplify, soa_amplify, soa_mean_gain, EdfaParams, SoaParams};
use dwdm_rof::{mean_power, ComplexEnvelope, RngSeed};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fs = 100e9;
    let n = 1 << 18;
    let edfa = EdfaParams { gain_db: 20.0, noise_figure_db: 5.0, center_hz: 193.4e12 };
    let zero = ComplexEnvelope::new(vec![Complex64::new(0.0, 0.0); n], fs, 193.4e12)?;
    let ase = edfa_amplify(&zero, &edfa, RngSeed(3))?;
    println!(
        "EDFA ASE: measured {:.4e} W/Hz, closed form {:.4e} W/Hz",
        mean_power(&ase) / fs,
        edfa.ase_psd_w_per_hz()
    );

    let soa = SoaParams::default();
    println!("{:>10} {:>10}", "in dBm", "gain dB");
    for dbm in [-30.0, -20.0, -10.0, -5.0, 0.0, 5.0, 10.0] {
        let amp = (1e-3 * 10f64.powf(dbm / 10.0)).sqrt();
        let input = ComplexEnvelope::new(vec![Complex64::new(amp, 0.0); 1 << 14], fs, 193.4e12)?;
        let output = soa_amplify(&input, &soa)?;
        println!("{dbm:>10.1} {:>10.2}", 10.0 * soa_mean_gain(&input, &output).log10());
    }
    Ok(())
}
