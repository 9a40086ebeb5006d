//! Noiseless QAM modem loopback: map, shape, upconvert, downconvert, match, decide.
//!
//! `cargo run --release --example qam_loopback`

use dwdm_rof::metrics::{ber_count, evm_percent};
use dwdm_rof::rxchain::{demod_cutoff_hz, estimate_calibration, matched_filter_sample, qam_demap, quadrature_demodulate};
use dwdm_rof::txchain::{prbs_generate, pulse_shape, qam_map, quadrature_modulate, scro_taps, PrbsPolynomial, QamConstellation};
use dwdm_rof::RngSeed;

const SYMBOL_RATE: f64 = 18.75e9 / 7.0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sps = 8;
    let fs = SYMBOL_RATE * sps as f64;
    // keep the carrier on an exact bin of the block so the mixer is periodic
    let symbols = 8192;
    let rf = (5e9 * (symbols * sps) as f64 / fs).round() * fs / (symbols * sps) as f64;
    println!("{:>5} {:>6} {:>10} {:>8}", "M", "beta", "EVM %", "errors");
    for order in [16, 64, 128] {
        let c = QamConstellation::standard(order)?;
        for rolloff in [0.1, 0.2, 0.35, 0.5, 1.0] {
            let bits = prbs_generate(RngSeed(order as u64), symbols * c.bits_per_symbol() as usize, PrbsPolynomial::Prbs23, SYMBOL_RATE * c.bits_per_symbol() as f64)?;
            let sym = qam_map(&bits, &c)?;
            let shaper = scro_taps(rolloff, sps, 32)?;
            let baseband = pulse_shape(&sym, &shaper)?.envelope;
            let passband = quadrature_modulate(&baseband, rf, shaper.occupied_bandwidth_hz(SYMBOL_RATE))?;
            let back = quadrature_demodulate(&passband, rf, demod_cutoff_hz(SYMBOL_RATE, rolloff))?;
            let raw = matched_filter_sample(&back, &shaper, &Default::default(), c.bits_per_symbol())?;
            let rx = estimate_calibration(&raw, &sym)?.apply(&raw);
            let errors = ber_count(&bits, &qam_demap(&rx, &c))?.errors;
            println!("{order:>5} {rolloff:>6.2} {:>10.4} {errors:>8}", evm_percent(&rx, &sym)?);
        }
    }
    Ok(())
}
