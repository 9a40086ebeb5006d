//! Eye opening and spectrum of a single shaped 16-QAM channel, with and without noise.
//!
//! `cargo run --release --example eye_and_spectrum`

use dwdm_rof::metrics::eye_diagram;
use dwdm_rof::txchain::{prbs_generate, pulse_shape, qam_map, scro_taps, PrbsPolynomial, QamConstellation};
use dwdm_rof::{spectrum, ComplexEnvelope, RngSeed};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

const SYMBOL_RATE: f64 = 18.75e9 / 7.0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = QamConstellation::standard(16)?;
    let bits = prbs_generate(RngSeed(9), 4096 * 4, PrbsPolynomial::Prbs15, 4.0 * SYMBOL_RATE)?;
    let sym = qam_map(&bits, &c)?;
    let shaper = scro_taps(0.2, 8, 32)?;
    let clean = pulse_shape(&sym, &shaper)?.envelope;

    let spec = spectrum(&clean, SYMBOL_RATE / 100.0)?;
    let peak = spec.psd_dbm_per_hz.iter().cloned().fold(f64::MIN, f64::max);
    let band: Vec<&f64> = spec.freq_hz.iter().zip(&spec.psd_dbm_per_hz).filter(|(_, p)| **p > peak - 30.0).map(|(f, _)| f).collect();
    let width = *band.last().unwrap() - *band.first().unwrap();
    println!("-30 dB bandwidth {:.3} GHz ((1 + beta) Rs = {:.3} GHz)", width / 1e9, 1.2 * SYMBOL_RATE / 1e9);

    // the eye needs the matched response, so filter the shaped waveform again
    let taps = shaper.taps();
    let matched = |x: &ComplexEnvelope| -> Result<ComplexEnvelope, dwdm_rof::Error> {
        let s = x.samples();
        let out = (0..s.len()).map(|k| taps.iter().enumerate().filter_map(|(j, h)| k.checked_sub(j).map(|i| s[i] * h)).sum()).collect();
        ComplexEnvelope::new(out, x.sample_rate_hz(), x.center_frequency_hz())
    };
    let normal = Normal::new(0.0, 0.02)?;
    let mut rng = RngSeed(4).rng();
    let noisy = ComplexEnvelope::new(
        clean.samples().iter().map(|a| a + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))).collect(),
        clean.sample_rate_hz(),
        clean.center_frequency_hz(),
    )?;
    for (name, x) in [("clean", &clean), ("noisy", &noisy)] {
        let eye = eye_diagram(&matched(x)?, 1.0 / SYMBOL_RATE, 500)?;
        println!("{name}: eye opening {:.4} at {:.3} UI", eye.opening, eye.best_phase_ui);
    }
    Ok(())
}
