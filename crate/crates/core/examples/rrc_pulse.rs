//! Pulse-shaping filter: tap profile, raised-cosine cascade and stopband.
//!
//! `cargo run --release --example rrc_pulse [rolloff]`

use dwdm_rof::txchain::{rrc_impulse, scro_taps};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rolloff: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.2);
    let sps = 8;
    let shaper = scro_taps(rolloff, sps, 32)?;
    let taps = shaper.taps();
    let mid = taps.len() / 2;

    println!("{} taps, rolloff {rolloff}, group delay {} samples", taps.len(), shaper.group_delay_samples());
    let scale = taps[mid] / rrc_impulse(0.0, rolloff);
    println!("{:>6} {:>12} {:>12}", "t/T", "tap", "ideal RRC");
    for k in (0..=4 * sps).step_by(sps / 2) {
        let t = k as f64 / sps as f64;
        println!("{t:>6.2} {:>12.6} {:>12.6}", taps[mid + k], scale * rrc_impulse(t, rolloff));
    }

    // transmit filter followed by its matched copy
    let mut cascade = vec![0.0; 2 * taps.len() - 1];
    for (i, a) in taps.iter().enumerate() {
        for (j, b) in taps.iter().enumerate() {
            cascade[i + j] += a * b;
        }
    }
    let center = taps.len() - 1;
    let isi = (1..=32).filter_map(|k| cascade.get(center + k * sps)).map(|x| (x / cascade[center]).abs()).fold(0.0, f64::max);
    println!("worst cascade ISI {isi:.2e}");

    // stopband of the single filter, beyond (1 + beta) / 2 symbol rates
    let n = 1 << 14;
    let response = |f: f64| {
        let (re, im) = taps.iter().enumerate().fold((0.0, 0.0), |(re, im), (k, h)| {
            let w = 2.0 * std::f64::consts::PI * f * k as f64 / sps as f64;
            (re + h * w.cos(), im - h * w.sin())
        });
        re * re + im * im
    };
    let dc = response(0.0);
    let edge = (1.0 + rolloff) / 2.0 * 1.1;
    let worst = (0..n / 2)
        .map(|k| k as f64 * sps as f64 / n as f64)
        .filter(|&f| f > edge)
        .map(|f| 10.0 * (response(f) / dc).log10())
        .fold(f64::MIN, f64::max);
    println!("stopband peak beyond {edge:.3} Rs: {worst:.1} dB");
    Ok(())
}
