//! Split-step propagation against closed-form fiber optics results.

use std::f64::consts::PI;

use dwdm_rof::channel::{apply_dispersion, propagate_ssfm, propagate_ssfm_stats, FiberParams, SsfmConfig};
use dwdm_rof::{mean_power, ComplexEnvelope, Error, RngSeed};
use num_complex::Complex64;
use rand::Rng;

fn fiber(len: f64, alpha: f64, beta2: f64, gamma: f64) -> FiberParams {
    FiberParams { length_km: len, alpha_db_per_km: alpha, beta2_ps2_per_km: beta2, beta3_ps3_per_km: 0.0, gamma_per_w_km: gamma }
}

fn tones(fs: f64, n: usize, parts: &[(f64, Complex64)]) -> ComplexEnvelope {
    let s = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            parts.iter().map(|(f, a)| a * Complex64::from_polar(1.0, 2.0 * PI * f * t)).sum()
        })
        .collect();
    ComplexEnvelope::new(s, fs, 193.1e12).unwrap()
}

/// Complex amplitude of the bin at `f` (exact bin of the block).
fn bin(env: &ComplexEnvelope, f: f64) -> Complex64 {
    let fs = env.sample_rate_hz();
    let n = env.len();
    let w = -2.0 * PI * f / fs;
    env.samples().iter().enumerate().map(|(k, a)| a * Complex64::from_polar(1.0, w * k as f64)).sum::<Complex64>() / n as f64
}

#[test]
fn spm_phase_of_cw_matches_gamma_p_l() {
    let start = std::time::Instant::now();
    for target in [0.13, 1.3, 13.0] {
        let p: f64 = 0.1;
        let gamma = 1.3;
        let len = target / (gamma * p);
        let cw = ComplexEnvelope::new(vec![Complex64::new(p.sqrt(), 0.0); 64], 1e12, 193.1e12).unwrap();
        let out = propagate_ssfm(&cw, &fiber(len, 0.0, 0.0, gamma), &SsfmConfig::default()).unwrap();
        // unwrap the phase through the known number of turns
        let wrapped = out.samples()[0].arg();
        let turns = ((target - wrapped) / (2.0 * PI)).round();
        let phase = wrapped + 2.0 * PI * turns;
        assert!((phase - target).abs() / target < 1e-3, "target {target}: got {phase}");
        assert!((mean_power(&out) - p).abs() < 1e-12);
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

fn rms_width(env: &ComplexEnvelope) -> f64 {
    let dt = 1.0 / env.sample_rate_hz();
    let p: Vec<f64> = env.samples().iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    let t = |k: usize| k as f64 * dt;
    let mean: f64 = p.iter().enumerate().map(|(k, x)| t(k) * x).sum::<f64>() / total;
    let var: f64 = p.iter().enumerate().map(|(k, x)| (t(k) - mean).powi(2) * x).sum::<f64>() / total;
    var.sqrt()
}

#[test]
fn gaussian_pulse_broadening() {
    let t0: f64 = 10e-12;
    let beta2: f64 = -21.7; // ps^2/km
    let ld_km = (t0 * 1e12).powi(2) / beta2.abs();
    let fs = 2e12;
    let n = 1 << 14;
    let center = n as f64 / 2.0 / fs;
    let s: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = k as f64 / fs - center;
            Complex64::new((-t * t / (2.0 * t0 * t0)).exp(), 0.0)
        })
        .collect();
    let pulse = ComplexEnvelope::new(s, fs, 193.1e12).unwrap();
    let w0 = rms_width(&pulse);
    for ratio in [0.5, 1.0, 2.0] {
        let out = propagate_ssfm(&pulse, &fiber(ratio * ld_km, 0.0, beta2, 0.0), &SsfmConfig::default()).unwrap();
        let expected = (1.0 + ratio * ratio).sqrt();
        let got = rms_width(&out) / w0;
        assert!((got - expected).abs() / expected < 0.01, "z/LD {ratio}: {got} vs {expected}");
    }
}

#[test]
fn degenerate_fwm_product_power() {
    let fs = 800e9;
    let n = 1024;
    let df = 50e9;
    let p: f64 = 0.01;
    let gamma = 1.3;
    for (len, alpha) in [(1.0, 0.0), (5.0, 0.0), (7.0, 0.2)] {
        let f = fiber(len, alpha, 0.0, gamma);
        let l_eff = f.effective_length_km();
        assert!(gamma * p * len <= 0.1);
        let input = tones(fs, n, &[(-df, Complex64::new(p.sqrt(), 0.0)), (df, Complex64::new(p.sqrt(), 0.0))]);
        let out = propagate_ssfm(&input, &f, &SsfmConfig::default()).unwrap();
        // product at 2 f1 - f2 = -3 df; input-referred power compared with the undepleted result
        let loss = 10f64.powf(-alpha * len / 10.0);
        let product = bin(&out, -3.0 * df).norm_sqr() / loss;
        let expected = (gamma * p * l_eff).powi(2) * p;
        assert!((product - expected).abs() / expected < 0.1, "L {len}: {product:e} vs {expected:e}");
    }
}

#[test]
fn xpm_probe_phase() {
    let fs = 800e9;
    let n = 1024;
    let gamma = 1.3;
    let pump: f64 = 0.05;
    let probe: f64 = 1e-8;
    let len = 1.0;
    let input = tones(fs, n, &[(0.0, Complex64::new(probe.sqrt(), 0.0)), (100e9, Complex64::new(pump.sqrt(), 0.0))]);
    let out = propagate_ssfm(&input, &fiber(len, 0.0, 0.0, gamma), &SsfmConfig::default()).unwrap();
    let phase = (bin(&out, 0.0) / bin(&input, 0.0)).arg();
    let expected = 2.0 * gamma * pump * len + gamma * probe * len;
    assert!((phase - expected).abs() / expected < 0.01, "{phase} vs {expected}");
}

fn random_field(n: usize, fs: f64, seed: u64) -> ComplexEnvelope {
    let mut rng = RngSeed(seed).rng();
    let s = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.05).collect();
    ComplexEnvelope::new(s, fs, 193.1e12).unwrap()
}

#[test]
fn lossless_linear_propagation_conserves_energy() {
    let input = random_field(4096, 1e12, 3);
    let out = propagate_ssfm(&input, &fiber(80.0, 0.0, -21.7, 0.0), &SsfmConfig::default()).unwrap();
    let (a, b) = (mean_power(&input), mean_power(&out));
    assert!((a - b).abs() / a < 1e-9);
}

#[test]
fn lossless_nonlinear_propagation_conserves_energy() {
    let input = random_field(2048, 1e12, 4);
    let out = propagate_ssfm(&input, &fiber(5.0, 0.0, -21.7, 1.3), &SsfmConfig::default()).unwrap();
    let (a, b) = (mean_power(&input), mean_power(&out));
    assert!((a - b).abs() / a < 1e-9);
}

fn rms_relative(a: &ComplexEnvelope, b: &ComplexEnvelope) -> f64 {
    let num: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = a.samples().iter().map(|x| x.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Two 10 dBm intensity-modulated channels 100 GHz apart over 20 km of fiber.
fn two_channel_field() -> ComplexEnvelope {
    let fs = 800e9;
    let n = 4096;
    let mut rng = RngSeed(9).rng();
    let mods: Vec<(f64, f64)> = (0..2).map(|_| (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI))).collect();
    // 8 GHz modulation, periodic in the block
    let fm = 41.0 * fs / n as f64;
    let s = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            [-50e9, 50e9]
                .iter()
                .zip(&mods)
                .map(|(f, (p1, p2))| {
                    let m = 1.0 + 0.4 * (2.0 * PI * fm * t + p1).sin();
                    Complex64::from_polar((0.01 * m).sqrt(), 2.0 * PI * f * t + p2)
                })
                .sum()
        })
        .collect();
    ComplexEnvelope::new(s, fs, 193.1e12).unwrap()
}

#[test]
fn halving_the_step_converges() {
    let input = two_channel_field();
    let f = FiberParams::standard_smf(20.0);
    let coarse = SsfmConfig::default();
    let fine = SsfmConfig { max_step_km: coarse.max_step_km / 2.0, max_nl_phase_rad: coarse.max_nl_phase_rad / 2.0, ..coarse };
    let a = propagate_ssfm(&input, &f, &coarse).unwrap();
    let b = propagate_ssfm(&input, &f, &fine).unwrap();
    let d = rms_relative(&b, &a);
    assert!(d < 1e-4, "relative RMS change {d:e}");
}

#[test]
fn linear_path_is_one_exact_step() {
    let input = random_field(1024, 1e12, 5);
    let (out, stats) = propagate_ssfm_stats(&input, &fiber(100.0, 0.2, -21.7, 0.0), &SsfmConfig::default()).unwrap();
    assert_eq!(stats.steps, 1);
    let back = apply_dispersion(&out, 21.7 * 100.0, 0.0);
    let gain = 10f64.powf(0.2 * 100.0 / 20.0);
    let restored = ComplexEnvelope::new(back.samples().iter().map(|a| a * gain).collect(), back.sample_rate_hz(), back.center_frequency_hz()).unwrap();
    assert!(rms_relative(&input, &restored) < 1e-12);
}

#[test]
fn band_edge_content_fails_in_strict_mode() {
    // a tone in the outermost 5% of the band
    let fs = 1e12;
    let input = tones(fs, 1024, &[(0.48 * fs, Complex64::new(0.1, 0.0))]);
    let strict = SsfmConfig { strict: true, ..SsfmConfig::default() };
    let err = propagate_ssfm(&input, &fiber(1.0, 0.2, -21.7, 1.3), &strict).unwrap_err();
    assert!(matches!(err, Error::Aliasing(_)));
    assert!(propagate_ssfm(&input, &fiber(1.0, 0.2, -21.7, 1.3), &SsfmConfig::default()).is_ok());
}

#[test]
fn output_power_follows_attenuation() {
    let input = random_field(2048, 1e12, 6);
    let out = propagate_ssfm(&input, &FiberParams::standard_smf(50.0), &SsfmConfig::default()).unwrap();
    let expected = mean_power(&input) * 10f64.powf(-0.2 * 50.0 / 10.0);
    assert!((mean_power(&out) - expected).abs() / expected < 1e-9);
}
