//! Thin wrapper over `rustfft` with a per-thread plan cache.
//!
//! Conventions: `forward` computes `X[k] = sum_n x[n] e^{-i 2 pi k n / N}` and
//! `inverse` includes the `1/N` factor, so `inverse(forward(x)) == x`. A signal
//! is therefore `x(t) = sum_k X[k] e^{+i omega_k t}` and `d/dt -> i omega`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    // reused so large transforms do not allocate scratch on every call
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

fn run(buf: &mut [Complex64], inverse: bool) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        let need = plan.get_inplace_scratch_len();
        if s.len() < need {
            s.resize(need, Complex64::new(0.0, 0.0));
        }
        plan.process_with_scratch(buf, &mut s[..need]);
    });
}

pub fn forward(buf: &mut [Complex64]) {
    run(buf, false);
}

pub fn inverse(buf: &mut [Complex64]) {
    run(buf, true);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|x| *x *= scale);
}

/// Inverse transform without the `1/N` factor, for callers that fold it into
/// a multiply they do anyway.
pub fn inverse_unscaled(buf: &mut [Complex64]) {
    run(buf, true);
}

/// Signed frequency of bin `k` for an `n`-point transform at sample rate `fs`.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = k as i64;
    let n_i = n as i64;
    let signed = if k < (n_i + 1) / 2 { k } else { k - n_i };
    signed as f64 * fs / n as f64
}

/// Bin frequencies in transform order.
pub fn frequencies(n: usize, fs: f64) -> Vec<f64> {
    (0..n).map(|k| bin_frequency(k, n, fs)).collect()
}

/// Index of the bin holding signed bin number `signed` (may be negative).
pub fn bin_index(signed: i64, n: usize) -> usize {
    signed.rem_euclid(n as i64) as usize
}

/// Circular convolution of `x` with real `taps`, computed in the frequency domain.
/// Output sample `n` is `sum_j taps[j] * x[n - j]` with indices modulo `x.len()`.
pub fn circular_convolve(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut kernel = vec![Complex64::new(0.0, 0.0); n];
    for (j, &t) in taps.iter().enumerate() {
        kernel[j % n] += t;
    }
    let mut spec = x.to_vec();
    forward(&mut spec);
    forward(&mut kernel);
    spec.iter_mut().zip(&kernel).for_each(|(a, b)| *a *= b);
    inverse(&mut spec);
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let x: Vec<Complex64> = (0..30).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let mut y = x.clone();
        forward(&mut y);
        inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn positive_tone_lands_in_positive_bin() {
        let n = 64;
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 * i as f64 / n as f64))
            .collect();
        let mut y = x;
        forward(&mut y);
        let k = (0..n).max_by(|&a, &b| y[a].norm().total_cmp(&y[b].norm())).unwrap();
        assert_eq!(bin_frequency(k, n, n as f64), 5.0);
        assert_eq!(bin_index(-3, n), 61);
    }

    #[test]
    fn circular_convolution_matches_direct_sum() {
        let x: Vec<Complex64> = (0..17).map(|i| Complex64::new((i * 7 % 5) as f64, (i % 3) as f64)).collect();
        let taps = [0.5, -1.0, 0.25, 2.0];
        let y = circular_convolve(&x, &taps);
        for n in 0..x.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, t) in taps.iter().enumerate() {
                acc += x[(n + x.len() - j) % x.len()] * t;
            }
            assert!((acc - y[n]).norm() < 1e-12);
        }
    }
}
