//! EVM, bit counting, and the BER / Q relations.

use std::f64::consts::SQRT_2;

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::signal::{BitStream, SymbolStream};

/// Square-QAM-equivalent order of the 128-point cross constellation.
pub const CROSS_128_EFFECTIVE_ORDER: f64 = 124.0;

/// `100 sqrt(sum |rx - ref|^2 / sum |ref|^2)`.
pub fn evm_percent(rx: &SymbolStream, reference: &SymbolStream) -> Result<f64> {
    evm_percent_slices(rx.symbols(), reference.symbols())
}

pub(crate) fn evm_percent_slices(rx: &[num_complex::Complex64], reference: &[num_complex::Complex64]) -> Result<f64> {
    if rx.len() != reference.len() || rx.is_empty() {
        return Err(Error::Mismatch(format!("EVM needs equal non-empty streams, got {} and {}", rx.len(), reference.len())));
    }
    let err: f64 = rx.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum();
    let power: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
    if power == 0.0 {
        return Err(Error::invalid("reference", "has zero power"));
    }
    Ok(100.0 * (err / power).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerCount {
    pub errors: usize,
    pub bits: usize,
    pub ber: f64,
    /// False when no errors were seen; the rate is then only bounded by [`BerCount::upper_bound`].
    pub resolvable: bool,
    /// More than half the bits differ, which points at an inverted decision polarity.
    pub polarity_inverted: bool,
}

impl BerCount {
    pub fn upper_bound(&self) -> f64 {
        if self.resolvable {
            self.ber
        } else {
            1.0 / self.bits as f64
        }
    }
}

pub fn ber_count(tx: &BitStream, rx: &BitStream) -> Result<BerCount> {
    if tx.len() != rx.len() || tx.is_empty() {
        return Err(Error::Mismatch(format!("bit streams of length {} and {}", tx.len(), rx.len())));
    }
    let errors = tx.bits().iter().zip(rx.bits()).filter(|(a, b)| a != b).count();
    let ber = errors as f64 / tx.len() as f64;
    let polarity_inverted = ber > 0.5;
    if polarity_inverted {
        log::warn!("BER {ber} exceeds 0.5; the receiver polarity looks inverted");
    }
    Ok(BerCount { errors, bits: tx.len(), ber, resolvable: errors > 0, polarity_inverted })
}

/// Order used inside the closed-form estimate: the cross constellation maps to
/// its square equivalent, square orders are used as is.
pub fn estimate_order(m: usize) -> Result<f64> {
    match m {
        4 | 16 | 64 | 256 => Ok(m as f64),
        128 => Ok(CROSS_128_EFFECTIVE_ORDER),
        _ => Err(Error::invalid("M", format!("no error-rate model for {m}-QAM"))),
    }
}

/// Gray-coded square-QAM estimate from EVM (as an SNR):
/// `BER = 2 (1 - 1/sqrt(M)) / log2(M) * erfc( sqrt(3 SNR / (M - 1)) / sqrt(2) )`.
///
/// Returns 0 for a zero EVM, which callers treat as unresolvable.
pub fn ber_from_evm(evm_percent: f64, m: usize) -> Result<f64> {
    if !(evm_percent >= 0.0) {
        return Err(Error::invalid("evm_percent", "must be non-negative"));
    }
    let m_eff = estimate_order(m)?;
    if evm_percent == 0.0 {
        return Ok(0.0);
    }
    let snr = (100.0 / evm_percent).powi(2);
    let bits = (m as f64).log2();
    let prefactor = 2.0 * (1.0 - 1.0 / m_eff.sqrt()) / bits;
    Ok(prefactor * erfc((3.0 * snr / (m_eff - 1.0)).sqrt() / SQRT_2))
}

/// `Q = sqrt(2) erfc^-1(2 BER)` for BER in (0, 0.5].
pub fn q_from_ber(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber <= 0.5) {
        return Err(Error::invalid("ber", format!("{ber} is outside (0, 0.5]")));
    }
    Ok((SQRT_2 * erfc_inv(2.0 * ber)).max(0.0))
}

/// `BER = erfc(Q / sqrt(2)) / 2` for Q >= 0.
pub fn ber_from_q(q: f64) -> Result<f64> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::invalid("q", format!("{q} must be a finite non-negative number")));
    }
    Ok(0.5 * erfc(q / SQRT_2))
}
