//! Maximal-length LFSR bit sources.

use crate::error::{Error, Result};
use crate::signal::{BitStream, RngSeed};

/// Primitive feedback polynomials `x^n + x^m + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrbsPolynomial {
    /// x^7 + x^6 + 1
    Prbs7,
    /// x^15 + x^14 + 1
    Prbs15,
    /// x^23 + x^18 + 1
    Prbs23,
}

impl PrbsPolynomial {
    pub fn degree(self) -> u32 {
        match self {
            PrbsPolynomial::Prbs7 => 7,
            PrbsPolynomial::Prbs15 => 15,
            PrbsPolynomial::Prbs23 => 23,
        }
    }

    fn second_tap(self) -> u32 {
        match self {
            PrbsPolynomial::Prbs7 => 6,
            PrbsPolynomial::Prbs15 => 14,
            PrbsPolynomial::Prbs23 => 18,
        }
    }

    pub fn period(self) -> u64 {
        (1u64 << self.degree()) - 1
    }
}

/// Fibonacci LFSR over `degree` bits. Each clock shifts in and emits `s[n-1] ^ s[m-1]`.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u32,
    poly: PrbsPolynomial,
}

impl Lfsr {
    pub fn new(state: u32, poly: PrbsPolynomial) -> Result<Self> {
        let mask = (1u32 << poly.degree()) - 1;
        if state & mask == 0 {
            return Err(Error::invalid("state", "an all-zero LFSR state never leaves zero"));
        }
        Ok(Self { state: state & mask, poly })
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_bit(&mut self) -> u8 {
        let n = self.poly.degree();
        let m = self.poly.second_tap();
        let bit = ((self.state >> (n - 1)) ^ (self.state >> (m - 1))) & 1;
        self.state = ((self.state << 1) | bit) & ((1u32 << n) - 1);
        bit as u8
    }
}

/// Pseudo-random bits from an LFSR whose start state is derived from `seed`
/// (never the all-zero state).
pub fn prbs_generate(seed: RngSeed, length: usize, poly: PrbsPolynomial, bit_rate_hz: f64) -> Result<BitStream> {
    let state = (seed.0 % poly.period()) as u32 + 1;
    prbs_from_state(state, length, poly, bit_rate_hz)
}

pub fn prbs_from_state(state: u32, length: usize, poly: PrbsPolynomial, bit_rate_hz: f64) -> Result<BitStream> {
    let mut lfsr = Lfsr::new(state, poly)?;
    let bits = (0..length).map(|_| lfsr.next_bit()).collect();
    BitStream::new(bits, bit_rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_length_gives_empty_stream() {
        let b = prbs_generate(RngSeed(3), 0, PrbsPolynomial::Prbs7, 1e9).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn zero_state_is_rejected() {
        assert!(prbs_from_state(0, 10, PrbsPolynomial::Prbs15, 1e9).is_err());
        assert!(prbs_from_state(1 << 7, 10, PrbsPolynomial::Prbs7, 1e9).is_err());
    }

    #[test]
    fn seed_zero_still_runs() {
        let b = prbs_generate(RngSeed(0), 200, PrbsPolynomial::Prbs7, 1e9).unwrap();
        assert!(b.bits().iter().any(|&x| x == 1));
    }
}
