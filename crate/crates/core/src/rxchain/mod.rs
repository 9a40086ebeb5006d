//! Optical network unit: demux, detection, demodulation and decisions.

mod demod;
mod demux;
mod pin;
mod sampling;

pub use demod::{demod_cutoff_hz, lowpass, quadrature_demodulate};
pub use demux::{dwdm_demux, dwdm_demux_many, dwdm_demux_to_rate, DemuxFilter};
pub use pin::{pin_detect, PinParams};
pub use sampling::{estimate_calibration, lowpass_sample, matched_filter_sample, RxCalibration, MIN_CALIBRATION_SYMBOLS};

use crate::signal::{BitStream, SymbolStream};
use crate::txchain::QamConstellation;

/// Minimum-distance decisions, labels emitted MSB first.
pub fn qam_demap(sym: &SymbolStream, c: &QamConstellation) -> BitStream {
    let k = c.bits_per_symbol();
    let mut bits = Vec::with_capacity(sym.len() * k as usize);
    for s in sym.symbols() {
        let label = c.nearest(*s);
        bits.extend((0..k).rev().map(|b| ((label >> b) & 1) as u8));
    }
    BitStream::from_parts(bits, sym.symbol_rate_hz() * k as f64)
}
