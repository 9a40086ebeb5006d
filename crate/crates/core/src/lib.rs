//! Physical-layer simulation of a 16-channel DWDM radio-over-fiber link.
//!
//! The crate follows the signal from bits to metrics:
//!
//! - [`txchain`]: PRBS data, QAM mapping, root-raised-cosine shaping, RF
//!   quadrature modulation, MZM intensity modulation and DWDM multiplexing.
//! - [`channel`]: split-step Fourier propagation of the whole band (SPM, XPM
//!   and FWM all emerge from the total field), EDFAs with ASE and a saturable SOA.
//! - [`rxchain`]: demultiplexing, PIN detection, quadrature demodulation,
//!   matched filtering, data-aided calibration and QAM decisions.
//! - [`metrics`]: EVM, BER, Q, eye diagrams and harmonic distortion.
//! - [`harness`]: config files, the SOA-vs-SCRO scenario runner and artifact export.
//!
//! Everything is a pure function of its inputs and an explicit [`RngSeed`].

pub mod channel;
pub mod error;
pub(crate) mod fft;
pub mod harness;
pub mod metrics;
pub mod rxchain;
pub mod signal;
pub mod txchain;
pub mod units;

pub use error::{Error, Result};
pub use signal::{
    combine, frequency_shift, mean_power, spectrum, BitStream, ComplexEnvelope, RngSeed, SpectrumEstimate,
    SymbolStream,
};
