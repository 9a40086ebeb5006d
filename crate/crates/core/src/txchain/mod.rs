//! Optical line terminal: bits to a multiplexed DWDM field.
//!
//! Per channel the chain is PRBS -> QAM mapper -> root-raised-cosine shaper ->
//! RF quadrature modulator -> MZM on a CW laser. [`dwdm_mux`] then stacks the
//! channels on the grid.

mod modulator;
mod mux;
mod prbs;
mod pulse;
mod qam;

pub use modulator::{cw_laser, drive_for_index, mzm_field_transfer, mzm_modulate, quadrature_modulate, LaserParams, MzmParams};
pub use mux::{dwdm_mux, WdmGrid};
pub use prbs::{prbs_from_state, prbs_generate, Lfsr, PrbsPolynomial};
pub use pulse::{pulse_shape, rrc_impulse, scro_taps, PulseShaper, ShapedSignal};
pub use qam::{qam_map, QamConstellation};
