//! Optical channel: fiber, amplifiers and link plans.

mod amplifier;
mod fiber;
mod link;

pub use amplifier::{edfa_amplify, soa_amplify, soa_mean_gain, EdfaParams, SoaParams};
pub use fiber::{apply_dispersion, propagate_ssfm, propagate_ssfm_stats, FiberParams, SsfmConfig, SsfmStats, MAX_STEPS};
pub use link::{link_propagate, link_propagate_from, span_plan, write_power_log_csv, LinkElement, LinkOutput, PowerLogEntry};
