//! Link quality figures: EVM, BER, Q, eye opening and harmonic distortion.

mod eye;
mod harmonic;
mod quality;
mod report;

pub use eye::{eye_diagram, eye_diagram_aligned, EyeData};
pub use harmonic::{harmonic_ratio, harmonic_ratio_with, TONE_WINDOW_RBW};
pub use quality::{ber_count, ber_from_evm, ber_from_q, estimate_order, evm_percent, q_from_ber, BerCount, CROSS_128_EFFECTIVE_ORDER};
pub use report::{BerSource, ChannelMetrics, MetricsReport, MIN_COUNTED_ERRORS};
