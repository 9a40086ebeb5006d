//! Scenario configuration, orchestration and artifact export.

mod artifacts;
mod config;
mod pipeline;

pub use artifacts::{emit_artifacts, FailedPoint, Manifest, ManifestEntry, TelemetryRecord, MANIFEST_FILE};
pub use config::{load_config, parse_config, LinkConfig, Mitigation, DEFAULT_CONFIG};
pub use pipeline::{
    build_transmitter, channel_seed, link_plan, receive_all, run_scenario, ChannelOutcome, ChannelViews, PointData, PointResult, RunResult,
    Telemetry, Transmitter,
};
