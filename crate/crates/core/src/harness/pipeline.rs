//! End-to-end scenario runs: transmitter, shared link, per-scenario receivers.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{link_propagate_from, propagate_ssfm_stats, span_plan, EdfaParams, LinkElement, PowerLogEntry};
use crate::error::{Error, Result};
use crate::fft;
use crate::units::watts_to_dbm;
use crate::metrics::{ber_count, evm_percent, eye_diagram_aligned, harmonic_ratio_with, ChannelMetrics, EyeData, MetricsReport};
use crate::rxchain::{
    demod_cutoff_hz, dwdm_demux_many, estimate_calibration, lowpass, lowpass_sample, matched_filter_sample, pin_detect,
    qam_demap, quadrature_demodulate, DemuxFilter, RxCalibration,
};
use crate::signal::{mean_power, spectrum, BitStream, ComplexEnvelope, RngSeed, SpectrumEstimate, SymbolStream};
use crate::txchain::{
    cw_laser, drive_for_index, dwdm_mux, mzm_modulate, prbs_generate, pulse_shape, qam_map, quadrature_modulate, scro_taps,
    LaserParams, PulseShaper, QamConstellation,
};

use super::config::{LinkConfig, Mitigation};

/// Everything the receivers need to know about what was sent.
#[derive(Debug, Clone)]
pub struct Transmitter {
    pub bits: Vec<BitStream>,
    pub symbols: Vec<SymbolStream>,
    /// Multiplexed field at the optical rate, referenced to the grid center.
    pub field: ComplexEnvelope,
    pub shaper: PulseShaper,
    pub constellation: QamConstellation,
    pub rf_hz: f64,
}

/// Seed of transmitter channel `k`: the master seed XOR the channel index.
pub fn channel_seed(master: RngSeed, k: usize) -> RngSeed {
    RngSeed(master.0 ^ k as u64)
}

/// Builds all channels and multiplexes them. Does not depend on the scenario.
pub fn build_transmitter(cfg: &LinkConfig) -> Result<Transmitter> {
    let constellation = QamConstellation::standard(cfg.qam_order)?;
    let shaper = scro_taps(cfg.rolloff, cfg.samples_per_symbol, cfg.span_symbols)?;
    let bps = constellation.bits_per_symbol() as usize;
    let rf_hz = cfg.rf_snapped_hz();
    let band = (1.0 + cfg.rolloff) * cfg.symbol_rate_hz();
    let fs_e = cfg.electrical_rate_hz();

    let channels: Vec<(BitStream, SymbolStream, ComplexEnvelope)> = (0..cfg.grid.channel_count)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let seed = channel_seed(cfg.master_seed, k);
            let bits = prbs_generate(seed, cfg.symbols_per_run * bps, cfg.prbs, cfg.bit_rate_hz)?;
            let symbols = qam_map(&bits, &constellation)?;
            let shaped = pulse_shape(&symbols, &shaper)?.envelope.resample(fs_e)?;
            let rf = quadrature_modulate(&shaped, rf_hz, band)?;
            let drive = drive_for_index(&rf, cfg.modulation_index, cfg.mzm.v_pi);
            let laser = LaserParams {
                power_dbm: cfg.laser_power_dbm,
                frequency_hz: cfg.grid.channel_frequency(k),
                linewidth_hz: cfg.laser_linewidth_hz,
                // independent lasers are mutually incoherent
                phase_rad: seed.derive("laser-phase", 0).rng().gen_range(0.0..2.0 * PI),
            };
            let carrier = cw_laser(&laser, drive.len(), fs_e, seed.derive("laser-noise", 0))?;
            let field = mzm_modulate(&carrier, &drive, &cfg.mzm)?;
            Ok((bits, symbols, field))
        })
        .collect::<Result<_>>()?;

    let mut bits = Vec::with_capacity(channels.len());
    let mut symbols = Vec::with_capacity(channels.len());
    let mut fields = Vec::with_capacity(channels.len());
    for (b, s, f) in channels {
        bits.push(b);
        symbols.push(s);
        fields.push(f);
    }
    let field = dwdm_mux(&fields, &cfg.grid, cfg.optical_rate_hz())?;
    Ok(Transmitter { bits, symbols, field, shaper, constellation, rf_hz })
}

/// One span of the default plan: fiber, optional compensator, loss-matched EDFA.
fn span_elements(cfg: &LinkConfig, length_km: f64) -> Vec<LinkElement> {
    let fiber = cfg.fiber.with_length(length_km);
    let mut out = vec![LinkElement::Fiber(fiber)];
    if cfg.dispersion_compensation {
        out.push(LinkElement::dcm_for(&fiber));
    }
    out.push(LinkElement::Edfa(EdfaParams {
        gain_db: fiber.loss_db(),
        noise_figure_db: cfg.edfa_noise_figure_db,
        center_hz: cfg.grid.center_hz(),
    }));
    out
}

/// Default link plan for one distance: full spans, then a partial one.
pub fn link_plan(cfg: &LinkConfig, distance_km: f64) -> Result<Vec<LinkElement>> {
    if let Some(plan) = &cfg.link {
        return Ok(plan.clone());
    }
    let edfa = EdfaParams { gain_db: 0.0, noise_figure_db: cfg.edfa_noise_figure_db, center_hz: cfg.grid.center_hz() };
    span_plan(distance_km, cfg.span_km, &cfg.fiber, &edfa, cfg.dispersion_compensation)
}

/// Per-channel outcome of one receiver pass.
#[derive(Debug, Clone)]
pub struct ChannelOutcome {
    pub metrics: ChannelMetrics,
    /// Calibrated symbol decisions before slicing.
    pub symbols: SymbolStream,
    pub calibration: RxCalibration,
}

/// Extra views of one reference channel.
#[derive(Debug, Clone)]
pub struct ChannelViews {
    pub channel: usize,
    pub rf_spectrum: SpectrumEstimate,
    pub eye: EyeData,
}

/// Receives every channel of `optical` (the field at the demultiplexer input).
pub fn receive_all(
    cfg: &LinkConfig,
    tx: &Transmitter,
    optical: &ComplexEnvelope,
    scenario: Mitigation,
    distance_km: f64,
    point_seed: RngSeed,
    view_channel: usize,
) -> Result<(Vec<ChannelOutcome>, ChannelViews)> {
    let filters: Vec<DemuxFilter> = (0..cfg.grid.channel_count)
        .map(|k| DemuxFilter { center_hz: cfg.grid.channel_frequency(k), bandwidth_3db_hz: cfg.demux_bandwidth_hz, order: cfg.demux_order })
        .collect();
    let dropped = dwdm_demux_many(optical, &filters, &cfg.grid, cfg.electrical_rate_hz())?;
    let results: Vec<(ChannelOutcome, Option<ChannelViews>)> = dropped
        .into_par_iter()
        .enumerate()
        .map(|(k, field)| receive_channel(cfg, tx, &field, scenario, distance_km, point_seed.derive("pin", k as u64), k, k == view_channel))
        .collect::<Result<_>>()?;
    let mut views = None;
    let mut outcomes = Vec::with_capacity(results.len());
    for (o, v) in results {
        outcomes.push(o);
        if v.is_some() {
            views = v;
        }
    }
    let views = views.ok_or_else(|| Error::invalid("view_channel", "not a channel of the grid"))?;
    Ok((outcomes, views))
}

#[allow(clippy::too_many_arguments)]
fn receive_channel(
    cfg: &LinkConfig,
    tx: &Transmitter,
    field: &ComplexEnvelope,
    scenario: Mitigation,
    distance_km: f64,
    pin_seed: RngSeed,
    k: usize,
    with_views: bool,
) -> Result<(ChannelOutcome, Option<ChannelViews>)> {
    let rs = cfg.symbol_rate_hz();
    let sps = cfg.samples_per_symbol;
    let bps = tx.constellation.bits_per_symbol();
    let current = pin_detect(field, &cfg.pin, pin_seed)?;
    let baseband = quadrature_demodulate(&current, tx.rf_hz, demod_cutoff_hz(rs, cfg.rolloff))?.resample(cfg.modem_rate_hz())?;

    let delay = match scenario {
        Mitigation::Scro => 2 * tx.shaper.group_delay_samples(),
        Mitigation::Soa => tx.shaper.group_delay_samples(),
    };
    let plain_cutoff = (1.0 + cfg.rolloff) * rs / 2.0;
    let unit = RxCalibration::default();
    let raw = match scenario {
        Mitigation::Scro => matched_filter_sample(&baseband, &tx.shaper, &unit, bps)?,
        Mitigation::Soa => lowpass_sample(&baseband, sps, plain_cutoff, delay, &unit, bps)?,
    };
    let cal = estimate_calibration(&raw, &tx.symbols[k])?;
    let symbols = cal.apply(&raw);
    let evm = evm_percent(&symbols, &tx.symbols[k])?;
    let decided = qam_demap(&symbols, &tx.constellation);
    let count = ber_count(&tx.bits[k], &decided)?;

    let rf_spectrum = spectrum(&current, cfg.spectrum_rbw_hz)?;
    let harmonic = harmonic_ratio_with(&rf_spectrum, tx.rf_hz, plain_cutoff, false)?;
    let metrics = ChannelMetrics::from_measurements(
        scenario.name(),
        distance_km,
        k,
        cfg.grid.channel_frequency(k) / 1e12,
        evm,
        &count,
        cfg.qam_order,
        harmonic,
    )?;

    let views = if with_views {
        // the receive-filtered waveform, scaled like the calibrated symbols
        let filtered = match scenario {
            Mitigation::Scro => baseband.with_samples(fft::circular_convolve(baseband.samples(), tx.shaper.taps())),
            Mitigation::Soa => lowpass(&baseband, plain_cutoff)?,
        };
        let scaled = filtered.with_samples(filtered.samples().iter().map(|a| a * cal.gain).collect());
        let n = scaled.len() as i64;
        let start = (delay as i64 + cal.timing_offset * sps as i64 - (sps / 2) as i64).rem_euclid(n) as usize;
        let eye = eye_diagram_aligned(&scaled, 1.0 / rs, cfg.eye_traces, start)?;
        Some(ChannelViews { channel: k, rf_spectrum, eye })
    } else {
        None
    };
    Ok((ChannelOutcome { metrics, symbols, calibration: cal }, views))
}

/// Data produced for one (scenario, distance) point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub channels: Vec<ChannelOutcome>,
    pub power_log: Vec<PowerLogEntry>,
    pub optical_spectrum: SpectrumEstimate,
    pub views: ChannelViews,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub scenario: Mitigation,
    pub distance_km: f64,
    /// Hash of the transmitted field this point started from.
    pub tx_field_hash: String,
    pub outcome: std::result::Result<PointData, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Telemetry {
    pub wall_clock_s: f64,
    pub transmitter_s: f64,
    pub propagation_s: f64,
    pub receiver_s: f64,
    pub ssfm_steps: u64,
    pub threads: usize,
    pub optical_samples: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: LinkConfig,
    pub points: Vec<PointResult>,
    pub report: MetricsReport,
    pub input_spectrum: Option<SpectrumEstimate>,
    pub telemetry: Telemetry,
}

impl RunResult {
    /// A result with no points, e.g. for a configuration check.
    pub fn empty(config: LinkConfig) -> Self {
        Self { config, points: Vec::new(), report: MetricsReport::default(), input_spectrum: None, telemetry: Telemetry::default() }
    }

    pub fn failures(&self) -> impl Iterator<Item = &PointResult> {
        self.points.iter().filter(|p| p.outcome.is_err())
    }

    pub fn point(&self, scenario: Mitigation, distance_km: f64) -> Option<&PointData> {
        self.points
            .iter()
            .find(|p| p.scenario == scenario && p.distance_km == distance_km)
            .and_then(|p| p.outcome.as_ref().ok())
    }
}

/// Shared propagation state: the field after the last completed span, plus
/// the raw fiber output part-way into the following span.
struct Checkpoint {
    field: ComplexEnvelope,
    full_spans: usize,
    next_index: usize,
    log: Vec<PowerLogEntry>,
    partial: Option<(f64, ComplexEnvelope)>,
}

impl Checkpoint {
    /// Fiber output `km` into the current span, continuing from the stored
    /// partial state when it lies before `km`.
    fn fiber_to(&mut self, cfg: &LinkConfig, km: f64, steps: &mut u64) -> Result<ComplexEnvelope> {
        let (from, start) = match &self.partial {
            Some((at, f)) if *at <= km => (*at, f),
            _ => (0.0, &self.field),
        };
        let out = if km - from > 1e-9 {
            let (out, stats) = propagate_ssfm_stats(start, &cfg.fiber.with_length(km - from), &cfg.ssfm)
                .map_err(|e| Error::Element { index: self.next_index, kind: "fiber", source: Box::new(e) })?;
            *steps += stats.steps;
            out
        } else {
            start.clone()
        };
        self.partial = Some((km, out.clone()));
        Ok(out)
    }

    /// Compensator and amplifier closing a span of `km`, starting at the
    /// checkpoint's current element index.
    fn close_span(&self, cfg: &LinkConfig, raw: &ComplexEnvelope, km: f64) -> Result<(ComplexEnvelope, Vec<PowerLogEntry>)> {
        let elements = span_elements(cfg, km);
        let mut log = vec![PowerLogEntry {
            element_index: self.next_index,
            element_type: "fiber",
            input_dbm: watts_to_dbm(mean_power(&self.field)),
            output_dbm: watts_to_dbm(mean_power(raw)),
        }];
        let out = link_propagate_from(raw, &elements[1..], self.next_index + 1, &cfg.ssfm, cfg.master_seed)?;
        log.extend(out.power_log);
        Ok((out.envelope, log))
    }
}

/// Runs every requested (scenario, distance) point.
///
/// The two scenarios share the transmitter and the fiber link; they differ
/// only in the SOA before the demultiplexer and in the receive filter.
/// Distances reuse the spans they have in common. A failing point is
/// recorded with its reason and the run goes on.
pub fn run_scenario(cfg: &LinkConfig) -> Result<RunResult> {
    cfg.validate()?;
    let t0 = Instant::now();
    let mut telemetry = Telemetry { threads: rayon::current_num_threads(), ..Telemetry::default() };

    let tx = build_transmitter(cfg)?;
    let tx_hash = tx.field.content_hash();
    telemetry.optical_samples = tx.field.len();
    let input_spectrum = spectrum(&tx.field, cfg.spectrum_rbw_hz)?;
    telemetry.transmitter_s = t0.elapsed().as_secs_f64();

    let mut distances = match &cfg.link {
        Some(plan) => vec![plan.iter().map(LinkElement::length_km).sum()],
        None => cfg.distances_km.clone(),
    };
    distances.sort_by(f64::total_cmp);
    distances.dedup();
    let view_channel = cfg.grid.channel_count / 2;
    let master = cfg.master_seed;

    let mut points = Vec::new();
    let mut checkpoint = Checkpoint { field: tx.field.clone(), full_spans: 0, next_index: 0, log: Vec::new(), partial: None };
    let mut broken: Option<String> = None;

    for &d in &distances {
        let tp = Instant::now();
        let reached = match (&broken, &cfg.link) {
            (Some(reason), _) => Err(reason.clone()),
            (None, Some(plan)) => link_propagate_from(&tx.field, plan, 0, &cfg.ssfm, master)
                .map(|o| {
                    telemetry.ssfm_steps += o.ssfm_steps;
                    (o.envelope, o.power_log, plan.len())
                })
                .map_err(|e| e.to_string()),
            (None, None) => advance(cfg, &mut checkpoint, d, &mut telemetry.ssfm_steps).map_err(|e| {
                let msg = e.to_string();
                broken = Some(msg.clone());
                msg
            }),
        };
        telemetry.propagation_s += tp.elapsed().as_secs_f64();

        for &scenario in &cfg.scenarios {
            let tp = Instant::now();
            let outcome = match &reached {
                Err(reason) => Err(reason.clone()),
                Ok((field, log, next_index)) => {
                    let seed = master.derive(&format!("point/{}/{}", scenario.name(), d), 0);
                    run_point(cfg, &tx, field, log, *next_index, scenario, d, seed, view_channel, &mut telemetry).map_err(|e| e.to_string())
                }
            };
            if let Err(reason) = &outcome {
                log::error!("{} at {d} km failed: {reason}", scenario.name());
            }
            let outcome = outcome.map(|mut p| {
                p.elapsed_s = tp.elapsed().as_secs_f64();
                p
            });
            points.push(PointResult { scenario, distance_km: d, tx_field_hash: tx_hash.clone(), outcome });
        }
    }

    let mut report = MetricsReport::default();
    for p in &points {
        if let Ok(data) = &p.outcome {
            report.channels.extend(data.channels.iter().map(|c| c.metrics.clone()));
        }
    }
    telemetry.wall_clock_s = t0.elapsed().as_secs_f64();
    Ok(RunResult { config: cfg.clone(), points, report, input_spectrum: Some(input_spectrum), telemetry })
}

/// Moves the shared checkpoint up to `d` and returns the field there with its
/// power log and the index of the next element. Distances must arrive in
/// increasing order; a partial span continues the fiber state of the previous
/// stop inside the same span instead of starting over.
fn advance(cfg: &LinkConfig, cp: &mut Checkpoint, d: f64, steps: &mut u64) -> Result<(ComplexEnvelope, Vec<PowerLogEntry>, usize)> {
    let full = ((d / cfg.span_km) + 1e-9).floor() as usize;
    let rest = d - full as f64 * cfg.span_km;
    while cp.full_spans < full {
        let raw = cp.fiber_to(cfg, cfg.span_km, steps)?;
        let (field, log) = cp.close_span(cfg, &raw, cfg.span_km)?;
        cp.field = field;
        cp.log.extend(log);
        cp.next_index += span_elements(cfg, cfg.span_km).len();
        cp.full_spans += 1;
        cp.partial = None;
        log::info!("propagated {} km", cp.full_spans as f64 * cfg.span_km);
    }
    if rest > 1e-9 * cfg.span_km.max(1.0) {
        let raw = cp.fiber_to(cfg, rest, steps)?;
        let (field, tail) = cp.close_span(cfg, &raw, rest)?;
        let mut log = cp.log.clone();
        log.extend(tail);
        Ok((field, log, cp.next_index + span_elements(cfg, rest).len()))
    } else {
        Ok((cp.field.clone(), cp.log.clone(), cp.next_index))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_point(
    cfg: &LinkConfig,
    tx: &Transmitter,
    field: &ComplexEnvelope,
    log: &[PowerLogEntry],
    next_index: usize,
    scenario: Mitigation,
    distance_km: f64,
    seed: RngSeed,
    view_channel: usize,
    telemetry: &mut Telemetry,
) -> Result<PointData> {
    let tp = Instant::now();
    let mut power_log = log.to_vec();
    let owned;
    let at_demux = match scenario {
        Mitigation::Soa => {
            let out = link_propagate_from(field, &[LinkElement::Soa(cfg.soa)], next_index, &cfg.ssfm, cfg.master_seed)?;
            power_log.extend(out.power_log);
            owned = out.envelope;
            &owned
        }
        Mitigation::Scro => field,
    };
    telemetry.propagation_s += tp.elapsed().as_secs_f64();
    let tr = Instant::now();
    let optical_spectrum = spectrum(at_demux, cfg.spectrum_rbw_hz)?;
    let (channels, views) = receive_all(cfg, tx, at_demux, scenario, distance_km, seed, view_channel)?;
    telemetry.receiver_s += tr.elapsed().as_secs_f64();
    Ok(PointData { channels, power_log, optical_spectrum, views, elapsed_s: 0.0 })
}

/// Symbols of a calibrated stream as `(i, q)` rows.
pub fn constellation_rows(symbols: &SymbolStream, limit: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
    symbols.symbols().iter().copied().enumerate().take(limit)
}
