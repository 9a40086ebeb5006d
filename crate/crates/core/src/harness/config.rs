//! Sectioned `key = value` configuration files.
//!
//! ```text
//! # comments run to the end of the line
//! [grid]
//! channels = 16
//! start_thz = 193.414
//! ```
//!
//! Every key is optional and falls back to [`LinkConfig::default`]. Unknown
//! sections and keys are rejected with their line number; values that violate
//! an invariant are reported with their `section.key` path.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{FiberParams, LinkElement, SoaParams, SsfmConfig};
use crate::error::{Error, Result};
use crate::rxchain::PinParams;
use crate::signal::RngSeed;
use crate::txchain::{MzmParams, PrbsPolynomial, QamConstellation, WdmGrid};
use crate::units::dispersion_to_beta2;

/// Receiver mitigation compared by the scenario runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mitigation {
    /// SOA before the demultiplexer, plain low-pass receiver.
    Soa,
    /// No SOA, root-raised-cosine matched filter.
    Scro,
}

impl Mitigation {
    pub fn name(self) -> &'static str {
        match self {
            Mitigation::Soa => "soa",
            Mitigation::Scro => "scro",
        }
    }
}

impl FromStr for Mitigation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soa" | "a" => Ok(Mitigation::Soa),
            "scro" | "scro_dsp" | "b" => Ok(Mitigation::Scro),
            other => Err(format!("unknown scenario `{other}` (expected soa or scro)")),
        }
    }
}

/// Everything a scenario run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub grid: WdmGrid,
    /// Per-channel line rate (b/s).
    pub bit_rate_hz: f64,
    pub qam_order: usize,
    pub rolloff: f64,
    pub span_symbols: usize,
    pub samples_per_symbol: usize,
    pub rf_hz: f64,
    /// MZM modulation index of the RF drive.
    pub modulation_index: f64,
    pub prbs: PrbsPolynomial,
    pub laser_power_dbm: f64,
    pub laser_linewidth_hz: f64,
    pub mzm: MzmParams,
    /// Fiber coefficients; the length is set per span.
    pub fiber: FiberParams,
    pub span_km: f64,
    /// Ideal dispersion compensation after every span.
    pub dispersion_compensation: bool,
    pub ssfm: SsfmConfig,
    pub edfa_noise_figure_db: f64,
    pub soa: SoaParams,
    pub pin: PinParams,
    pub demux_bandwidth_hz: f64,
    pub demux_order: u32,
    pub scenarios: Vec<Mitigation>,
    pub distances_km: Vec<f64>,
    pub symbols_per_run: usize,
    pub master_seed: RngSeed,
    /// Electrical (per-channel) rate as a multiple of the modem rate.
    pub electrical_oversampling: usize,
    /// Optical (whole-band) rate as a multiple of the modem rate.
    pub optical_oversampling: usize,
    pub spectrum_rbw_hz: f64,
    pub eye_traces: usize,
    /// Symbols per channel written to the constellation CSVs.
    pub constellation_symbols: usize,
    /// Explicit element list replacing the span plan.
    pub link: Option<Vec<LinkElement>>,
    pub strict_paper: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            grid: WdmGrid::default(),
            bit_rate_hz: 18.75e9,
            qam_order: 128,
            rolloff: 0.2,
            span_symbols: 32,
            samples_per_symbol: 8,
            rf_hz: 5e9,
            modulation_index: 0.2,
            prbs: PrbsPolynomial::Prbs23,
            laser_power_dbm: 0.0,
            laser_linewidth_hz: 0.0,
            mzm: MzmParams::quadrature(4.0, 5.0, 30.0),
            fiber: FiberParams::standard_smf(0.0),
            span_km: 100.0,
            dispersion_compensation: false,
            ssfm: SsfmConfig::default(),
            edfa_noise_figure_db: 5.0,
            soa: SoaParams::default(),
            pin: PinParams::default(),
            demux_bandwidth_hz: 70e9,
            demux_order: 2,
            scenarios: vec![Mitigation::Soa, Mitigation::Scro],
            distances_km: vec![50.0, 100.0, 150.0, 200.0, 250.0, 300.0],
            symbols_per_run: 4096,
            master_seed: RngSeed(1),
            electrical_oversampling: 8,
            optical_oversampling: 120,
            spectrum_rbw_hz: 100e6,
            eye_traces: 200,
            constellation_symbols: 512,
            link: None,
            strict_paper: false,
        }
    }
}

/// The shipped desk-scale configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/default.conf");

const REFERENCE_FIRST_HZ: f64 = 193.414e12;
const REFERENCE_LAST_HZ: f64 = 194.914e12;

fn field(path: &str, message: impl Into<String>) -> Error {
    Error::ConfigField { path: path.to_string(), message: message.into() }
}

impl LinkConfig {
    pub fn bits_per_symbol(&self) -> u32 {
        self.qam_order.trailing_zeros()
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.bit_rate_hz / self.bits_per_symbol() as f64
    }

    pub fn modem_rate_hz(&self) -> f64 {
        self.symbol_rate_hz() * self.samples_per_symbol as f64
    }

    pub fn electrical_rate_hz(&self) -> f64 {
        self.modem_rate_hz() * self.electrical_oversampling as f64
    }

    pub fn optical_rate_hz(&self) -> f64 {
        self.modem_rate_hz() * self.optical_oversampling as f64
    }

    /// RF carrier rounded to the frequency grid of one block so the waveform is periodic.
    pub fn rf_snapped_hz(&self) -> f64 {
        let df = self.symbol_rate_hz() / self.symbols_per_run as f64;
        (self.rf_hz / df).round() * df
    }

    /// Checks every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate().map_err(|e| field("grid", e.to_string()))?;
        if !(self.bit_rate_hz > 0.0) {
            return Err(field("modem.bit_rate_gbps", "must be positive"));
        }
        QamConstellation::standard(self.qam_order).map_err(|e| field("modem.qam_order", e.to_string()))?;
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(field("modem.rolloff", "must lie in [0, 1]"));
        }
        if self.span_symbols < 8 || self.span_symbols % 2 != 0 {
            return Err(field("modem.span_symbols", "must be an even number of at least 8"));
        }
        if self.samples_per_symbol < 2 {
            return Err(field("modem.samples_per_symbol", "must be at least 2"));
        }
        let half_band = (1.0 + self.rolloff) * self.symbol_rate_hz() / 2.0;
        if !(self.rf_hz > half_band) {
            return Err(field("modem.rf_ghz", format!("must exceed half the signal band ({half_band:.4e} Hz)")));
        }
        if !(self.modulation_index > 0.0 && self.modulation_index < std::f64::consts::PI) {
            return Err(field("modem.modulation_index", "must lie in (0, pi)"));
        }
        if !self.laser_power_dbm.is_finite() {
            return Err(field("laser.power_dbm", "must be finite"));
        }
        if !(self.laser_linewidth_hz >= 0.0) {
            return Err(field("laser.linewidth_hz", "must be non-negative"));
        }
        self.mzm.validate().map_err(|e| field("mzm", e.to_string()))?;
        self.fiber.validate().map_err(|e| field("fiber", e.to_string()))?;
        if !(self.span_km > 0.0) {
            return Err(field("fiber.span_km", "must be positive"));
        }
        self.ssfm.validate().map_err(|e| field("ssfm", e.to_string()))?;
        if !(self.edfa_noise_figure_db == 0.0 || self.edfa_noise_figure_db >= 3.0) {
            return Err(field("edfa.noise_figure_db", "must be 0 (noiseless) or at least 3 dB"));
        }
        self.soa.validate().map_err(|e| field("soa", e.to_string()))?;
        self.pin.validate().map_err(|e| field("pin", e.to_string()))?;
        if self.demux_order == 0 {
            return Err(field("demux.order", "must be at least 1"));
        }
        if !(self.demux_bandwidth_hz > 0.0) || (self.grid.channel_count > 1 && self.demux_bandwidth_hz >= self.grid.spacing_hz) {
            return Err(field("demux.bandwidth_ghz", "must be positive and below the grid spacing"));
        }
        if self.scenarios.is_empty() {
            return Err(field("simulation.scenarios", "must name at least one scenario"));
        }
        if self.distances_km.is_empty() {
            return Err(field("simulation.distances_km", "must list at least one distance"));
        }
        if let Some(d) = self.distances_km.iter().find(|d| !(0.0..=1000.0).contains(*d)) {
            return Err(field("simulation.distances_km", format!("{d} km is outside [0, 1000]")));
        }
        if self.symbols_per_run < 256 {
            return Err(field("simulation.symbols_per_run", "must be at least 256"));
        }
        if self.electrical_oversampling < 1 || self.optical_oversampling < self.electrical_oversampling {
            return Err(field("simulation.optical_oversampling", "must be at least the electrical oversampling, which must be at least 1"));
        }
        let nyquist_e = self.electrical_rate_hz() / 2.0;
        if self.rf_hz + half_band >= nyquist_e {
            return Err(field("simulation.electrical_oversampling", "electrical rate too low for the RF carrier"));
        }
        let reach = 0.5 * (self.grid.last_frequency() - self.grid.start_hz) + nyquist_e;
        if reach >= self.optical_rate_hz() / 2.0 {
            return Err(field("simulation.optical_oversampling", "optical rate too low to hold the whole grid"));
        }
        if !(self.spectrum_rbw_hz > 0.0) {
            return Err(field("simulation.spectrum_rbw_ghz", "must be positive"));
        }
        if self.strict_paper {
            self.check_reference_ranges()?;
        }
        Ok(())
    }

    fn check_reference_ranges(&self) -> Result<()> {
        if self.grid.channel_count != 16 {
            return Err(field("grid.channels", "strict-paper mode requires 16 channels"));
        }
        if self.grid.spacing_hz > 100e9 + 1.0 {
            return Err(field("grid.spacing_ghz", "strict-paper mode requires a spacing less than or equal to 100 GHz"));
        }
        let tol = 1e3;
        if self.grid.start_hz < REFERENCE_FIRST_HZ - tol || self.grid.last_frequency() > REFERENCE_LAST_HZ + tol {
            return Err(field("grid.start_thz", "strict-paper mode requires every channel within 193.414-194.914 THz"));
        }
        if let Some(d) = self.distances_km.iter().find(|d| !(50.0..=300.0).contains(*d)) {
            return Err(field("simulation.distances_km", format!("strict-paper mode requires 50-300 km, got {d}")));
        }
        Ok(())
    }

    /// Effective configuration in the file format; parsing it gives back `self`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|d| num(*d)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "[grid]\nchannels = {}\nstart_thz = {}\nspacing_ghz = {}", self.grid.channel_count, num(self.grid.start_hz / 1e12), num(self.grid.spacing_hz / 1e9));
        let _ = writeln!(
            s,
            "\n[modem]\nbit_rate_gbps = {}\nqam_order = {}\nrolloff = {}\nspan_symbols = {}\nsamples_per_symbol = {}\nrf_ghz = {}\nmodulation_index = {}\nprbs = {}",
            num(self.bit_rate_hz / 1e9),
            self.qam_order,
            num(self.rolloff),
            self.span_symbols,
            self.samples_per_symbol,
            num(self.rf_hz / 1e9),
            num(self.modulation_index),
            self.prbs.degree()
        );
        let _ = writeln!(s, "\n[laser]\npower_dbm = {}\nlinewidth_hz = {}", num(self.laser_power_dbm), num(self.laser_linewidth_hz));
        let _ = writeln!(
            s,
            "\n[mzm]\nv_pi = {}\nbias_v = {}\ninsertion_loss_db = {}\nextinction_ratio_db = {}",
            num(self.mzm.v_pi),
            num(self.mzm.bias_v),
            num(self.mzm.insertion_loss_db),
            num(self.mzm.extinction_ratio_db)
        );
        let _ = writeln!(
            s,
            "\n[fiber]\nalpha_db_per_km = {}\nbeta2_ps2_per_km = {}\nbeta3_ps3_per_km = {}\ngamma_per_w_km = {}\nspan_km = {}\ndispersion_compensation = {}",
            num(self.fiber.alpha_db_per_km),
            num(self.fiber.beta2_ps2_per_km),
            num(self.fiber.beta3_ps3_per_km),
            num(self.fiber.gamma_per_w_km),
            num(self.span_km),
            self.dispersion_compensation
        );
        let _ = writeln!(
            s,
            "\n[ssfm]\nmax_step_km = {}\nmax_nl_phase_rad = {}\nstrict = {}",
            num(self.ssfm.max_step_km),
            num(self.ssfm.max_nl_phase_rad),
            self.ssfm.strict
        );
        let _ = writeln!(s, "\n[edfa]\nnoise_figure_db = {}", num(self.edfa_noise_figure_db));
        let _ = writeln!(
            s,
            "\n[soa]\nsmall_signal_gain_db = {}\nsaturation_energy_pj = {}\ncarrier_lifetime_ps = {}\nlinewidth_enhancement = {}",
            num(self.soa.small_signal_gain_db),
            num(self.soa.saturation_energy_j * 1e12),
            num(self.soa.carrier_lifetime_s * 1e12),
            num(self.soa.linewidth_enhancement)
        );
        let _ = writeln!(
            s,
            "\n[pin]\nresponsivity_a_per_w = {}\nthermal_noise_pa_per_sqrt_hz = {}\ndark_current_na = {}\nshot_noise = {}",
            num(self.pin.responsivity_a_per_w),
            num(self.pin.thermal_noise_a_per_sqrt_hz * 1e12),
            num(self.pin.dark_current_a * 1e9),
            self.pin.shot_noise_enabled
        );
        let _ = writeln!(s, "\n[demux]\nbandwidth_ghz = {}\norder = {}", num(self.demux_bandwidth_hz / 1e9), self.demux_order);
        let scen = self.scenarios.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(
            s,
            "\n[simulation]\nscenarios = {scen}\ndistances_km = {}\nsymbols_per_run = {}\nseed = {}\nelectrical_oversampling = {}\noptical_oversampling = {}\nspectrum_rbw_ghz = {}\neye_traces = {}\nconstellation_symbols = {}\nstrict_paper = {}",
            list(&self.distances_km),
            self.symbols_per_run,
            self.master_seed.0,
            self.electrical_oversampling,
            self.optical_oversampling,
            num(self.spectrum_rbw_hz / 1e9),
            self.eye_traces,
            self.constellation_symbols,
            self.strict_paper
        );
        if let Some(plan) = &self.link {
            let items: Vec<String> = plan
                .iter()
                .map(|e| match e {
                    LinkElement::Fiber(f) => format!("fiber {}", num(f.length_km)),
                    LinkElement::Edfa(p) => format!("edfa {}", num(p.gain_db)),
                    LinkElement::Soa(_) => "soa".to_string(),
                    LinkElement::Dcm { beta2_ps2, .. } => format!("dcm {}", num(beta2_ps2 / self.fiber.beta2_ps2_per_km)),
                })
                .collect();
            let _ = writeln!(s, "\n[link]\nplan = {}", items.join("; "));
        }
        s
    }
}

/// Shortest decimal that parses back to the same value.
fn num(x: f64) -> String {
    format!("{x:?}").trim_end_matches(".0").to_string()
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("grid", &["channels", "start_thz", "spacing_ghz"]),
    ("modem", &["bit_rate_gbps", "qam_order", "rolloff", "span_symbols", "samples_per_symbol", "rf_ghz", "modulation_index", "prbs"]),
    ("laser", &["power_dbm", "linewidth_hz"]),
    ("mzm", &["v_pi", "bias_v", "insertion_loss_db", "extinction_ratio_db"]),
    (
        "fiber",
        &["alpha_db_per_km", "dispersion_ps_per_nm_km", "beta2_ps2_per_km", "beta3_ps3_per_km", "gamma_per_w_km", "span_km", "dispersion_compensation"],
    ),
    ("ssfm", &["max_step_km", "max_nl_phase_rad", "strict"]),
    ("edfa", &["noise_figure_db"]),
    ("soa", &["small_signal_gain_db", "saturation_energy_pj", "carrier_lifetime_ps", "linewidth_enhancement"]),
    ("pin", &["responsivity_a_per_w", "thermal_noise_pa_per_sqrt_hz", "dark_current_na", "shot_noise"]),
    ("demux", &["bandwidth_ghz", "order"]),
    (
        "simulation",
        &[
            "scenarios",
            "distances_km",
            "symbols_per_run",
            "seed",
            "electrical_oversampling",
            "optical_oversampling",
            "spectrum_rbw_ghz",
            "eye_traces",
            "constellation_symbols",
            "strict_paper",
        ],
    ),
    ("link", &["plan"]),
];

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::ConfigParse { line, message: format!("{key}: cannot read `{v}`: {e}") }),
        }
    }

    fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    fn scaled(&mut self, key: &str, slot: &mut f64, scale: f64) -> Result<()> {
        if let Some(v) = self.take::<f64>(key)? {
            *slot = v * scale;
        }
        Ok(())
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| Error::ConfigParse { line, message: format!("{key}: cannot read `{s}`: {e}") }))
        .collect()
}

fn parse_plan(value: &str, line: usize, cfg: &LinkConfig) -> Result<Vec<LinkElement>> {
    let bad = |m: String| Error::ConfigParse { line, message: format!("link.plan: {m}") };
    let center = cfg.grid.center_hz();
    let mut plan = Vec::new();
    for item in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut words = item.split_whitespace();
        let kind = words.next().unwrap_or_default();
        let arg = words.next().map(|w| w.parse::<f64>().map_err(|e| bad(format!("`{item}`: {e}")))).transpose()?;
        if words.next().is_some() {
            return Err(bad(format!("`{item}` has too many values")));
        }
        let need = |a: Option<f64>| a.ok_or_else(|| bad(format!("`{item}` needs a value")));
        plan.push(match kind {
            "fiber" => LinkElement::Fiber(cfg.fiber.with_length(need(arg)?)),
            "edfa" => LinkElement::Edfa(crate::channel::EdfaParams { gain_db: need(arg)?, noise_figure_db: cfg.edfa_noise_figure_db, center_hz: center }),
            "soa" => LinkElement::Soa(cfg.soa),
            "dcm" => LinkElement::dcm_for(&cfg.fiber.with_length(need(arg)?)),
            other => return Err(bad(format!("unknown element `{other}`"))),
        });
    }
    if plan.is_empty() {
        return Err(bad("empty plan".into()));
    }
    Ok(plan)
}

/// Parses configuration text; see the module docs for the format.
pub fn parse_config(text: &str) -> Result<LinkConfig> {
    let mut sections: BTreeMap<&str, Entries> = BTreeMap::new();
    let mut current: Option<&str> = None;
    let mut any = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        any = true;
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(Error::ConfigParse { line, message: format!("malformed section header `{content}`") })?.trim();
            let known = SCHEMA.iter().find(|(s, _)| *s == name).ok_or(Error::ConfigParse { line, message: format!("unknown section [{name}]") })?;
            current = Some(known.0);
            sections.entry(known.0).or_insert_with(|| Entries { map: BTreeMap::new() });
            continue;
        }
        let section = current.ok_or(Error::ConfigParse { line, message: "key outside any section".into() })?;
        let (key, value) = content.split_once('=').ok_or(Error::ConfigParse { line, message: format!("expected `key = value`, got `{content}`") })?;
        let key = key.trim();
        let keys = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or_default();
        if !keys.contains(&key) {
            return Err(Error::ConfigParse { line, message: format!("unknown key `{key}` in [{section}]") });
        }
        let entries = sections.get_mut(section).expect("section registered");
        if entries.map.insert(key.to_string(), (value.trim().to_string(), line)).is_some() {
            return Err(Error::ConfigParse { line, message: format!("duplicate key `{key}` in [{section}]") });
        }
    }
    if !any {
        return Err(Error::ConfigParse { line: 1, message: "configuration file is empty".into() });
    }

    let mut cfg = LinkConfig::default();
    let mut sec = |name: &str| -> Entries { sections.remove(name).unwrap_or(Entries { map: BTreeMap::new() }) };

    let mut g = sec("grid");
    g.set("channels", &mut cfg.grid.channel_count)?;
    g.scaled("start_thz", &mut cfg.grid.start_hz, 1e12)?;
    g.scaled("spacing_ghz", &mut cfg.grid.spacing_hz, 1e9)?;

    let mut m = sec("modem");
    m.scaled("bit_rate_gbps", &mut cfg.bit_rate_hz, 1e9)?;
    m.set("qam_order", &mut cfg.qam_order)?;
    m.set("rolloff", &mut cfg.rolloff)?;
    m.set("span_symbols", &mut cfg.span_symbols)?;
    m.set("samples_per_symbol", &mut cfg.samples_per_symbol)?;
    m.scaled("rf_ghz", &mut cfg.rf_hz, 1e9)?;
    m.set("modulation_index", &mut cfg.modulation_index)?;
    if let Some((v, line)) = m.raw("prbs") {
        cfg.prbs = match v.trim_start_matches("prbs").trim_start_matches("PRBS") {
            "7" => PrbsPolynomial::Prbs7,
            "15" => PrbsPolynomial::Prbs15,
            "23" => PrbsPolynomial::Prbs23,
            _ => return Err(Error::ConfigParse { line, message: format!("prbs: expected 7, 15 or 23, got `{v}`") }),
        };
    }

    let mut l = sec("laser");
    l.set("power_dbm", &mut cfg.laser_power_dbm)?;
    l.set("linewidth_hz", &mut cfg.laser_linewidth_hz)?;

    let mut z = sec("mzm");
    z.set("v_pi", &mut cfg.mzm.v_pi)?;
    // bias follows v_pi to quadrature unless given
    cfg.mzm.bias_v = cfg.mzm.v_pi / 2.0;
    z.set("bias_v", &mut cfg.mzm.bias_v)?;
    z.set("insertion_loss_db", &mut cfg.mzm.insertion_loss_db)?;
    z.set("extinction_ratio_db", &mut cfg.mzm.extinction_ratio_db)?;

    let mut f = sec("fiber");
    f.set("alpha_db_per_km", &mut cfg.fiber.alpha_db_per_km)?;
    let d = f.raw("dispersion_ps_per_nm_km");
    let b2 = f.raw("beta2_ps2_per_km");
    match (d, b2) {
        (Some(_), Some((_, line))) => {
            return Err(Error::ConfigParse { line, message: "give either dispersion_ps_per_nm_km or beta2_ps2_per_km, not both".into() })
        }
        (Some((v, line)), None) => {
            let d: f64 = v.parse().map_err(|e| Error::ConfigParse { line, message: format!("dispersion_ps_per_nm_km: {e}") })?;
            cfg.fiber.beta2_ps2_per_km = dispersion_to_beta2(d, 1550e-9);
        }
        (None, Some((v, line))) => {
            cfg.fiber.beta2_ps2_per_km = v.parse().map_err(|e| Error::ConfigParse { line, message: format!("beta2_ps2_per_km: {e}") })?;
        }
        (None, None) => {}
    }
    f.set("beta3_ps3_per_km", &mut cfg.fiber.beta3_ps3_per_km)?;
    f.set("gamma_per_w_km", &mut cfg.fiber.gamma_per_w_km)?;
    f.set("span_km", &mut cfg.span_km)?;
    f.set("dispersion_compensation", &mut cfg.dispersion_compensation)?;

    let mut s = sec("ssfm");
    s.set("max_step_km", &mut cfg.ssfm.max_step_km)?;
    s.set("max_nl_phase_rad", &mut cfg.ssfm.max_nl_phase_rad)?;
    s.set("strict", &mut cfg.ssfm.strict)?;

    sec("edfa").set("noise_figure_db", &mut cfg.edfa_noise_figure_db)?;

    let mut o = sec("soa");
    o.set("small_signal_gain_db", &mut cfg.soa.small_signal_gain_db)?;
    o.scaled("saturation_energy_pj", &mut cfg.soa.saturation_energy_j, 1e-12)?;
    o.scaled("carrier_lifetime_ps", &mut cfg.soa.carrier_lifetime_s, 1e-12)?;
    o.set("linewidth_enhancement", &mut cfg.soa.linewidth_enhancement)?;

    let mut p = sec("pin");
    p.set("responsivity_a_per_w", &mut cfg.pin.responsivity_a_per_w)?;
    p.scaled("thermal_noise_pa_per_sqrt_hz", &mut cfg.pin.thermal_noise_a_per_sqrt_hz, 1e-12)?;
    p.scaled("dark_current_na", &mut cfg.pin.dark_current_a, 1e-9)?;
    p.set("shot_noise", &mut cfg.pin.shot_noise_enabled)?;

    let mut x = sec("demux");
    x.scaled("bandwidth_ghz", &mut cfg.demux_bandwidth_hz, 1e9)?;
    x.set("order", &mut cfg.demux_order)?;

    let mut r = sec("simulation");
    if let Some((v, line)) = r.raw("scenarios") {
        cfg.scenarios = parse_list::<Mitigation>("scenarios", &v, line)?;
        cfg.scenarios.sort();
        cfg.scenarios.dedup();
    }
    if let Some((v, line)) = r.raw("distances_km") {
        cfg.distances_km = parse_list("distances_km", &v, line)?;
    }
    r.set("symbols_per_run", &mut cfg.symbols_per_run)?;
    if let Some(seed) = r.take::<u64>("seed")? {
        cfg.master_seed = RngSeed(seed);
    }
    r.set("electrical_oversampling", &mut cfg.electrical_oversampling)?;
    r.set("optical_oversampling", &mut cfg.optical_oversampling)?;
    r.scaled("spectrum_rbw_ghz", &mut cfg.spectrum_rbw_hz, 1e9)?;
    r.set("eye_traces", &mut cfg.eye_traces)?;
    r.set("constellation_symbols", &mut cfg.constellation_symbols)?;
    r.set("strict_paper", &mut cfg.strict_paper)?;

    if let Some((v, line)) = sec("link").raw("plan") {
        cfg.link = Some(parse_plan(&v, line, &cfg)?);
    }

    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<LinkConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_parses() {
        let cfg = parse_config(DEFAULT_CONFIG).unwrap();
        assert_eq!(cfg.grid.channel_count, 16);
        assert!((cfg.grid.start_hz - 193.414e12).abs() < 1.0);
        assert!((cfg.grid.spacing_hz - 100e9).abs() < 1e-3);
    }

    #[test]
    fn render_round_trips() {
        let cfg = parse_config(DEFAULT_CONFIG).unwrap();
        assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn empty_file_is_parse_error() {
        assert!(matches!(parse_config(""), Err(Error::ConfigParse { .. })));
        assert!(matches!(parse_config("# nothing\n\n"), Err(Error::ConfigParse { .. })));
    }

    #[test]
    fn unknown_key_reports_line() {
        match parse_config("[grid]\nchannels = 16\ncolour = blue\n") {
            Err(Error::ConfigParse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("[nope]\n"), Err(Error::ConfigParse { line: 1, .. })));
    }

    #[test]
    fn invariant_reports_path() {
        match parse_config("[simulation]\nsymbols_per_run = 100\n") {
            Err(Error::ConfigField { path, .. }) => assert_eq!(path, "simulation.symbols_per_run"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strict_mode_limits_spacing() {
        let text = "[grid]\nspacing_ghz = 150\n[simulation]\nstrict_paper = true\n";
        match parse_config(text) {
            Err(Error::ConfigField { path, .. }) => assert_eq!(path, "grid.spacing_ghz"),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("[grid]\nspacing_ghz = 150\n[simulation]\noptical_oversampling = 200\n").is_ok());
    }

    #[test]
    fn explicit_plan() {
        let cfg = parse_config("[link]\nplan = fiber 80; dcm 80; edfa 16; soa\n").unwrap();
        let plan = cfg.link.unwrap();
        assert_eq!(plan.len(), 4);
        assert_eq!(plan[3].kind(), "soa");
        assert!(parse_config("[link]\nplan = fiber\n").is_err());
        assert!(parse_config("[link]\nplan = laser 3\n").is_err());
    }
}
