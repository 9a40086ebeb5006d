//! Per-channel quality records and their CSV form.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::units::decimal;

use super::quality::{ber_from_evm, q_from_ber, BerCount};

/// Counted BERs need at least this many errors to be reported.
pub const MIN_COUNTED_ERRORS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerSource {
    Counted,
    Estimated,
}

impl fmt::Display for BerSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BerSource::Counted => "counted",
            BerSource::Estimated => "estimated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics {
    pub scenario: String,
    pub distance_km: f64,
    pub channel: usize,
    pub freq_thz: f64,
    pub evm_percent: f64,
    /// Absent when no bit errors were observed.
    pub ber_counted: Option<f64>,
    pub ber_estimated: f64,
    /// The BER carried into tables: counted with enough errors, else estimated.
    pub ber: f64,
    pub ber_source: BerSource,
    /// `q_from_ber(ber)`; infinite when the reported BER is zero.
    pub q_factor: f64,
    pub harmonic_db: f64,
}

impl ChannelMetrics {
    /// Applies the reporting rule to one channel's measurements.
    pub fn from_measurements(
        scenario: &str,
        distance_km: f64,
        channel: usize,
        freq_thz: f64,
        evm_percent: f64,
        count: &BerCount,
        order: usize,
        harmonic_db: f64,
    ) -> Result<Self> {
        let ber_estimated = ber_from_evm(evm_percent, order)?;
        let (ber, ber_source) = if count.errors >= MIN_COUNTED_ERRORS {
            (count.ber, BerSource::Counted)
        } else {
            (ber_estimated, BerSource::Estimated)
        };
        let q_factor = if ber > 0.0 { q_from_ber(ber.min(0.5))? } else { f64::INFINITY };
        Ok(Self {
            scenario: scenario.to_string(),
            distance_km,
            channel,
            freq_thz,
            evm_percent,
            ber_counted: count.resolvable.then_some(count.ber),
            ber_estimated,
            ber,
            ber_source,
            q_factor,
            harmonic_db,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub channels: Vec<ChannelMetrics>,
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        x.to_string()
    }
}

impl MetricsReport {
    pub fn mean_evm_percent(&self) -> f64 {
        mean(self.channels.iter().map(|c| c.evm_percent))
    }

    pub fn mean_ber(&self) -> f64 {
        mean(self.channels.iter().map(|c| c.ber))
    }

    /// Q of the mean BER, the usual way to aggregate over channels.
    pub fn mean_q_factor(&self) -> f64 {
        let b = self.mean_ber();
        if b > 0.0 {
            q_from_ber(b.min(0.5)).unwrap_or(f64::NAN)
        } else {
            f64::INFINITY
        }
    }

    pub fn mean_harmonic_db(&self) -> f64 {
        mean(self.channels.iter().map(|c| c.harmonic_db))
    }

    /// Rows matching one (scenario, distance) point.
    pub fn point(&self, scenario: &str, distance_km: f64) -> MetricsReport {
        MetricsReport {
            channels: self.channels.iter().filter(|c| c.scenario == scenario && c.distance_km == distance_km).cloned().collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario", "distance_km", "channel", "freq_thz", "evm_percent", "ber", "ber_source", "q_factor", "harmonic_db"])?;
        for c in &self.channels {
            w.write_record([
                c.scenario.clone(),
                decimal(c.distance_km, 6),
                c.channel.to_string(),
                format!("{:.6}", c.freq_thz),
                format!("{:.6}", c.evm_percent),
                sci(c.ber),
                c.ber_source.to_string(),
                format!("{:.6}", c.q_factor),
                format!("{:.4}", c.harmonic_db),
            ])?;
        }
        w.flush().map_err(|e| Error::io("metrics", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(errors: usize) -> BerCount {
        BerCount { errors, bits: 10_000, ber: errors as f64 / 1e4, resolvable: errors > 0, polarity_inverted: false }
    }

    #[test]
    fn counted_only_with_enough_errors() {
        let few = ChannelMetrics::from_measurements("scro", 50.0, 0, 193.414, 20.0, &count(3), 128, -30.0).unwrap();
        assert_eq!(few.ber_source, BerSource::Estimated);
        assert_eq!(few.ber_counted, Some(3e-4));
        let many = ChannelMetrics::from_measurements("scro", 50.0, 0, 193.414, 20.0, &count(40), 128, -30.0).unwrap();
        assert_eq!(many.ber_source, BerSource::Counted);
        assert_eq!(many.ber, 4e-3);
        assert!((many.q_factor - q_from_ber(4e-3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_evm_gives_infinite_q() {
        let m = ChannelMetrics::from_measurements("soa", 0.0, 1, 193.5, 0.0, &count(0), 16, -80.0).unwrap();
        assert_eq!(m.ber, 0.0);
        assert!(m.q_factor.is_infinite());
        assert_eq!(m.ber_counted, None);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        MetricsReport::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), "scenario,distance_km,channel,freq_thz,evm_percent,ber,ber_source,q_factor,harmonic_db");
    }
}
