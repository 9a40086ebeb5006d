//! Ordered link plans: fiber spans, amplifiers and dispersion compensation.

use std::io::Write;

use crate::error::{Error, Result};
use crate::signal::{mean_power, ComplexEnvelope, RngSeed};
use crate::units::watts_to_dbm;

use super::amplifier::{edfa_amplify, soa_amplify, EdfaParams, SoaParams};
use super::fiber::{apply_dispersion, propagate_ssfm_stats, FiberParams, SsfmConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkElement {
    Fiber(FiberParams),
    Edfa(EdfaParams),
    Soa(SoaParams),
    /// Ideal lossless dispersion compensator; removes the given accumulated
    /// dispersion (ps^2, ps^3).
    Dcm { beta2_ps2: f64, beta3_ps3: f64 },
}

impl LinkElement {
    pub fn kind(&self) -> &'static str {
        match self {
            LinkElement::Fiber(_) => "fiber",
            LinkElement::Edfa(_) => "edfa",
            LinkElement::Soa(_) => "soa",
            LinkElement::Dcm { .. } => "dcm",
        }
    }

    /// Compensator matched to a fiber span.
    pub fn dcm_for(fiber: &FiberParams) -> Self {
        LinkElement::Dcm {
            beta2_ps2: fiber.beta2_ps2_per_km * fiber.length_km,
            beta3_ps3: fiber.beta3_ps3_per_km * fiber.length_km,
        }
    }

    pub fn length_km(&self) -> f64 {
        match self {
            LinkElement::Fiber(f) => f.length_km,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLogEntry {
    pub element_index: usize,
    pub element_type: &'static str,
    pub input_dbm: f64,
    pub output_dbm: f64,
}

#[derive(Debug, Clone)]
pub struct LinkOutput {
    pub envelope: ComplexEnvelope,
    pub power_log: Vec<PowerLogEntry>,
    pub ssfm_steps: u64,
}

/// Runs `env` through `plan` in order. EDFA `i` draws its ASE from
/// `seed.derive("edfa", i)`.
pub fn link_propagate(env: &ComplexEnvelope, plan: &[LinkElement], ssfm: &SsfmConfig, seed: RngSeed) -> Result<LinkOutput> {
    link_propagate_from(env, plan, 0, ssfm, seed)
}

/// Like [`link_propagate`] for a plan fragment whose first element sits at
/// `first_index` of a longer plan. Running a plan in pieces this way gives the
/// same field as running it whole.
pub fn link_propagate_from(
    env: &ComplexEnvelope,
    plan: &[LinkElement],
    first_index: usize,
    ssfm: &SsfmConfig,
    seed: RngSeed,
) -> Result<LinkOutput> {
    let mut field = env.clone();
    let mut log = Vec::with_capacity(plan.len());
    let mut steps = 0;
    for (offset, element) in plan.iter().enumerate() {
        let index = first_index + offset;
        let wrap = |e: Error| Error::Element { index, kind: element.kind(), source: Box::new(e) };
        let input_dbm = watts_to_dbm(mean_power(&field));
        field = match element {
            LinkElement::Fiber(f) => {
                let (out, stats) = propagate_ssfm_stats(&field, f, ssfm).map_err(wrap)?;
                steps += stats.steps;
                out
            }
            LinkElement::Edfa(p) => edfa_amplify(&field, p, seed.derive("edfa", index as u64)).map_err(wrap)?,
            LinkElement::Soa(p) => soa_amplify(&field, p).map_err(wrap)?,
            LinkElement::Dcm { beta2_ps2, beta3_ps3 } => apply_dispersion(&field, -beta2_ps2, -beta3_ps3),
        };
        log.push(PowerLogEntry {
            element_index: index,
            element_type: element.kind(),
            input_dbm,
            output_dbm: watts_to_dbm(mean_power(&field)),
        });
    }
    Ok(LinkOutput { envelope: field, power_log: log, ssfm_steps: steps })
}

/// Spans of at most `span_km` covering `distance_km`, each followed by an EDFA
/// restoring the span loss and, optionally, a matched compensator.
pub fn span_plan(distance_km: f64, span_km: f64, fiber: &FiberParams, edfa: &EdfaParams, compensate: bool) -> Result<Vec<LinkElement>> {
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        return Err(Error::invalid("distance_km", "must be non-negative"));
    }
    if !(span_km > 0.0) {
        return Err(Error::invalid("span_km", "must be positive"));
    }
    let mut plan = Vec::new();
    let mut left = distance_km;
    while left > 1e-9 {
        let len = left.min(span_km);
        let f = fiber.with_length(len);
        plan.push(LinkElement::Fiber(f));
        if compensate {
            plan.push(LinkElement::dcm_for(&f));
        }
        plan.push(LinkElement::Edfa(EdfaParams { gain_db: f.loss_db(), ..*edfa }));
        left -= len;
    }
    Ok(plan)
}

pub fn write_power_log_csv<W: Write>(log: &[PowerLogEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["element_index", "element_type", "input_dbm", "output_dbm"])?;
    for e in log {
        w.write_record([
            e.element_index.to_string(),
            e.element_type.to_string(),
            format!("{:.6}", e.input_dbm),
            format!("{:.6}", e.output_dbm),
        ])?;
    }
    w.flush().map_err(|e| Error::io("power log", e))?;
    Ok(())
}
