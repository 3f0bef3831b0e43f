//! Acquisition-threshold sweeps.

use serde::Serialize;

use super::config::ScenarioConfig;
use super::engine::{Simulation, Visibility};
use super::report::{summarize_subset, SubsetSummary};
use super::ScenarioError;
use crate::tracking::TrackThresholds;

/// Inclusive `lo:hi:step` range in dB-Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

pub fn parse_sweep(text: &str) -> Result<SweepRange, ScenarioError> {
    let bad = |c: &str| ScenarioError::Validation { field: "sweep-threshold".into(), constraint: c.into() };
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(bad("expected lo:hi:step"));
    };
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    let (Some(lo), Some(hi), Some(step)) = (num(lo), num(hi), num(step)) else {
        return Err(bad("lo, hi and step must be numbers"));
    };
    if !(step > 0.0) || hi < lo {
        return Err(bad("need step > 0 and hi >= lo"));
    }
    Ok(SweepRange { lo, hi, step })
}

/// One acquisition threshold with per-subset summaries for both visibility rules.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub acquisition_dbhz: f64,
    pub tracking_dbhz: f64,
    pub hysteresis: Vec<SubsetSummary>,
    pub acquisition_only: Vec<SubsetSummary>,
}

/// Evaluates the run at each acquisition threshold, keeping the scenario's
/// acquisition-to-tracking gap.
pub fn sweep(cfg: &ScenarioConfig, sim: &Simulation, range: &SweepRange) -> Result<Vec<SweepRow>, ScenarioError> {
    let gap = cfg.thresholds.acquisition - cfg.thresholds.tracking;
    range
        .values()
        .into_iter()
        .map(|acq| {
            let th = TrackThresholds { acquisition: acq, tracking: acq - gap };
            let mut row = SweepRow { acquisition_dbhz: acq, tracking_dbhz: acq - gap, hysteresis: vec![], acquisition_only: vec![] };
            for vis in [Visibility::Hysteresis, Visibility::AcquisitionOnly] {
                let eval = sim.evaluate(&th, cfg.min_dwell_s, vis, &cfg.error_model)?;
                let rows: Vec<SubsetSummary> =
                    eval.subsets.iter().map(|s| summarize_subset(s, sim.step_s, vis)).collect();
                match vis {
                    Visibility::Hysteresis => row.hysteresis = rows,
                    Visibility::AcquisitionOnly => row.acquisition_only = rows,
                }
            }
            Ok(row)
        })
        .collect()
}
