//! Simulation driver: propagates every body over the epoch grid, evaluates
//! each link, folds lock states and computes navigation metrics per subset.
//!
//! Epochs are evaluated independently in parallel and collected in grid
//! order, so results do not depend on the worker count.

use nalgebra::Vector3;
use rayon::prelude::*;

use super::config::{ScenarioConfig, UNION_SUBSET};
use super::ScenarioError;
use crate::geometry::{doppler, doppler_rate, line_of_sight, LosGeometry};
use crate::link::carrier_to_noise_density;
use crate::nav::{dops, geometry_matrix_from_units, position_error_sigma, ErrorModel};
use crate::orbit::{propagate, LocalOrbitalFrame};
use crate::time::EpochTime;
use crate::tracking::{run_series_with_dwell, Cn0Sample, TrackThresholds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    /// `None` while the line of sight is occulted.
    pub cn0_dbhz: Option<f64>,
    pub geometry: LosGeometry,
    pub doppler_hz: f64,
    pub doppler_rate_hz_s: f64,
    /// Receiver-to-transmitter unit vector in the local orbital frame.
    pub unit_local: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLinks {
    pub epoch: EpochTime,
    /// Indexed like [`Simulation::satellites`].
    pub links: Vec<LinkSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteRef {
    pub id: String,
    pub constellation: usize,
}

/// Threshold-independent link table for a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub satellites: Vec<SatelliteRef>,
    pub constellation_names: Vec<String>,
    pub step_s: f64,
    pub epochs: Vec<EpochLinks>,
}

/// Which satellites count as usable at an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    /// Acquisition/tracking hysteresis.
    Hysteresis,
    /// C/N0 at or above the acquisition threshold, no memory.
    AcquisitionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopValues {
    pub gdop: f64,
    pub pdop: f64,
    pub hdop: f64,
    pub vdop: f64,
    pub tdop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavMetrics {
    pub epoch: EpochTime,
    pub visible_count: usize,
    pub dops: Option<DopValues>,
    /// Radial, along-track, cross-track 1-sigma, metres.
    pub sigma_m: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMetrics {
    pub name: String,
    pub metrics: Vec<NavMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub thresholds: TrackThresholds,
    pub visibility: Visibility,
    /// `usable[epoch][satellite]`
    pub usable: Vec<Vec<bool>>,
    pub subsets: Vec<SubsetMetrics>,
}

impl Evaluation {
    pub fn subset(&self, name: &str) -> Option<&SubsetMetrics> {
        self.subsets.iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }
}

fn runtime(epoch: EpochTime, satellite: &str, err: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Runtime { epoch: epoch.to_iso(), satellite: satellite.to_string(), message: err.to_string() }
}

/// Runs the link simulation with the global rayon pool.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation, ScenarioError> {
    let satellites: Vec<SatelliteRef> = cfg
        .constellations
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.satellites.iter().map(move |s| SatelliteRef { id: s.id.clone(), constellation: k }))
        .collect();
    let bodies: Vec<(&crate::orbit::KeplerianElements, usize)> = cfg
        .constellations
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.satellites.iter().map(move |s| (&s.elements, k)))
        .collect();

    let epochs = cfg
        .epochs()
        .into_par_iter()
        .map(|t| -> Result<EpochLinks, ScenarioError> {
            let rx_id = if cfg.receiver.name.is_empty() { "receiver" } else { cfg.receiver.name.as_str() };
            let rx = propagate(&cfg.receiver.elements, t).map_err(|e| runtime(t, rx_id, e))?;
            let frame = LocalOrbitalFrame::from_state(&rx).map_err(|e| runtime(t, rx_id, e))?;
            let mut links = Vec::with_capacity(bodies.len());
            for (i, (elements, k)) in bodies.iter().enumerate() {
                let id = &satellites[i].id;
                let constellation = &cfg.constellations[*k];
                let tx = propagate(elements, t).map_err(|e| runtime(t, id, e))?;
                let geometry = line_of_sight(&rx, &tx, cfg.mask_altitude_km).map_err(|e| runtime(t, id, e))?;
                let cn0_dbhz = if geometry.occluded {
                    None
                } else {
                    Some(
                        carrier_to_noise_density(
                            &constellation.link,
                            &constellation.band,
                            geometry.tx_off_boresight,
                            geometry.rx_off_boresight,
                            geometry.range,
                        )
                        .map_err(|e| runtime(t, id, e))?,
                    )
                };
                let doppler_hz = doppler(&rx, &tx, &constellation.band).map_err(|e| runtime(t, id, e))?;
                let doppler_rate_hz_s =
                    doppler_rate(&cfg.receiver.elements, elements, &constellation.band, t, cfg.doppler_rate_dt_s)
                        .map_err(|e| runtime(t, id, e))?;
                let unit_local = frame.to_local(&(tx.position - rx.position).normalize());
                links.push(LinkSample { cn0_dbhz, geometry, doppler_hz, doppler_rate_hz_s, unit_local });
            }
            Ok(EpochLinks { epoch: t, links })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Simulation {
        satellites,
        constellation_names: cfg.constellations.iter().map(|c| c.name.clone()).collect(),
        step_s: cfg.step_s,
        epochs,
    })
}

/// Runs [`simulate`] on a dedicated pool with `threads` workers.
pub fn simulate_with_threads(cfg: &ScenarioConfig, threads: usize) -> Result<Simulation, ScenarioError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| ScenarioError::Runtime { epoch: String::new(), satellite: String::new(), message: e.to_string() })?;
    pool.install(|| simulate(cfg))
}

impl Simulation {
    pub fn subset_names(&self) -> Vec<String> {
        let mut names = self.constellation_names.clone();
        names.push(UNION_SUBSET.to_string());
        names
    }

    /// Usable flags per epoch and satellite for one visibility rule.
    pub fn usable(
        &self,
        thresholds: &TrackThresholds,
        min_dwell_s: f64,
        visibility: Visibility,
    ) -> Result<Vec<Vec<bool>>, ScenarioError> {
        thresholds.validate().map_err(|e| ScenarioError::Validation { field: "thresholds".into(), constraint: e.to_string() })?;
        let per_sat: Vec<Vec<bool>> = (0..self.satellites.len())
            .into_par_iter()
            .map(|i| -> Result<Vec<bool>, ScenarioError> {
                match visibility {
                    Visibility::AcquisitionOnly => Ok(self
                        .epochs
                        .iter()
                        .map(|e| e.links[i].cn0_dbhz.is_some_and(|c| c >= thresholds.acquisition))
                        .collect()),
                    Visibility::Hysteresis => {
                        let series: Vec<Cn0Sample> = self
                            .epochs
                            .iter()
                            .map(|e| Cn0Sample {
                                epoch: e.epoch,
                                cn0: e.links[i].cn0_dbhz,
                                occluded: e.links[i].geometry.occluded,
                            })
                            .collect();
                        let states = run_series_with_dwell(&series, thresholds, min_dwell_s)
                            .map_err(|e| runtime(EpochTime::J2000, &self.satellites[i].id, e))?;
                        Ok(states.iter().map(|s| s.is_tracked()).collect())
                    }
                }
            })
            .collect::<Result<_, _>>()?;
        Ok((0..self.epochs.len()).map(|k| per_sat.iter().map(|s| s[k]).collect()).collect())
    }

    /// Folds lock states and computes per-subset navigation metrics.
    pub fn evaluate(
        &self,
        thresholds: &TrackThresholds,
        min_dwell_s: f64,
        visibility: Visibility,
        error_model: &ErrorModel,
    ) -> Result<Evaluation, ScenarioError> {
        let usable = self.usable(thresholds, min_dwell_s, visibility)?;
        let n_subsets = self.constellation_names.len() + 1;
        let per_epoch: Vec<Vec<NavMetrics>> = self
            .epochs
            .par_iter()
            .zip(usable.par_iter())
            .map(|(ep, flags)| {
                (0..n_subsets)
                    .map(|subset| {
                        let units: Vec<Vector3<f64>> = self
                            .satellites
                            .iter()
                            .enumerate()
                            .filter(|(i, s)| flags[*i] && (subset == n_subsets - 1 || s.constellation == subset))
                            .map(|(i, _)| ep.links[i].unit_local)
                            .collect();
                        epoch_metrics(ep.epoch, &units, error_model)
                    })
                    .collect()
            })
            .collect();

        let names = self.subset_names();
        let subsets = names
            .into_iter()
            .enumerate()
            .map(|(k, name)| SubsetMetrics { name, metrics: per_epoch.iter().map(|m| m[k]).collect() })
            .collect();
        Ok(Evaluation { thresholds: *thresholds, visibility, usable, subsets })
    }
}

fn epoch_metrics(epoch: EpochTime, units: &[Vector3<f64>], error_model: &ErrorModel) -> NavMetrics {
    let mut out = NavMetrics { epoch, visible_count: units.len(), dops: None, sigma_m: None };
    if units.len() < 4 {
        return out;
    }
    if let Ok(Some(d)) = dops(&geometry_matrix_from_units(units)) {
        out.dops = Some(DopValues { gdop: d.gdop, pdop: d.pdop, hdop: d.hdop, vdop: d.vdop, tdop: d.tdop });
        out.sigma_m = position_error_sigma(&d.cofactor, error_model).ok();
    }
    out
}
