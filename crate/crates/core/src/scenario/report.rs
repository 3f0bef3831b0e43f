//! Run driver and summary report.
//!
//! Summary statistics are computed from values as they appear in the CSVs
//! (six significant digits), so a reader of the CSVs recovers them exactly.

use std::collections::BTreeMap;
use std::path::Path;

use log::info;
use serde::Serialize;

use super::config::{ScenarioConfig, UNION_SUBSET};
use super::engine::{simulate, simulate_with_threads, Evaluation, Simulation, SubsetMetrics, Visibility};
use super::output::{quantize, render_timeseries, sha256_hex, write_files, DopplerHistogram, FileSet};
use super::ScenarioError;
use crate::nav::{availability, geometry_matrix_from_units, mean_defined, monte_carlo_position_sigma, percentile};

/// Minimum tracked satellites for a navigation solution.
pub const MIN_SATS: usize = 4;

/// Epochs sampled for the Monte Carlo cross-check.
const MONTE_CARLO_EPOCHS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetSummary {
    pub name: String,
    pub visibility: Visibility,
    pub epochs: usize,
    pub available_epochs: usize,
    pub availability_fraction: f64,
    pub availability_time_s: f64,
    /// Epochs with defined DOPs.
    pub defined_epochs: usize,
    /// Epochs without DOPs, whatever the cause.
    pub undefined_epochs: usize,
    /// Epochs with at least four satellites but an ill-conditioned geometry.
    pub ill_conditioned_epochs: usize,
    pub mean_gdop: Option<f64>,
    pub gdop_95: Option<f64>,
    pub pdop_95: Option<f64>,
    pub vertical_95_m: Option<f64>,
    pub horizontal_95_m: Option<f64>,
    pub spherical_95_m: Option<f64>,
}

fn p95(series: &[Option<f64>]) -> Option<f64> {
    percentile(series, 95.0).ok().map(|p| p.value)
}

/// Per-epoch radial, horizontal and spherical sigma from CSV values.
pub fn error_components(sigma: [f64; 3]) -> (f64, f64, f64) {
    let [r, a, c] = sigma;
    (r.abs(), a.hypot(c), (r * r + a * a + c * c).sqrt())
}

/// Summary of one subset's metrics, from six-digit values.
pub fn summarize_subset(subset: &SubsetMetrics, step_s: f64, visibility: Visibility) -> SubsetSummary {
    let rows = &subset.metrics;
    let counts: Vec<usize> = rows.iter().map(|r| r.visible_count).collect();
    let avail = availability(&counts, step_s, MIN_SATS).unwrap_or(crate::nav::Availability { fraction: 0.0, total_time_s: 0.0 });
    let gdop: Vec<Option<f64>> = rows.iter().map(|r| r.dops.map(|d| quantize(d.gdop))).collect();
    let pdop: Vec<Option<f64>> = rows.iter().map(|r| r.dops.map(|d| quantize(d.pdop))).collect();
    let comps: Vec<Option<(f64, f64, f64)>> =
        rows.iter().map(|r| r.sigma_m.map(|s| error_components(s.map(quantize)))).collect();
    let defined = gdop.iter().filter(|g| g.is_some()).count();
    SubsetSummary {
        name: subset.name.clone(),
        visibility,
        epochs: rows.len(),
        available_epochs: counts.iter().filter(|&&c| c >= MIN_SATS).count(),
        availability_fraction: avail.fraction,
        availability_time_s: avail.total_time_s,
        defined_epochs: defined,
        undefined_epochs: rows.len() - defined,
        ill_conditioned_epochs: rows.iter().filter(|r| r.visible_count >= MIN_SATS && r.dops.is_none()).count(),
        mean_gdop: mean_defined(&gdop),
        gdop_95: p95(&gdop),
        pdop_95: p95(&pdop),
        vertical_95_m: p95(&comps.iter().map(|c| c.map(|c| c.0)).collect::<Vec<_>>()),
        horizontal_95_m: p95(&comps.iter().map(|c| c.map(|c| c.1)).collect::<Vec<_>>()),
        spherical_95_m: p95(&comps.iter().map(|c| c.map(|c| c.2)).collect::<Vec<_>>()),
    }
}

/// Doppler statistics over tracked links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DopplerSummary {
    pub tracked_links: usize,
    pub min_hz: Option<f64>,
    pub max_hz: Option<f64>,
    pub abs_95_hz: Option<f64>,
    pub max_abs_rate_hz_s: Option<f64>,
    pub histogram_bin_width_hz: f64,
    pub histogram_span_hz: f64,
    pub histogram_out_of_range: u64,
}

/// UERE that would reproduce a reference spherical 95% error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub reference_spherical_95_m: f64,
    /// 95th percentile of union PDOP, the spherical error per metre of UERE.
    pub union_pdop_95: f64,
    pub equivalent_uere_m: f64,
}

/// Analytic versus sampled least-squares error on a few union epochs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloCheck {
    pub trials: usize,
    pub seed: u64,
    pub epochs_checked: usize,
    pub max_relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEcho {
    pub acquisition_dbhz: f64,
    pub tracking_dbhz: f64,
    pub min_dwell_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub content_hash: String,
    pub epochs_simulated: usize,
    pub step_s: f64,
    pub satellites: usize,
    pub thresholds: ThresholdEcho,
    pub uere_m: f64,
    /// Hysteresis-tracked sets.
    pub subsets: Vec<SubsetSummary>,
    /// Sets of satellites at or above the acquisition threshold.
    pub acquisition_only: Vec<SubsetSummary>,
    pub doppler: DopplerSummary,
    pub calibration: Option<Calibration>,
    pub monte_carlo: Option<MonteCarloCheck>,
    pub config_echo: String,
    /// SHA-256 of every emitted file except the report itself.
    pub files: BTreeMap<String, String>,
}

impl RunReport {
    pub fn subset(&self, name: &str) -> Option<&SubsetSummary> {
        self.subsets.iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn acquisition_only_subset(&self, name: &str) -> Option<&SubsetSummary> {
        self.acquisition_only.iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }
}

/// Everything a run produced, held in memory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub simulation: Simulation,
    pub hysteresis: Evaluation,
    pub acquisition_only: Evaluation,
    pub files: FileSet,
}

impl RunOutcome {
    /// Writes all files, including `report.json`, into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), ScenarioError> {
        write_files(dir, &self.files)
    }
}

/// Runs the scenario and writes its outputs to the configured directory.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutcome, ScenarioError> {
    let out = run_with_threads(cfg, None)?;
    out.write_to(&cfg.output_dir)?;
    info!("wrote {} files to {}", out.files.len(), cfg.output_dir.display());
    Ok(out)
}

/// Runs the scenario in memory; `threads` selects a dedicated pool size.
pub fn run_with_threads(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<RunOutcome, ScenarioError> {
    let simulation = match threads {
        Some(n) => simulate_with_threads(cfg, n)?,
        None => simulate(cfg)?,
    };
    info!("simulated {} epochs x {} satellites", simulation.epochs.len(), simulation.satellites.len());
    let hysteresis = simulation.evaluate(&cfg.thresholds, cfg.min_dwell_s, Visibility::Hysteresis, &cfg.error_model)?;
    let acquisition_only =
        simulation.evaluate(&cfg.thresholds, cfg.min_dwell_s, Visibility::AcquisitionOnly, &cfg.error_model)?;

    let mut dopplers = Vec::new();
    let mut rates = Vec::new();
    for (ep, flags) in simulation.epochs.iter().zip(&hysteresis.usable) {
        for (link, &tracked) in ep.links.iter().zip(flags) {
            if tracked {
                dopplers.push(quantize(link.doppler_hz));
                rates.push(quantize(link.doppler_rate_hz_s));
            }
        }
    }
    let histogram = DopplerHistogram::new(dopplers.iter().copied(), cfg.histogram.bin_width_hz, cfg.histogram.span_hz);

    let mut files = render_timeseries(&simulation, &hysteresis, &acquisition_only, &histogram)?;
    files.insert("config_echo.toml".into(), cfg.echo.clone().into_bytes());

    let summarize = |eval: &Evaluation, vis| -> Vec<SubsetSummary> {
        eval.subsets.iter().map(|s| summarize_subset(s, simulation.step_s, vis)).collect()
    };
    let subsets = summarize(&hysteresis, Visibility::Hysteresis);
    let acq_subsets = summarize(&acquisition_only, Visibility::AcquisitionOnly);

    let abs: Vec<Option<f64>> = dopplers.iter().map(|d| Some(d.abs())).collect();
    let doppler = DopplerSummary {
        tracked_links: dopplers.len(),
        min_hz: dopplers.iter().copied().reduce(f64::min),
        max_hz: dopplers.iter().copied().reduce(f64::max),
        abs_95_hz: p95(&abs),
        max_abs_rate_hz_s: rates.iter().map(|r| r.abs()).reduce(f64::max),
        histogram_bin_width_hz: cfg.histogram.bin_width_hz,
        histogram_span_hz: cfg.histogram.span_hz,
        histogram_out_of_range: histogram.out_of_range,
    };

    let union = subsets.iter().find(|s| s.name == UNION_SUBSET);
    let calibration = match (cfg.reference_spherical_95_m, union.and_then(|u| u.pdop_95)) {
        (Some(reference), Some(pdop)) if pdop > 0.0 => Some(Calibration {
            reference_spherical_95_m: reference,
            union_pdop_95: pdop,
            equivalent_uere_m: reference / pdop,
        }),
        _ => None,
    };

    let monte_carlo = (cfg.monte_carlo_trials > 0)
        .then(|| monte_carlo_check(cfg, &simulation, &hysteresis))
        .transpose()?;

    let mut report = RunReport {
        scenario: cfg.name.clone(),
        content_hash: cfg.content_hash.clone(),
        epochs_simulated: simulation.epochs.len(),
        step_s: simulation.step_s,
        satellites: simulation.satellites.len(),
        thresholds: ThresholdEcho {
            acquisition_dbhz: cfg.thresholds.acquisition,
            tracking_dbhz: cfg.thresholds.tracking,
            min_dwell_s: cfg.min_dwell_s,
        },
        uere_m: cfg.error_model.uere_sigma_m,
        subsets,
        acquisition_only: acq_subsets,
        doppler,
        calibration,
        monte_carlo,
        config_echo: cfg.echo.clone(),
        files: files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| ScenarioError::Io { path: "report.json".into(), reason: e.to_string() })?;
    files.insert("report.json".into(), (json + "\n").into_bytes());
    // Keep the report's own entry out of its hash table.
    report.files.remove("report.json");

    Ok(RunOutcome { report, simulation, hysteresis, acquisition_only, files })
}

fn monte_carlo_check(
    cfg: &ScenarioConfig,
    sim: &Simulation,
    eval: &Evaluation,
) -> Result<MonteCarloCheck, ScenarioError> {
    let union = eval.subset(UNION_SUBSET).expect("union subset is always present");
    let defined: Vec<usize> = union.metrics.iter().enumerate().filter(|(_, m)| m.sigma_m.is_some()).map(|(k, _)| k).collect();
    let picks: Vec<usize> = if defined.len() <= MONTE_CARLO_EPOCHS {
        defined.clone()
    } else {
        (0..MONTE_CARLO_EPOCHS).map(|j| defined[j * defined.len() / MONTE_CARLO_EPOCHS]).collect()
    };
    let mut worst: f64 = 0.0;
    for (j, &k) in picks.iter().enumerate() {
        let ep = &sim.epochs[k];
        let units: Vec<_> =
            ep.links.iter().zip(&eval.usable[k]).filter(|(_, &u)| u).map(|(l, _)| l.unit_local).collect();
        let h = geometry_matrix_from_units(&units);
        let analytic = union.metrics[k].sigma_m.expect("defined epoch");
        let sampled = monte_carlo_position_sigma(&h, &cfg.error_model, cfg.monte_carlo_trials, cfg.seed.wrapping_add(j as u64))
            .map_err(|e| ScenarioError::Runtime { epoch: ep.epoch.to_iso(), satellite: UNION_SUBSET.into(), message: e.to_string() })?;
        let norm = |s: [f64; 3]| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        worst = worst.max((norm(sampled) / norm(analytic) - 1.0).abs());
    }
    Ok(MonteCarloCheck {
        trials: cfg.monte_carlo_trials,
        seed: cfg.seed,
        epochs_checked: picks.len(),
        max_relative_deviation: worst,
    })
}
