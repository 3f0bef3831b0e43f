//! Scenario files: strict TOML with nested constellation tables.
//!
//! Unknown keys are rejected. Referenced TLE and antenna-pattern files are
//! resolved relative to the scenario file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ScenarioError;
use crate::antenna::{AntennaPattern, ParabolicAntenna};
use crate::link::{CarrierBand, LinkBudgetConfig};
use crate::nav::ErrorModel;
use crate::orbit::{generate_walker, parse_tle, KeplerianElements, WalkerSpec};
use crate::time::EpochTime;
use crate::tracking::TrackThresholds;

/// Name reserved for the all-constellations subset.
pub const UNION_SUBSET: &str = "union";

fn default_step() -> f64 {
    60.0
}
fn default_mask() -> f64 {
    1000.0
}
fn default_rate_dt() -> f64 {
    1.0
}
fn default_output_dir() -> String {
    "output".into()
}
fn default_tx_power() -> f64 {
    14.3
}
fn default_t_sys() -> f64 {
    290.0
}
fn default_half_angle() -> f64 {
    28.0
}
fn default_rx_floor() -> f64 {
    -10.0
}
fn default_uere() -> f64 {
    5.0
}
fn default_bin_width() -> f64 {
    250.0
}
fn default_span() -> f64 {
    12_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub start: String,
    pub duration_s: f64,
    #[serde(default = "default_step")]
    pub step_s: f64,
    #[serde(default = "default_mask")]
    pub mask_altitude_km: f64,
    #[serde(default = "default_rate_dt")]
    pub doppler_rate_dt_s: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub thresholds: ThresholdsFile,
    #[serde(default)]
    pub error_model: ErrorModelFile,
    #[serde(default)]
    pub doppler_histogram: HistogramFile,
    pub receiver: ReceiverFile,
    #[serde(default)]
    pub constellation: Vec<ConstellationFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsFile {
    pub acquisition_dbhz: f64,
    pub tracking_dbhz: f64,
    #[serde(default)]
    pub min_dwell_s: f64,
}

impl Default for ThresholdsFile {
    fn default() -> Self {
        Self { acquisition_dbhz: 29.0, tracking_dbhz: 27.0, min_dwell_s: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModelFile {
    #[serde(default = "default_uere")]
    pub uere_m: f64,
    /// Spherical 95% error to back-solve an equivalent UERE against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_spherical_95_m: Option<f64>,
    /// Monte Carlo trials per sampled epoch; 0 disables the cross-check.
    #[serde(default)]
    pub monte_carlo_trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ErrorModelFile {
    fn default() -> Self {
        Self { uere_m: default_uere(), reference_spherical_95_m: None, monte_carlo_trials: 0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramFile {
    #[serde(default = "default_bin_width")]
    pub bin_width_hz: f64,
    #[serde(default = "default_span")]
    pub span_hz: f64,
}

impl Default for HistogramFile {
    fn default() -> Self {
        Self { bin_width_hz: default_bin_width(), span_hz: default_span() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tle_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<ElementsFile>,
    pub antenna: RxAntennaFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsFile {
    pub semi_major_axis_km: f64,
    #[serde(default)]
    pub eccentricity: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    #[serde(default)]
    pub arg_perigee_deg: f64,
    #[serde(default)]
    pub mean_anomaly_deg: f64,
    /// Defaults to the scenario start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RxAntennaFile {
    Parabolic {
        diameter_m: f64,
        efficiency: f64,
        #[serde(default = "default_half_angle")]
        half_power_half_angle_deg: f64,
        #[serde(default = "default_rx_floor")]
        floor_dbi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        boresight_gain_dbi: Option<f64>,
    },
    Table {
        pattern_file: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationFile {
    pub name: String,
    pub band: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walker: Option<WalkerFile>,
    pub link: LinkFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkerFile {
    pub total: u32,
    pub planes: u32,
    pub phasing: u32,
    pub semi_major_axis_km: f64,
    pub inclination_deg: f64,
    #[serde(default)]
    pub raan_offset_deg: f64,
    #[serde(default)]
    pub anomaly_offset_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    pub tx_pattern_file: String,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbw: f64,
    #[serde(default)]
    pub tx_margin_db: f64,
    #[serde(default = "default_t_sys")]
    pub system_noise_temperature_k: f64,
    #[serde(default)]
    pub fixed_loss_db: f64,
}

/// Receive antenna model; parabolic patterns are sampled per carrier.
#[derive(Debug, Clone, PartialEq)]
pub enum RxAntenna {
    Parabolic(ParabolicAntenna),
    Table(AntennaPattern),
}

impl RxAntenna {
    pub fn pattern(&self, band: &CarrierBand) -> Result<AntennaPattern, crate::antenna::AntennaError> {
        match self {
            RxAntenna::Parabolic(p) => p.pattern(band.frequency_mhz),
            RxAntenna::Table(t) => Ok(t.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub name: String,
    pub elements: KeplerianElements,
    pub antenna: RxAntenna,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Satellite {
    pub id: String,
    pub elements: KeplerianElements,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub name: String,
    pub band: CarrierBand,
    pub satellites: Vec<Satellite>,
    pub link: LinkBudgetConfig,
    /// Transmit pattern file as declared in the scenario.
    pub tx_pattern_source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerHistogramSpec {
    pub bin_width_hz: f64,
    pub span_hz: f64,
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub start: EpochTime,
    pub duration_s: f64,
    pub step_s: f64,
    pub mask_altitude_km: f64,
    pub doppler_rate_dt_s: f64,
    pub receiver: Receiver,
    pub constellations: Vec<Constellation>,
    pub thresholds: TrackThresholds,
    pub min_dwell_s: f64,
    pub error_model: ErrorModel,
    pub reference_spherical_95_m: Option<f64>,
    pub monte_carlo_trials: usize,
    pub seed: u64,
    pub histogram: DopplerHistogramSpec,
    pub output_dir: PathBuf,
    /// Normalized scenario with defaults applied.
    pub echo: String,
    /// SHA-256 over the echo and every referenced input file.
    pub content_hash: String,
    /// The parsed file, kept so callers can derive variants.
    pub file: ScenarioFile,
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    /// Epoch grid `start + k·step` for `k < floor(duration/step)`.
    pub fn epochs(&self) -> Vec<EpochTime> {
        let n = ((self.duration_s / self.step_s) + 1e-9).floor().max(1.0) as usize;
        (0..n).map(|k| self.start + k as f64 * self.step_s).collect()
    }

    pub fn satellite_count(&self) -> usize {
        self.constellations.iter().map(|c| c.satellites.len()).sum()
    }

    /// Subset names: each constellation, then the union.
    pub fn subsets(&self) -> Vec<String> {
        let mut names: Vec<String> = self.constellations.iter().map(|c| c.name.clone()).collect();
        names.push(UNION_SUBSET.to_string());
        names
    }
}

fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { field: field.into(), constraint: constraint.into() }
}

fn epoch_field(field: &str, text: &str) -> Result<EpochTime, ScenarioError> {
    EpochTime::parse_iso(text).map_err(|e| invalid(field, e.to_string()))
}

struct Inputs<'a> {
    base: &'a Path,
    hasher: Sha256,
}

impl Inputs<'_> {
    fn read(&mut self, field: &str, rel: &str) -> Result<String, ScenarioError> {
        let path = self.base.join(rel);
        if !path.is_file() {
            return Err(ScenarioError::MissingFile { field: field.to_string(), path });
        }
        let text = fs::read_to_string(&path).map_err(|e| ScenarioError::Io { path: path.clone(), reason: e.to_string() })?;
        self.hasher.update(rel.as_bytes());
        self.hasher.update([0u8]);
        self.hasher.update(text.as_bytes());
        self.hasher.update([0u8]);
        Ok(text)
    }

    fn pattern(&mut self, field: &str, rel: &str) -> Result<AntennaPattern, ScenarioError> {
        let text = self.read(field, rel)?;
        let name = Path::new(rel).file_stem().and_then(|s| s.to_str()).unwrap_or(rel);
        AntennaPattern::parse(name, &text).map_err(|e| invalid(field, e.to_string()))
    }
}

/// Reads, validates and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    if !path.is_file() {
        return Err(ScenarioError::MissingFile { field: "scenario".into(), path: path.to_path_buf() });
    }
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: path.to_path_buf(), reason: e.to_string() })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file = parse_scenario(&text).map_err(|e| match e {
        ScenarioError::Parse { message, .. } => ScenarioError::Parse { path: path.to_path_buf(), message },
        other => other,
    })?;
    resolve(file, &base)
}

/// Parses scenario text without touching the filesystem.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::Parse { path: PathBuf::new(), message: e.to_string() })
}

/// Validates a parsed scenario and loads everything it references.
pub fn resolve(file: ScenarioFile, base: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let start = epoch_field("start", &file.start)?;
    if !(file.step_s > 0.0) || !file.step_s.is_finite() {
        return Err(invalid("step_s", "must be > 0"));
    }
    if !(file.duration_s >= file.step_s) || !file.duration_s.is_finite() {
        return Err(invalid("duration_s", "must be >= step_s"));
    }
    if !(file.mask_altitude_km >= 0.0) {
        return Err(invalid("mask_altitude_km", "must be >= 0"));
    }
    if !(file.doppler_rate_dt_s > 0.0) {
        return Err(invalid("doppler_rate_dt_s", "must be > 0"));
    }
    let thresholds = TrackThresholds::new(file.thresholds.acquisition_dbhz, file.thresholds.tracking_dbhz)
        .map_err(|e| invalid("thresholds.tracking_dbhz", e.to_string()))?;
    if !(file.thresholds.min_dwell_s >= 0.0) {
        return Err(invalid("thresholds.min_dwell_s", "must be >= 0"));
    }
    let error_model = ErrorModel { uere_sigma_m: file.error_model.uere_m };
    error_model.validate().map_err(|e| invalid("error_model.uere_m", e.to_string()))?;
    if file.error_model.reference_spherical_95_m.is_some_and(|v| !(v > 0.0)) {
        return Err(invalid("error_model.reference_spherical_95_m", "must be > 0"));
    }
    let h = &file.doppler_histogram;
    if !(h.bin_width_hz > 0.0) || !(h.span_hz > 0.0) || h.bin_width_hz > 2.0 * h.span_hz {
        return Err(invalid("doppler_histogram", "bin_width_hz and span_hz must be positive with bin <= 2*span"));
    }
    if file.constellation.is_empty() {
        return Err(invalid("constellation", "at least one constellation is required"));
    }

    let echo = toml::to_string(&file).map_err(|e| invalid("scenario", e.to_string()))?;
    let mut inputs = Inputs { base, hasher: Sha256::new() };
    inputs.hasher.update(echo.as_bytes());

    let receiver = resolve_receiver(&file, start, &mut inputs)?;

    let mut constellations = Vec::with_capacity(file.constellation.len());
    for (k, c) in file.constellation.iter().enumerate() {
        let prefix = format!("constellation[{k}]");
        if c.name.is_empty() || c.name.eq_ignore_ascii_case(UNION_SUBSET) {
            return Err(invalid(format!("{prefix}.name"), "must be non-empty and not `union`"));
        }
        if !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
            return Err(invalid(format!("{prefix}.name"), "only ASCII letters, digits, '-' and '_' are allowed"));
        }
        if constellations.iter().any(|o: &Constellation| o.name.eq_ignore_ascii_case(&c.name)) {
            return Err(invalid(format!("{prefix}.name"), format!("duplicate constellation `{}`", c.name)));
        }
        let band = CarrierBand::builtin(&c.band)
            .ok_or_else(|| invalid(format!("{prefix}.band"), "must be one of L1, L2, L5, E1, E5"))?;
        let elements = match (&c.tle, &c.walker) {
            (Some(tle), None) => {
                let text = inputs.read(&format!("{prefix}.tle"), tle)?;
                let parsed = parse_tle(&text);
                for w in &parsed.warnings {
                    log::warn!("{tle}: {w}");
                }
                if parsed.records.is_empty() {
                    return Err(invalid(format!("{prefix}.tle"), "no valid element sets"));
                }
                parsed.records.into_iter().map(|r| r.elements).collect::<Vec<_>>()
            }
            (None, Some(w)) => {
                let spec = WalkerSpec {
                    total_sats: w.total,
                    planes: w.planes,
                    phasing: w.phasing,
                    semi_major_axis: w.semi_major_axis_km,
                    inclination: w.inclination_deg.to_radians(),
                    raan_offset: w.raan_offset_deg.to_radians(),
                    anomaly_offset: w.anomaly_offset_deg.to_radians(),
                    epoch: match &w.epoch {
                        Some(e) => epoch_field(&format!("{prefix}.walker.epoch"), e)?,
                        None => start,
                    },
                };
                generate_walker(&spec).map_err(|e| invalid(format!("{prefix}.walker"), e.to_string()))?
            }
            _ => return Err(invalid(prefix, "exactly one of `tle` or `walker` is required")),
        };
        let satellites = elements
            .into_iter()
            .enumerate()
            .map(|(i, elements)| Satellite { id: format!("{}-{:02}", c.name, i + 1), elements })
            .collect();

        let tx_pattern = inputs.pattern(&format!("{prefix}.link.tx_pattern_file"), &c.link.tx_pattern_file)?;
        let rx_pattern =
            receiver.antenna.pattern(&band).map_err(|e| invalid("receiver.antenna", e.to_string()))?;
        let link = LinkBudgetConfig {
            tx_power_dbw: c.link.tx_power_dbw,
            tx_pattern,
            rx_pattern,
            system_noise_temperature_k: c.link.system_noise_temperature_k,
            tx_margin_db: c.link.tx_margin_db,
            fixed_loss_db: c.link.fixed_loss_db,
        };
        link.validate().map_err(|e| invalid(format!("{prefix}.link"), e.to_string()))?;
        constellations.push(Constellation {
            name: c.name.clone(),
            band,
            satellites,
            link,
            tx_pattern_source: c.link.tx_pattern_file.clone(),
        });
    }

    let content_hash = hex::encode(inputs.hasher.finalize());
    Ok(ScenarioConfig {
        name: file.name.clone(),
        start,
        duration_s: file.duration_s,
        step_s: file.step_s,
        mask_altitude_km: file.mask_altitude_km,
        doppler_rate_dt_s: file.doppler_rate_dt_s,
        receiver,
        constellations,
        thresholds,
        min_dwell_s: file.thresholds.min_dwell_s,
        error_model,
        reference_spherical_95_m: file.error_model.reference_spherical_95_m,
        monte_carlo_trials: file.error_model.monte_carlo_trials,
        seed: file.error_model.seed,
        histogram: DopplerHistogramSpec { bin_width_hz: h.bin_width_hz, span_hz: h.span_hz },
        output_dir: base.join(&file.output_dir),
        echo,
        content_hash,
        file,
        base_dir: base.to_path_buf(),
    })
}

fn resolve_receiver(file: &ScenarioFile, start: EpochTime, inputs: &mut Inputs) -> Result<Receiver, ScenarioError> {
    let r = &file.receiver;
    let elements = match (&r.tle, &r.elements) {
        (Some(tle), None) => {
            let text = inputs.read("receiver.tle", tle)?;
            let parsed = parse_tle(&text);
            let record = match &r.tle_name {
                Some(name) => parsed.records.into_iter().find(|rec| &rec.satellite_name == name),
                None => parsed.records.into_iter().next(),
            };
            record
                .ok_or_else(|| invalid("receiver.tle", "no matching valid element set"))?
                .elements
        }
        (None, Some(e)) => {
            let epoch = match &e.epoch {
                Some(text) => epoch_field("receiver.elements.epoch", text)?,
                None => start,
            };
            KeplerianElements::new(
                e.semi_major_axis_km,
                e.eccentricity,
                e.inclination_deg.to_radians(),
                e.raan_deg.to_radians(),
                e.arg_perigee_deg.to_radians(),
                e.mean_anomaly_deg.to_radians(),
                epoch,
            )
            .map_err(|err| invalid("receiver.elements", err.to_string()))?
        }
        _ => return Err(invalid("receiver", "exactly one of `tle` or `elements` is required")),
    };
    if r.tle_name.is_some() && r.tle.is_none() {
        return Err(invalid("receiver.tle_name", "requires `tle`"));
    }
    let antenna = match &r.antenna {
        RxAntennaFile::Parabolic { diameter_m, efficiency, half_power_half_angle_deg, floor_dbi, boresight_gain_dbi } => {
            RxAntenna::Parabolic(ParabolicAntenna {
                diameter_m: *diameter_m,
                efficiency: *efficiency,
                half_power_half_angle_deg: *half_power_half_angle_deg,
                floor_dbi: *floor_dbi,
                boresight_gain_dbi: *boresight_gain_dbi,
            })
        }
        RxAntennaFile::Table { pattern_file } => RxAntenna::Table(inputs.pattern("receiver.antenna.pattern_file", pattern_file)?),
    };
    Ok(Receiver { name: r.name.clone(), elements, antenna })
}
