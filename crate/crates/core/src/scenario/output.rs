//! CSV emission. Floats use six significant digits in C `%g` style with a
//! '.' decimal separator; undefined values are empty fields.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::engine::{Evaluation, Simulation, SubsetMetrics};
use super::ScenarioError;

/// Formats like C's `%.6g`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The value a reader recovers from the CSV text.
pub fn quantize(x: f64) -> f64 {
    format_g6(x).parse().expect("formatted float parses")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g6).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Metrics file for a subset under the hysteresis rule.
pub fn metrics_file_name(subset: &str) -> String {
    format!("metrics_{}.csv", subset.to_ascii_lowercase())
}

/// Metrics file for a subset under the acquisition-only rule.
pub fn acquisition_metrics_file_name(subset: &str) -> String {
    format!("metrics_{}_acqonly.csv", subset.to_ascii_lowercase())
}

pub const LINKS_HEADER: [&str; 11] = [
    "epoch_iso",
    "sat_id",
    "constellation",
    "cn0_dbhz",
    "doppler_hz",
    "doppler_rate_hz_s",
    "tx_angle_deg",
    "rx_angle_deg",
    "range_km",
    "occluded",
    "tracked",
];

pub const METRICS_HEADER: [&str; 10] =
    ["epoch_iso", "visible", "gdop", "pdop", "hdop", "vdop", "tdop", "sigma_r_m", "sigma_a_m", "sigma_c_m"];

pub const SKYPLOT_HEADER: [&str; 5] = ["epoch_iso", "sat_id", "az_deg", "el_deg", "tracked"];

pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_low_hz", "bin_high_hz", "count"];

/// Binned counts over `[-span, span)`, plus how many values fell outside.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerHistogram {
    pub bins: Vec<(f64, f64, u64)>,
    pub out_of_range: u64,
}

impl DopplerHistogram {
    pub fn new(values: impl IntoIterator<Item = f64>, bin_width_hz: f64, span_hz: f64) -> Self {
        let n = ((2.0 * span_hz) / bin_width_hz).round().max(1.0) as usize;
        let mut bins: Vec<(f64, f64, u64)> = (0..n)
            .map(|k| (-span_hz + k as f64 * bin_width_hz, -span_hz + (k + 1) as f64 * bin_width_hz, 0))
            .collect();
        let mut out_of_range = 0;
        for v in values {
            let idx = ((v + span_hz) / bin_width_hz).floor();
            if idx >= 0.0 && (idx as usize) < n {
                bins[idx as usize].2 += 1;
            } else {
                out_of_range += 1;
            }
        }
        Self { bins, out_of_range }
    }
}

struct CsvFile {
    path: PathBuf,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvFile {
    fn new(dir: &Path, name: &str, header: &[&str]) -> Result<Self, ScenarioError> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let path = dir.join(name);
        writer.write_record(header).map_err(|e| io_err(&path, e))?;
        Ok(Self { path, writer })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<(), ScenarioError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| io_err(&self.path, e))
    }

    fn finish(self) -> Result<(PathBuf, Vec<u8>), ScenarioError> {
        let bytes = self.writer.into_inner().map_err(|e| io_err(&self.path, e.error()))?;
        Ok((self.path, bytes))
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Io { path: path.to_path_buf(), reason: e.to_string() }
}

/// Serialized outputs keyed by file name, in memory until written.
pub type FileSet = BTreeMap<String, Vec<u8>>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds every CSV for a run.
pub fn render_timeseries(
    sim: &Simulation,
    eval: &Evaluation,
    acquisition_only: &Evaluation,
    histogram: &DopplerHistogram,
) -> Result<FileSet, ScenarioError> {
    let dir = Path::new("");
    let mut links = CsvFile::new(dir, "links.csv", &LINKS_HEADER)?;
    let mut sky = CsvFile::new(dir, "skyplot.csv", &SKYPLOT_HEADER)?;
    for (ep, flags) in sim.epochs.iter().zip(&eval.usable) {
        let iso = ep.epoch.to_iso();
        for (i, (sat, link)) in sim.satellites.iter().zip(&ep.links).enumerate() {
            let g = &link.geometry;
            links.row([
                iso.clone(),
                sat.id.clone(),
                sim.constellation_names[sat.constellation].clone(),
                opt(link.cn0_dbhz),
                format_g6(link.doppler_hz),
                format_g6(link.doppler_rate_hz_s),
                format_g6(g.tx_off_boresight),
                format_g6(g.rx_off_boresight),
                format_g6(g.range),
                flag(g.occluded).into(),
                flag(flags[i]).into(),
            ])?;
            sky.row([iso.clone(), sat.id.clone(), format_g6(g.azimuth), format_g6(g.elevation), flag(flags[i]).into()])?;
        }
    }

    let mut files = FileSet::new();
    for f in [links, sky] {
        let (path, bytes) = f.finish()?;
        files.insert(path.display().to_string(), bytes);
    }

    for subset in &eval.subsets {
        files.insert(metrics_file_name(&subset.name), metrics_csv(subset)?);
    }
    for subset in &acquisition_only.subsets {
        files.insert(acquisition_metrics_file_name(&subset.name), metrics_csv(subset)?);
    }

    let mut h = CsvFile::new(dir, "doppler_hist.csv", &HISTOGRAM_HEADER)?;
    for (lo, hi, count) in &histogram.bins {
        h.row([format_g6(*lo), format_g6(*hi), count.to_string()])?;
    }
    let (_, bytes) = h.finish()?;
    files.insert("doppler_hist.csv".into(), bytes);
    Ok(files)
}

fn metrics_csv(subset: &SubsetMetrics) -> Result<Vec<u8>, ScenarioError> {
    let mut m = CsvFile::new(Path::new(""), &metrics_file_name(&subset.name), &METRICS_HEADER)?;
    for row in &subset.metrics {
        let d = row.dops;
        let s = row.sigma_m;
        m.row([
            row.epoch.to_iso(),
            row.visible_count.to_string(),
            opt(d.map(|d| d.gdop)),
            opt(d.map(|d| d.pdop)),
            opt(d.map(|d| d.hdop)),
            opt(d.map(|d| d.vdop)),
            opt(d.map(|d| d.tdop)),
            opt(s.map(|s| s[0])),
            opt(s.map(|s| s[1])),
            opt(s.map(|s| s[2])),
        ])?;
    }
    Ok(m.finish()?.1)
}

/// Writes a file set into `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &FileSet) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}
