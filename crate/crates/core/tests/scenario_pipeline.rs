//! End-to-end checks of scenario loading, the run driver and its CSV output.

use std::path::PathBuf;

use ssvsim::scenario::{
    load_scenario, parse_scenario, parse_sweep, resolve, run_with_threads, sweep, RunOutcome, ScenarioConfig,
    ScenarioError,
};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// A GEO receiver and a small Walker constellation; `extra` is spliced into
/// the top-level table.
fn scenario_text(duration_s: f64, walker: (u32, u32, u32), extra: &str) -> String {
    let (t, p, f) = walker;
    format!(
        r#"
name = "pipeline"
start = "2008-03-22T00:00:00Z"
duration_s = {duration_s}
step_s = 60.0
{extra}

[thresholds]
acquisition_dbhz = 29.0
tracking_dbhz = 27.0

[error_model]
uere_m = 5.0
monte_carlo_trials = 0

[receiver]
name = "GEO"

[receiver.elements]
semi_major_axis_km = 42166.0
eccentricity = 0.0
inclination_deg = 0.5
raan_deg = 10.0

[receiver.antenna]
type = "parabolic"
diameter_m = 0.25
efficiency = 0.6

[[constellation]]
name = "GPS"
band = "L1"

[constellation.walker]
total = {t}
planes = {p}
phasing = {f}
semi_major_axis_km = 26560.0
inclination_deg = 55.0

[constellation.link]
tx_pattern_file = "gps_block2_l1.pattern"

[[constellation]]
name = "Galileo"
band = "E1"

[constellation.walker]
total = 27
planes = 3
phasing = 1
semi_major_axis_km = 29600.318
inclination_deg = 56.0

[constellation.link]
tx_pattern_file = "gps_block2_l1.pattern"
"#
    )
}

fn config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    resolve(parse_scenario(text)?, &data_dir())
}

fn csv_rows(out: &RunOutcome, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let bytes = out.files.get(name).unwrap_or_else(|| panic!("missing {name}"));
    let text = std::str::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn nearest_rank_95(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((0.95 * v.len() as f64).ceil() as usize).max(1);
    Some(v[rank - 1])
}

#[test]
fn minimal_walker_config_echoes_defaults() {
    let cfg = config(&scenario_text(600.0, (24, 6, 1), "")).unwrap();
    assert_eq!(cfg.satellite_count(), 51);
    assert_eq!(cfg.subsets(), ["GPS", "Galileo", "union"]);
    for key in ["mask_altitude_km", "min_dwell_s", "tx_power_dbw", "system_noise_temperature_k", "bin_width_hz"] {
        assert!(cfg.echo.contains(key), "echo lacks default for {key}:\n{}", cfg.echo);
    }
    // The echo is itself a valid scenario resolving to the same content.
    let again = config(&cfg.echo).unwrap();
    assert_eq!(again.content_hash, cfg.content_hash);
}

#[test]
fn zero_step_is_a_validation_error_naming_the_field() {
    let text = scenario_text(600.0, (24, 6, 1), "").replace("step_s = 60.0", "step_s = 0.0");
    match config(&text) {
        Err(ScenarioError::Validation { field, .. }) => assert_eq!(field, "step_s"),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn unknown_key_is_a_parse_error_citing_it() {
    let text = scenario_text(600.0, (24, 6, 1), "stepp = 30.0");
    match config(&text) {
        Err(e @ ScenarioError::Parse { .. }) => {
            assert!(e.is_validation());
            assert!(e.to_string().contains("stepp"), "{e}");
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn missing_pattern_file_is_reported() {
    let text = scenario_text(600.0, (24, 6, 1), "").replacen("gps_block2_l1.pattern", "nope.pattern", 1);
    assert!(matches!(config(&text), Err(ScenarioError::MissingFile { .. })));
}

#[test]
fn load_scenario_resolves_paths_relative_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data_dir().join("gps_block2_l1.pattern"), dir.path().join("gps_block2_l1.pattern")).unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, scenario_text(600.0, (24, 6, 1), "")).unwrap();
    let cfg = load_scenario(&path).unwrap();
    assert_eq!(cfg.epochs().len(), 10);

    std::fs::write(&path, scenario_text(600.0, (24, 6, 1), "stepp = 1.0")).unwrap();
    match load_scenario(&path) {
        Err(ScenarioError::Parse { path: p, .. }) => assert_eq!(p, path),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn single_epoch_single_satellite_run() {
    let text = scenario_text(60.0, (1, 1, 0), "");
    let mut file = parse_scenario(&text).unwrap();
    file.constellation.truncate(1);
    let cfg = resolve(file, &data_dir()).unwrap();
    let out = run_with_threads(&cfg, Some(1)).unwrap();
    assert_eq!(out.report.epochs_simulated, 1);

    let (header, rows) = csv_rows(&out, "links.csv");
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][col(&header, "epoch_iso")], "2008-03-22T00:00:00.000Z");

    let (header, rows) = csv_rows(&out, "metrics_union.csv");
    assert_eq!(rows.len(), 1);
    assert!(rows[0][col(&header, "gdop")].is_empty());
    assert_eq!(out.report.subset("union").unwrap().gdop_95, None);
    assert_eq!(out.report.subset("union").unwrap().availability_fraction, 0.0);
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let cfg = config(&scenario_text(3600.0, (24, 6, 1), "")).unwrap();
    let one = run_with_threads(&cfg, Some(1)).unwrap();
    let three = run_with_threads(&cfg, Some(3)).unwrap();
    assert_eq!(one.files, three.files);
}

#[test]
fn report_statistics_recompute_from_csv() {
    let cfg = config(&scenario_text(6.0 * 3600.0, (24, 6, 1), "")).unwrap();
    let out = run_with_threads(&cfg, None).unwrap();

    for (name, hash) in &out.report.files {
        let bytes = &out.files[name];
        let digest = hex::encode(<sha2::Sha256 as sha2::Digest>::digest(bytes));
        assert_eq!(&digest, hash, "{name}");
    }

    for summary in &out.report.subsets {
        let (h, rows) = csv_rows(&out, &format!("metrics_{}.csv", summary.name.to_lowercase()));
        let num = |r: &Vec<String>, c: &str| -> Option<f64> {
            let s = &r[col(&h, c)];
            (!s.is_empty()).then(|| s.parse().unwrap())
        };
        let visible: Vec<usize> = rows.iter().map(|r| r[col(&h, "visible")].parse().unwrap()).collect();
        let available = visible.iter().filter(|&&v| v >= 4).count();
        assert_eq!(summary.available_epochs, available);
        assert_eq!(summary.availability_fraction, available as f64 / rows.len() as f64);

        let gdop: Vec<f64> = rows.iter().filter_map(|r| num(r, "gdop")).collect();
        assert_eq!(summary.defined_epochs, gdop.len());
        assert_eq!(summary.gdop_95, nearest_rank_95(gdop.clone()));
        match summary.mean_gdop {
            Some(m) => {
                let mean = gdop.iter().sum::<f64>() / gdop.len() as f64;
                assert!(((m - mean) / mean).abs() < 1e-12, "{m} vs {mean}");
            }
            None => assert!(gdop.is_empty()),
        }

        let spherical: Vec<f64> = rows
            .iter()
            .filter_map(|r| {
                let [a, b, c] = [num(r, "sigma_r_m")?, num(r, "sigma_a_m")?, num(r, "sigma_c_m")?];
                Some((a * a + b * b + c * c).sqrt())
            })
            .collect();
        assert_eq!(summary.spherical_95_m, nearest_rank_95(spherical));
    }
}

#[test]
fn union_counts_are_the_sum_of_constellations() {
    let cfg = config(&scenario_text(6.0 * 3600.0, (24, 6, 1), "")).unwrap();
    let out = run_with_threads(&cfg, None).unwrap();
    for eval in [&out.hysteresis, &out.acquisition_only] {
        let union = eval.subset("union").unwrap();
        let gps = eval.subset("GPS").unwrap();
        let gal = eval.subset("Galileo").unwrap();
        for k in 0..union.metrics.len() {
            assert_eq!(union.metrics[k].visible_count, gps.metrics[k].visible_count + gal.metrics[k].visible_count);
        }
        let u = out.report.subset("union").unwrap().availability_fraction;
        assert!(u >= out.report.subset("GPS").unwrap().availability_fraction);
    }
}

#[test]
fn availability_falls_as_the_threshold_rises() {
    let cfg = config(&scenario_text(6.0 * 3600.0, (24, 6, 1), "")).unwrap();
    let out = run_with_threads(&cfg, None).unwrap();
    let rows = sweep(&cfg, &out.simulation, &parse_sweep("24:36:2").unwrap()).unwrap();
    assert_eq!(rows.len(), 7);
    for pair in rows.windows(2) {
        assert_eq!(pair[1].acquisition_dbhz - pair[1].tracking_dbhz, 2.0);
        for (a, b) in pair[0].hysteresis.iter().zip(&pair[1].hysteresis) {
            assert!(b.availability_fraction <= a.availability_fraction, "{}: {a:?} -> {b:?}", a.name);
        }
        for (a, b) in pair[0].acquisition_only.iter().zip(&pair[1].acquisition_only) {
            assert!(b.availability_fraction <= a.availability_fraction, "{}", a.name);
        }
    }
}
