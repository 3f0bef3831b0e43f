use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn ssvsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssvsim")).args(args).output().expect("spawn ssvsim")
}

/// Two-hour copy of the reference scenario in a scratch directory.
fn short_scenario(dir: &Path) -> PathBuf {
    for f in ["gps_block2_l1.pattern", "gps_nominal_30.tle"] {
        std::fs::copy(data(f), dir.join(f)).unwrap();
    }
    let text = std::fs::read_to_string(data("meteosat9.toml")).unwrap().replace("duration_s = 172800.0", "duration_s = 7200.0");
    let path = dir.join("short.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_echoes_the_normalized_scenario() {
    let path = data("meteosat9.toml");
    let o = ssvsim(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = stdout(&o);
    assert!(echo.contains("name = \"meteosat9\""));
    assert!(echo.contains("mask_altitude_km"));
    assert!(stderr(&o).contains("valid (57 satellites"));
}

#[test]
fn missing_scenario_argument_is_a_usage_error() {
    let o = ssvsim(&["simulate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--scenario"));
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn invalid_scenario_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path());
    let text = std::fs::read_to_string(&path).unwrap().replace("step_s = 60.0", "step_s = -1.0");
    std::fs::write(&path, text).unwrap();
    let o = ssvsim(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("step_s"), "{}", stderr(&o));

    let o = ssvsim(&["validate", "--scenario", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_sweep_range_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path());
    let o = ssvsim(&["availability", "--scenario", path.to_str().unwrap(), "--sweep-threshold", "35:25:1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sweep-threshold"));
}

#[test]
fn availability_sweep_prints_one_row_per_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path());
    let o = ssvsim(&["availability", "--scenario", path.to_str().unwrap(), "--sweep-threshold", "25:35:1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("acq_dbhz\tGPS\tGPS_acqonly\tGalileo"));
    assert!(lines[1].starts_with("25\t"));
    assert!(lines[11].starts_with("35\t"));
    for line in &lines[1..] {
        for cell in line.split('\t').skip(1) {
            let v: f64 = cell.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn simulate_writes_the_output_set() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path());
    let out_dir = dir.path().join("out");
    let o = ssvsim(&["simulate", "--scenario", path.to_str().unwrap(), "--threads", "2", "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["links.csv", "skyplot.csv", "metrics_gps.csv", "metrics_union.csv", "doppler_hist.csv", "report.json", "config_echo.toml"] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let report: String = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"epochs_simulated\": 120"));
}
