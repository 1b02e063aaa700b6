mod common;

use std::path::Path;
use std::process::Command;

use subdet::detector::Detector;
use subdet::harness::io::{encode_dataset, encode_matrix, CSV_HEADER};
use subdet::harness::{self, calibrate_threshold, estimate_pd, ExperimentConfig};

const MINIMAL: &str = r#"
[scenario]
n = 6
r = 1
k_p = 3
k_s = 12
seed = 11

[detector]
name = "FO-KS-HE"

[harness]
pfa_target = 0.05
calib_trials = 2000
pd_trials = 400
snr_grid_db = [0.0, 10.0]
output_path = "out.csv"
"#;

fn subdet(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_subdet")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn quick(det: Detector) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk(det);
    cfg.scenario.seed = 5;
    cfg.pfa_target = 0.05;
    cfg.calib_trials = 2000;
    cfg.pd_trials = 2000;
    cfg
}

#[test]
fn missing_config_fails() {
    let out = subdet(&["calibrate", "--config", "/nonexistent/subdet.toml"]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn invalid_configs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.toml", &MINIMAL.replace("seed = 11", "seed = 11\nbogus = 1"));
    let infeasible = write(dir.path(), "b.toml", &MINIMAL.replace("k_s = 12", "k_s = 4"));
    let bad_name = write(dir.path(), "c.toml", &MINIMAL.replace("FO-KS-HE", "XO-KS-HE"));
    for cfg in [unknown, infeasible, bad_name] {
        let out = subdet(&["calibrate", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn roc_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", MINIMAL);
    let out = subdet(&["roc", "--config", &cfg, "--snr-db", "-5,0,5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("FO-KS-HE,6,1,3,12,HE,-5,"));
}

#[test]
fn calibrate_and_detect_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "run.toml", &MINIMAL.replace("output_path", "threshold = 2.5\noutput_path"));
    let out = subdet(&["calibrate", "--config", &cfg_path]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("threshold"));

    let cfg = ExperimentConfig::load(Path::new(&cfg_path)).unwrap();
    let (data, h) = common::instance(6, 1, 3, 12, 1, 3);
    std::fs::write(dir.path().join("data.bin"), encode_dataset(&data)).unwrap();
    std::fs::write(dir.path().join("h.bin"), encode_matrix(&h)).unwrap();
    let data_path = dir.path().join("data.bin");
    let h_path = dir.path().join("h.bin");
    let out = subdet(&[
        "detect",
        "--config",
        &cfg_path,
        "--data",
        data_path.to_str().unwrap(),
        "--subspace",
        h_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let expected = subdet::detector::evaluate(cfg.detector, &data, Some(&h), 1, &cfg.alt_max).unwrap().statistic;
    let line = text.lines().find(|l| l.starts_with("statistic")).unwrap();
    let got: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected.abs());
    assert!(text.contains("decision"));

    std::fs::write(dir.path().join("short.bin"), &encode_dataset(&data)[..40]).unwrap();
    let short = dir.path().join("short.bin");
    let out = subdet(&["detect", "--config", &cfg_path, "--data", short.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn pd_at_zero_signal_matches_pfa() {
    for det in [Detector::FoKsHe, Detector::SoUsPhe] {
        let cfg = quick(det);
        let cal = calibrate_threshold(&cfg).unwrap();
        let row = estimate_pd(&cfg, cal.threshold, f64::NEG_INFINITY).unwrap();
        let sigma = (0.05f64 * 0.95 * (1.0 / 2000.0 + 1.0 / 2000.0)).sqrt();
        assert!((row.pd_hat - 0.05).abs() <= 4.0 * sigma, "{det}: {}", row.pd_hat);
        assert!(row.ci_low <= row.pd_hat && row.pd_hat <= row.ci_high);
    }
}

#[test]
fn pd_rises_with_snr() {
    for det in [Detector::FoKsHe, Detector::FoUsHe, Detector::SoKsHe] {
        let cfg = quick(det);
        let eta = calibrate_threshold(&cfg).unwrap().threshold;
        let pds: Vec<f64> = [-5.0, 0.0, 5.0, 10.0, 20.0]
            .iter()
            .map(|&snr| estimate_pd(&cfg, eta, snr).unwrap().pd_hat)
            .collect();
        assert!(pds.windows(2).all(|w| w[1] >= w[0] - 0.01), "{det}: {pds:?}");
        assert!(pds[4] >= 0.99, "{det}: {pds:?}");
    }
}

#[test]
fn run_summary_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Detector::FoKsPhe);
    cfg.pd_trials = 300;
    cfg.snr_grid_db = vec![0.0, 10.0];
    cfg.output_path = dir.path().join("phe.csv");
    let summary = harness::run(&cfg).unwrap();
    let csv = std::fs::read_to_string(&cfg.output_path).unwrap();
    assert_eq!(csv, harness::io::csv_string(&summary.rows));
    assert!(harness::summary_table(&summary.rows).contains("FO-KS-PHE"));
}
