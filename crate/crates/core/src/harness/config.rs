//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::scenario::{Environment, ScenarioConfig};
use crate::so::AltMaxOptions;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub detector: Detector,
    pub pfa_target: f64,
    pub calib_trials: usize,
    pub pd_trials: usize,
    pub snr_grid_db: Vec<f64>,
    pub output_path: PathBuf,
    pub alt_max: AltMaxOptions,
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    /// Optional fixed threshold used by `subdet detect`.
    pub threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    detector: RawDetector,
    #[serde(default)]
    harness: RawHarness,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: usize,
    r: usize,
    k_p: usize,
    k_s: usize,
    #[serde(default = "default_env")]
    env: String,
    #[serde(default = "one")]
    gamma: f64,
    #[serde(default)]
    clutter_rho: f64,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    name: String,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_tol")]
    tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHarness {
    #[serde(default = "default_pfa")]
    pfa_target: f64,
    #[serde(default = "default_calib")]
    calib_trials: usize,
    #[serde(default = "default_pd")]
    pd_trials: usize,
    #[serde(default)]
    snr_grid_db: Vec<f64>,
    #[serde(default = "default_output")]
    output_path: PathBuf,
    #[serde(default)]
    threads: usize,
    threshold: Option<f64>,
}

impl Default for RawHarness {
    fn default() -> Self {
        RawHarness {
            pfa_target: default_pfa(),
            calib_trials: default_calib(),
            pd_trials: default_pd(),
            snr_grid_db: Vec::new(),
            output_path: default_output(),
            threads: 0,
            threshold: None,
        }
    }
}

fn default_env() -> String {
    "HE".into()
}
fn one() -> f64 {
    1.0
}
fn default_max_iters() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-8
}
fn default_pfa() -> f64 {
    1e-2
}
fn default_calib() -> usize {
    10_000
}
fn default_pd() -> usize {
    2_000
}
fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
}

impl ExperimentConfig {
    /// Desk-scale defaults: N=8, r=2, K_P=4, K_S=16, Pfa=1e-2, 10⁴ calibration trials.
    pub fn desk(detector: Detector) -> Self {
        let env = if detector.is_phe() {
            Environment::PartiallyHomogeneous { gamma_true: 1.0 }
        } else {
            Environment::Homogeneous { gamma_known: 1.0 }
        };
        ExperimentConfig {
            scenario: ScenarioConfig::new(8, 2, 4, 16)
                .with_env(env)
                .with_subspace_mode(detector.subspace_mode()),
            detector,
            pfa_target: default_pfa(),
            calib_trials: default_calib(),
            pd_trials: default_pd(),
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0],
            output_path: default_output(),
            alt_max: AltMaxOptions::default(),
            threads: 0,
            threshold: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let detector: Detector = raw.detector.name.parse()?;
        let s = raw.scenario;
        let env = match s.env.to_ascii_uppercase().as_str() {
            "HE" => Environment::Homogeneous { gamma_known: s.gamma },
            "PHE" => Environment::PartiallyHomogeneous { gamma_true: s.gamma },
            other => return Err(Error::Config(format!("scenario.env must be \"HE\" or \"PHE\", got {other:?}"))),
        };
        let scenario = ScenarioConfig::new(s.n, s.r, s.k_p, s.k_s)
            .with_env(env)
            .with_rho(s.clutter_rho)
            .with_seed(s.seed)
            .with_subspace_mode(detector.subspace_mode());
        let h = raw.harness;
        let cfg = ExperimentConfig {
            scenario,
            detector,
            pfa_target: h.pfa_target,
            calib_trials: h.calib_trials,
            pd_trials: h.pd_trials,
            snr_grid_db: h.snr_grid_db,
            output_path: h.output_path,
            alt_max: AltMaxOptions { max_iters: raw.detector.max_iters, tol: raw.detector.tol },
            threads: h.threads,
            threshold: h.threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative output paths are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.output_path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_path = dir.join(&cfg.output_path);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let s = &self.scenario;
        self.detector
            .check_dims(s.n, s.r, s.k_p, s.k_s)
            .map_err(|e| Error::Config(format!("{}: {e}", self.detector)))?;
        if !(self.pfa_target > 0.0 && self.pfa_target < 1.0) {
            return Err(Error::Config(format!("pfa_target must lie in (0, 1), got {}", self.pfa_target)));
        }
        if self.pfa_target * (self.calib_trials as f64) < 50.0 {
            return Err(Error::Config(format!(
                "pfa_target * calib_trials must be at least 50 for a usable quantile, got {}",
                self.pfa_target * self.calib_trials as f64
            )));
        }
        if self.pd_trials == 0 {
            return Err(Error::Config("pd_trials must be positive".into()));
        }
        if self.snr_grid_db.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::Config("snr_grid_db entries must be finite or -inf".into()));
        }
        if self.alt_max.max_iters == 0 || !(self.alt_max.tol > 0.0) {
            return Err(Error::Config("detector.max_iters and detector.tol must be positive".into()));
        }
        Ok(())
    }
}
