//! Monte-Carlo threshold calibration and detection-probability estimation.
//!
//! No null distributions are available in closed form, so thresholds are
//! empirical quantiles of the statistic over simulated H0 draws. Every trial
//! draws from its own substream of the master seed, which makes results
//! independent of the number of worker threads.

mod config;
pub mod io;

use rayon::prelude::*;

pub use config::ExperimentConfig;

use crate::detector::{evaluate, Detector};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scenario::{
    make_covariance, random_direction, random_wishart, sample_subspace, substream, Environment, Generator,
    ScenarioConfig, SignalModel,
};

/// Stream-family tags passed to [`substream`].
pub mod purpose {
    pub const CALIBRATION: u64 = 1;
    pub const DETECTION: u64 = 2;
    pub const HOLDOUT: u64 = 3;
    pub const SUBSPACE: u64 = 4;
    pub const SIGNAL: u64 = 5;
}

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub detector: String,
    pub n: usize,
    pub r: usize,
    pub k_p: usize,
    pub k_s: usize,
    pub env: String,
    pub snr_db: f64,
    pub pfa_target: f64,
    pub threshold: f64,
    pub trials: usize,
    pub pd_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub threshold: f64,
    pub trials: usize,
    /// H0 statistics in ascending order.
    pub sorted_statistics: Vec<f64>,
    /// Trials whose alternating maximization hit `max_iters`.
    pub unconverged: usize,
}

/// Fixed ingredients of an experiment: covariance, subspace and signal shape.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub covariance: ComplexMatrix,
    pub h: ComplexMatrix,
    /// Unit-energy `X` direction (first-order) or unit-trace `R_s` (second-order).
    pub signal_shape: ComplexMatrix,
}

impl Experiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let s = &cfg.scenario;
        let covariance = make_covariance(s.n, s.clutter_rho)?;
        let h = sample_subspace(s.n, s.r, derive_seed(s.seed, purpose::SUBSPACE))?;
        let sig_seed = derive_seed(s.seed, purpose::SIGNAL);
        let signal_shape =
            if cfg.detector.is_first_order() { random_direction(s.r, s.k_p, sig_seed) } else { random_wishart(s.r, sig_seed) };
        Ok(Experiment { cfg: cfg.clone(), covariance, h, signal_shape })
    }

    /// Signal scaled to `snr_db` (`None` at `-∞`).
    pub fn signal_at(&self, snr_db: f64) -> Result<Option<SignalModel>> {
        if snr_db == f64::NEG_INFINITY {
            return Ok(None);
        }
        let k_p = self.cfg.scenario.k_p;
        let model = if self.cfg.detector.is_first_order() {
            SignalModel::first_order_at_snr(self.h.clone(), &self.signal_shape, &self.covariance, snr_db)?
        } else {
            SignalModel::second_order_at_snr(self.h.clone(), &self.signal_shape, &self.covariance, k_p, snr_db)?
        };
        Ok(Some(model))
    }

    /// Statistics of `trials` draws from substreams `(seed, tag, 0..trials)`.
    pub fn statistics(&self, signal: Option<&SignalModel>, tag: u64, trials: usize) -> Result<Vec<(f64, bool)>> {
        let s = &self.cfg.scenario;
        let generator = Generator::new(s, signal, &self.covariance)?;
        let normalize = match s.env {
            Environment::Homogeneous { gamma_known } if gamma_known != 1.0 => Some(gamma_known),
            _ => None,
        };
        let detector = self.cfg.detector;
        let opts = self.cfg.alt_max;
        let h = &self.h;
        let run = || {
            (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(s.seed, tag, i as u64);
                    let mut data = generator.draw(&mut rng);
                    if let Some(g) = normalize {
                        data.normalize_secondary(g);
                    }
                    evaluate(detector, &data, Some(h), s.r, &opts).map(|o| (o.statistic, o.diagnostics.converged))
                })
                .collect::<Result<Vec<_>>>()
        };
        with_threads(self.cfg.threads, run)
    }
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    use rand::RngCore;
    substream(seed, tag, 0).next_u64()
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool when zero.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Linear-interpolation quantile of ascending `sorted` data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Threshold η: the empirical `1 − pfa_target` quantile of the statistic over
/// `calib_trials` H0 draws.
pub fn calibrate_threshold(cfg: &ExperimentConfig) -> Result<CalibrationReport> {
    let exp = Experiment::new(cfg)?;
    calibrate_experiment(&exp)
}

pub fn calibrate_experiment(exp: &Experiment) -> Result<CalibrationReport> {
    let cfg = &exp.cfg;
    let stats = exp.statistics(None, purpose::CALIBRATION, cfg.calib_trials).map_err(infeasible_as_config)?;
    let unconverged = stats.iter().filter(|s| !s.1).count();
    let mut sorted: Vec<f64> = stats.into_iter().map(|s| s.0).collect();
    sorted.sort_by(f64::total_cmp);
    let threshold = quantile_sorted(&sorted, 1.0 - cfg.pfa_target);
    log::info!("{}: threshold {threshold} from {} H0 trials", cfg.detector, sorted.len());
    if unconverged > 0 {
        log::warn!("{}: {unconverged} calibration trials did not converge", cfg.detector);
    }
    Ok(CalibrationReport { threshold, trials: sorted.len(), sorted_statistics: sorted, unconverged })
}

fn infeasible_as_config(e: Error) -> Error {
    match e {
        Error::Infeasible(m) => Error::Config(m),
        other => other,
    }
}

/// Number of draws whose statistic exceeds `eta`.
pub fn count_exceedances(
    exp: &Experiment,
    eta: f64,
    signal: Option<&SignalModel>,
    tag: u64,
    trials: usize,
) -> Result<usize> {
    Ok(exp.statistics(signal, tag, trials)?.iter().filter(|s| s.0 > eta).count())
}

/// Detection probability at `snr_db` for threshold `eta`, with a Wilson interval.
///
/// The same noise substreams are reused at every SNR point.
pub fn estimate_pd(cfg: &ExperimentConfig, eta: f64, snr_db: f64) -> Result<ResultRow> {
    let exp = Experiment::new(cfg)?;
    estimate_pd_experiment(&exp, eta, snr_db)
}

pub fn estimate_pd_experiment(exp: &Experiment, eta: f64, snr_db: f64) -> Result<ResultRow> {
    let cfg = &exp.cfg;
    let signal = exp.signal_at(snr_db)?;
    let hits = count_exceedances(exp, eta, signal.as_ref(), purpose::DETECTION, cfg.pd_trials)?;
    let (ci_low, ci_high) = wilson_interval(hits, cfg.pd_trials);
    let s: &ScenarioConfig = &cfg.scenario;
    Ok(ResultRow {
        detector: cfg.detector.label().to_string(),
        n: s.n,
        r: s.r,
        k_p: s.k_p,
        k_s: s.k_s,
        env: s.env.label().to_string(),
        snr_db,
        pfa_target: cfg.pfa_target,
        threshold: eta,
        trials: cfg.pd_trials,
        pd_hat: hits as f64 / cfg.pd_trials as f64,
        ci_low,
        ci_high,
        seed: s.seed,
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub calibration: CalibrationReport,
    pub rows: Vec<ResultRow>,
}

/// Calibrates, sweeps the SNR grid and writes the CSV at `cfg.output_path`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let exp = Experiment::new(cfg)?;
    let calibration = calibrate_experiment(&exp)?;
    let rows = cfg
        .snr_grid_db
        .iter()
        .map(|&snr| estimate_pd_experiment(&exp, calibration.threshold, snr))
        .collect::<Result<Vec<_>>>()?;
    io::write_csv(&cfg.output_path, &rows)?;
    Ok(RunSummary { calibration, rows })
}

/// Loads `path` and calls [`run`].
pub fn run_file(path: &std::path::Path) -> Result<RunSummary> {
    run(&ExperimentConfig::load(path)?)
}

/// Plain-text table of result rows.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let mut out = format!("{:<10} {:>8} {:>10} {:>8} {:>17}\n", "detector", "snr_db", "threshold", "pd_hat", "95% CI");
    for r in rows {
        out.push_str(&format!(
            "{:<10} {:>8.2} {:>10.4} {:>8.4} [{:.4}, {:.4}]\n",
            r.detector, r.snr_db, r.threshold, r.pd_hat, r.ci_low, r.ci_high
        ));
    }
    out
}

/// All eight detectors, handy for sweeps.
pub fn all_detectors() -> [Detector; 8] {
    Detector::ALL
}
