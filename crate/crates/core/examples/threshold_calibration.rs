//! Monte-Carlo threshold calibration and an independent false-alarm check.

use subdet::harness::{calibrate_experiment, count_exceedances, purpose, Experiment, ExperimentConfig};
use subdet::prelude::*;

fn main() -> subdet::Result<()> {
    let mut cfg = ExperimentConfig::desk(Detector::FoKsHe);
    cfg.calib_trials = 20_000;
    cfg.pfa_target = 1e-2;
    cfg.scenario.seed = 7;

    let exp = Experiment::new(&cfg)?;
    let cal = calibrate_experiment(&exp)?;
    println!("{}: threshold {:.6} from {} H0 trials", cfg.detector, cal.threshold, cal.trials);

    let holdout = 20_000;
    let hits = count_exceedances(&exp, cal.threshold, None, purpose::HOLDOUT, holdout)?;
    let (lo, hi) = subdet::harness::wilson_interval(hits, holdout);
    println!("hold-out Pfa {:.5}  (95% CI {lo:.5} .. {hi:.5})", hits as f64 / holdout as f64);
    Ok(())
}
