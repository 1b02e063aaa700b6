//! False-alarm rate under conditions that differ from the calibration run:
//! correlated clutter for all detectors, and a different secondary power
//! level for the partially homogeneous ones.

use subdet::harness::{calibrate_experiment, count_exceedances, purpose, Experiment, ExperimentConfig};
use subdet::prelude::*;

fn main() -> subdet::Result<()> {
    let holdout = 5_000;
    for det in Detector::ALL {
        let mut cfg = ExperimentConfig::desk(det);
        if det == Detector::FoUsPhe {
            cfg.scenario.k_p = 8;
        }
        cfg.calib_trials = 5_000;
        let exp = Experiment::new(&cfg)?;
        let eta = calibrate_experiment(&exp)?.threshold;

        let mut shifted = cfg.clone();
        shifted.scenario.clutter_rho = 0.9;
        if det.is_phe() {
            shifted.scenario.env = Environment::PartiallyHomogeneous { gamma_true: 4.0 };
        }
        let mut exp2 = Experiment::new(&shifted)?;
        exp2.h = exp.h.clone();
        let hits = count_exceedances(&exp2, eta, None, purpose::HOLDOUT, holdout)?;
        println!("{:<10} target {:.3}  observed {:.4}", det.label(), cfg.pfa_target, hits as f64 / holdout as f64);
    }
    Ok(())
}
