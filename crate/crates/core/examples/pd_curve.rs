//! Detection probability against SNR for every detector, written as one CSV
//! per detector under the system temp directory.

use subdet::harness::{run, summary_table, ExperimentConfig};
use subdet::prelude::*;

fn main() -> subdet::Result<()> {
    let out_dir = std::env::temp_dir().join("subdet-pd-curves");
    std::fs::create_dir_all(&out_dir)?;
    for det in Detector::ALL {
        let mut cfg = ExperimentConfig::desk(det);
        if det == Detector::FoUsPhe {
            cfg.scenario.k_p = 8;
        }
        cfg.pfa_target = 1e-2;
        cfg.calib_trials = 5_000;
        cfg.pd_trials = 500;
        cfg.snr_grid_db = vec![-5.0, 0.0, 5.0, 10.0, 15.0];
        cfg.output_path = out_dir.join(format!("{}.csv", det.label()));
        let summary = run(&cfg)?;
        print!("{}", summary_table(&summary.rows));
    }
    println!("CSV files in {}", out_dir.display());
    Ok(())
}
