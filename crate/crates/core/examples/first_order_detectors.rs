//! The four first-order detectors on H0 data and on data carrying a
//! first-order signal, as medians over repeated draws.

use subdet::numerics::{c64, identity, orthonormalize_columns};
use subdet::prelude::*;
use subdet::scenario::{random_direction, sample_subspace};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> subdet::Result<()> {
    let (n, r, k_p, k_s) = (8, 2, 8, 16);
    let cfg = ScenarioConfig::new(n, r, k_p, k_s).with_rho(0.5);
    let covariance = make_covariance(n, 0.5)?;
    let h = sample_subspace(n, r, 11)?;
    let opts = AltMaxOptions::default();
    let draws = 200;

    print!("{:<10} {:>10}", "detector", "H0");
    let snrs = [10.0, 15.0, 20.0];
    for snr in snrs {
        print!(" {:>10}", format!("{snr} dB"));
    }
    println!();
    for det in Detector::ALL.into_iter().filter(|d| d.is_first_order()) {
        let mut row = Vec::new();
        for snr in std::iter::once(f64::NEG_INFINITY).chain(snrs) {
            let signal = if snr.is_finite() {
                Some(SignalModel::first_order_at_snr(h.clone(), &random_direction(r, k_p, 11), &covariance, snr)?)
            } else {
                None
            };
            let stats: subdet::Result<Vec<f64>> = (0..draws)
                .map(|seed| {
                    let data = generate(&cfg, signal.as_ref(), &covariance, seed)?;
                    Ok(evaluate(det, &data, Some(&h), r, &opts)?.statistic)
                })
                .collect();
            row.push(median(stats?));
        }
        print!("{:<10}", det.label());
        for v in row {
            print!(" {v:>10.3}");
        }
        println!();
    }

    // The whitened statistics ignore any nonsingular transform of the array.
    let signal = SignalModel::first_order_at_snr(h.clone(), &random_direction(r, k_p, 11), &covariance, 15.0)?;
    let data = generate(&cfg, Some(&signal), &covariance, 1)?;
    let a = make_covariance(n, 0.9)? * c64(3.0, 0.0) + identity(n);
    let moved = data.transformed(&a);
    let h2 = orthonormalize_columns(&(&a * &h))?;
    let before = evaluate(Detector::FoKsHe, &data, Some(&h), r, &opts)?.statistic;
    let after = evaluate(Detector::FoKsHe, &moved, Some(&h2), r, &opts)?.statistic;
    println!("FO-KS-HE before/after transform: {before:.9} / {after:.9}");
    Ok(())
}
