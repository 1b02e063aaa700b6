//! Second-order detectors without knowledge of the signal subspace: median
//! statistic and estimated power ratio as the signal power grows. The
//! secondary data carry twice the primary noise power, which only the PHE
//! variant models.

use subdet::numerics::identity;
use subdet::prelude::*;
use subdet::scenario::{random_wishart, sample_subspace};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> subdet::Result<()> {
    let (n, r, k_p, k_s) = (8, 2, 4, 16);
    let cfg = ScenarioConfig::new(n, r, k_p, k_s).with_env(Environment::PartiallyHomogeneous { gamma_true: 2.0 });
    let h = sample_subspace(n, r, 5)?;
    let shape = random_wishart(r, 5);
    let draws = 200;

    println!("{:>7} {:>10} {:>10} {:>10} {:>10}", "SNR dB", "SO-US-HE", "SO-US-PHE", "gamma_h0", "gamma_h1");
    for snr in [f64::NEG_INFINITY, 10.0, 15.0, 20.0, 25.0] {
        let signal = if snr.is_finite() {
            Some(SignalModel::second_order_at_snr(h.clone(), &shape, &identity(n), k_p, snr)?)
        } else {
            None
        };
        let (mut he, mut phe, mut g0, mut g1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for seed in 0..draws {
            let data = generate(&cfg, signal.as_ref(), &identity(n), seed)?;
            let stats = compute_stats(&data, None)?;
            he.push(so_us_he(&stats, r)?.statistic);
            let out = so_us_phe(&stats, r)?;
            phe.push(out.statistic);
            g0.push(out.gamma_hat_h0.unwrap_or(f64::NAN));
            g1.push(out.gamma_hat_h1.unwrap_or(f64::NAN));
        }
        println!(
            "{snr:>7} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            median(he),
            median(phe),
            median(g0),
            median(g1)
        );
    }
    Ok(())
}
