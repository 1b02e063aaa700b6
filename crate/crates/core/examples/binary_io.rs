//! Writes a data set and subspace basis in the binary dump format read by
//! `subdet detect`, reads them back and evaluates a detector.

use subdet::harness::io::{encode_dataset, encode_matrix, read_dataset, read_matrix};
use subdet::numerics::identity;
use subdet::prelude::*;
use subdet::scenario::{random_direction, sample_subspace};

fn main() -> subdet::Result<()> {
    let (n, r, k_p, k_s) = (6, 1, 3, 12);
    let h = sample_subspace(n, r, 2)?;
    let signal = SignalModel::first_order_at_snr(h.clone(), &random_direction(r, k_p, 2), &identity(n), 10.0)?;
    let data = generate(&ScenarioConfig::new(n, r, k_p, k_s), Some(&signal), &identity(n), 2)?;

    let dir = std::env::temp_dir().join("subdet-binary-io");
    std::fs::create_dir_all(&dir)?;
    let data_path = dir.join("data.bin");
    let h_path = dir.join("h.bin");
    std::fs::write(&data_path, encode_dataset(&data))?;
    std::fs::write(&h_path, encode_matrix(&h))?;

    let back = read_dataset(&data_path)?;
    let h_back = read_matrix(&h_path)?;
    assert_eq!(back.z_p, data.z_p);
    let out = evaluate(Detector::FoKsHe, &back, Some(&h_back), r, &AltMaxOptions::default())?;
    println!("wrote {} and {}", data_path.display(), h_path.display());
    println!("FO-KS-HE statistic {:.6}", out.statistic);
    println!("try: subdet detect --config crates/core/examples/configs/fo_ks_he.toml --data {} --subspace {}", data_path.display(), h_path.display());
    Ok(())
}
