#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use subdet::numerics::{c64, hermitize, identity, orthonormalize_columns, ComplexMatrix};
use subdet::scenario::{generate, random_direction, random_wishart, sample_subspace, DataSet, ScenarioConfig, SignalModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cgauss(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(s * re, s * im)
    })
}

pub fn random_pd(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let a = cgauss(n, 2 * n + 1, rng);
    hermitize(&(&a * a.adjoint()))
}

pub fn random_psd(n: usize, rank: usize, scale: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let a = cgauss(n, rank, rng) * c64(scale.sqrt(), 0.0);
    hermitize(&(&a * a.adjoint()))
}

/// Log-uniform positive values on `[10^lo, 10^hi]`.
pub fn log_uniform(count: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..count).map(|_| 10f64.powf(rng.random_range(lo..hi))).collect()
}

/// Descending spectrum of length `n` with `rank` positive entries.
pub fn spectrum_desc(n: usize, rank: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut v = log_uniform(rank, lo, hi, rng);
    v.sort_by(|a, b| b.total_cmp(a));
    v.resize(n, 0.0);
    v
}

pub fn unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    orthonormalize_columns(&cgauss(n, n, rng)).unwrap()
}

/// H0 or H1 data for the given dimensions. `kind` 0 is H0, 1 first-order,
/// 2 second-order; the signal strength is drawn at random.
pub fn instance(n: usize, r: usize, k_p: usize, k_s: usize, kind: u8, seed: u64) -> (DataSet, ComplexMatrix) {
    let mut g = rng(seed ^ 0x5eed);
    let h = sample_subspace(n, r, seed.wrapping_mul(31).wrapping_add(7)).unwrap();
    let cfg = ScenarioConfig::new(n, r, k_p, k_s);
    let power = 10f64.powf(g.random_range(-1.0..2.0));
    let signal = match kind {
        0 => None,
        1 => Some(SignalModel::first_order(h.clone(), random_direction(r, k_p, seed) * c64(power.sqrt() * 3.0, 0.0)).unwrap()),
        _ => Some(SignalModel::second_order(h.clone(), random_wishart(r, seed) * c64(power * 3.0, 0.0)).unwrap()),
    };
    let data = generate(&cfg, signal.as_ref(), &identity(n), seed).unwrap();
    (data, h)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
