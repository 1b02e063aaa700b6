mod common;

use common::*;
use proptest::prelude::*;
use subdet::detector::{evaluate, Detector};
use subdet::numerics::{c64, frobenius, hermitian_eigen, identity, orthonormalize_columns, solve_monotone_root, trace};
use subdet::oracle::reference_eigenvalues;
use subdet::scenario::{generate, substream, ScenarioConfig};
use subdet::so::{ml_two_cov, AltMaxOptions};
use subdet::stats::compute_stats;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn stat(det: Detector, data: &subdet::scenario::DataSet, h: &subdet::numerics::ComplexMatrix, r: usize) -> f64 {
    evaluate(det, data, Some(h), r, &AltMaxOptions::default()).unwrap().statistic
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn eigen_matches_reference(n in 1usize..9, seed in any::<u64>()) {
        let a = random_pd(n, &mut rng(seed));
        let eig = hermitian_eigen(&a).unwrap();
        let mut reference = reference_eigenvalues(&a);
        reference.sort_by(f64::total_cmp);
        let mut ours = eig.values.clone();
        ours.sort_by(f64::total_cmp);
        let scale = reference.last().copied().unwrap_or(1.0);
        for (x, y) in ours.iter().zip(&reference) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
        prop_assert!((ours.iter().sum::<f64>() - trace(&a).re).abs() <= 1e-10 * scale * n as f64);
        prop_assert!(frobenius(&(eig.reconstruct() - &a)) <= 1e-10 * frobenius(&a));
    }

    #[test]
    fn first_order_ratios_at_least_one(kind in 0u8..3, k_p in 3usize..9, seed in any::<u64>()) {
        let (data, h) = instance(8, 2, k_p, 16, kind, seed);
        for det in [Detector::FoKsHe, Detector::FoKsPhe, Detector::FoUsHe] {
            prop_assert!(stat(det, &data, &h, 2) >= 1.0 - 1e-12, "{det}");
        }
        if k_p == 8 {
            prop_assert!(stat(Detector::FoUsPhe, &data, &h, 2) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn common_scale_leaves_statistics_unchanged(kind in 0u8..3, seed in any::<u64>(), log_c in -2.0f64..2.0) {
        let (data, h) = instance(8, 2, 6, 16, kind, seed);
        let c = c64(10f64.powf(log_c), 0.0);
        let scaled = data.transformed(&(identity(8) * c));
        for det in Detector::ALL {
            let (a, b) = (stat(det, &data, &h, 2), stat(det, &scaled, &h, 2));
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{det}: {a} vs {b}");
        }
    }

    #[test]
    fn phe_detectors_ignore_secondary_power(kind in 0u8..3, seed in any::<u64>(), log_c in -1.0f64..1.0) {
        let (data, h) = instance(8, 2, 6, 16, kind, seed);
        let mut louder = data.clone();
        louder.z_s *= c64(10f64.powf(log_c), 0.0);
        for det in Detector::ALL.into_iter().filter(|d| d.is_phe()) {
            let (a, b) = (stat(det, &data, &h, 2), stat(det, &louder, &h, 2));
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{det}: {a} vs {b}");
        }
    }

    #[test]
    fn whitened_spectrum_invariant(seed in any::<u64>(), k_p in 1usize..10) {
        let (data, h) = instance(6, 2, k_p, 12, 2, seed);
        let a = cgauss(6, 6, &mut rng(seed ^ 1));
        let moved = data.transformed(&a);
        let h2 = orthonormalize_columns(&(&a * &h)).unwrap();
        let s1 = compute_stats(&data, Some(&h)).unwrap();
        let s2 = compute_stats(&moved, Some(&h2)).unwrap();
        prop_assert_eq!(s1.m1, s2.m1);
        let top = s1.tp_descending()[0].max(1.0);
        for (x, y) in s1.tp_descending().iter().zip(s2.tp_descending()) {
            prop_assert!((x - y).abs() <= 1e-8 * top);
        }
        let (p1, p2) = (s1.proj_spectrum.as_ref().unwrap(), s2.proj_spectrum.as_ref().unwrap());
        for (x, y) in p1.descending().iter().zip(p2.descending()) {
            prop_assert!((x - y).abs() <= 1e-8 * top);
        }
    }

    #[test]
    fn root_solver_stays_in_bracket(c in -8.0f64..8.0, slope in 0.1f64..10.0) {
        let f = |x: f64| c - slope * x.ln();
        let rep = solve_monotone_root(f, (1e-4, 1e4), 1e-12);
        let expected = (c / slope).exp();
        prop_assert!(rep.is_feasible());
        prop_assert!(rep.root >= rep.bracket.0 && rep.root <= rep.bracket.1);
        prop_assert!(rep.residual.abs() <= 1e-12);
        prop_assert!((rep.root - expected).abs() <= 1e-9 * expected);
        prop_assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn root_solver_reports_missing_sign_change(c in 0.1f64..10.0) {
        let rep = solve_monotone_root(|x: f64| c + x * x, (1e-4, 1e4), 1e-12);
        prop_assert!(!rep.is_feasible());
    }

    #[test]
    fn two_cov_estimate_is_consistent(n in 1usize..7, k_p in 1usize..8, extra in 0usize..6, seed in any::<u64>(), log_g in -1.0f64..1.0) {
        let mut g = rng(seed);
        let k_s = n + extra;
        let zs = cgauss(n, k_s, &mut g);
        let zp = cgauss(n, k_p, &mut g) * c64(3.0, 0.0);
        let s_s = &zs * zs.adjoint();
        let s_p = &zp * zp.adjoint();
        let est = ml_two_cov(&s_p, &s_s, 10f64.powf(log_g), k_p, k_s).unwrap();
        prop_assert!(est.lambda_hat.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(est.lambda_hat.iter().all(|&l| l >= 1.0));
        prop_assert!(est.gammas.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        // R̃_s is PSD with rank at most min(N, K_P).
        let eig = hermitian_eigen(&est.rs_tilde_hat).unwrap();
        let scale = eig.max().abs().max(1.0);
        prop_assert!(eig.values.iter().all(|&v| v >= -1e-9 * scale));
        let rank = eig.values.iter().filter(|&&v| v > 1e-9 * scale).count();
        prop_assert!(rank <= n.min(k_p));
        prop_assert!(est.loglik.is_finite());
    }

    #[test]
    fn substreams_are_reproducible(master in any::<u64>(), purpose in 1u64..6, index in any::<u64>()) {
        let cfg = ScenarioConfig::new(4, 1, 2, 8);
        let gen = subdet::scenario::Generator::new(&cfg, None, &identity(4)).unwrap();
        let a = gen.draw(&mut substream(master, purpose, index));
        let b = gen.draw(&mut substream(master, purpose, index));
        prop_assert_eq!(a.z_p, b.z_p);
        let c = gen.draw(&mut substream(master, purpose, index.wrapping_add(1)));
        prop_assert_ne!(a.z_s, c.z_s);
    }
}

#[test]
fn generate_is_seeded() {
    let cfg = ScenarioConfig::new(5, 1, 3, 10);
    let a = generate(&cfg, None, &identity(5), 9).unwrap();
    let b = generate(&cfg, None, &identity(5), 9).unwrap();
    assert_eq!(a.z_s, b.z_s);
}
