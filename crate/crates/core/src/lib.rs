//! Adaptive subspace detection from a primary and a secondary channel.
//!
//! The crate implements the eight generalized-likelihood-ratio detectors
//! obtained by crossing
//!
//! * first-order (signal in the mean) vs second-order (signal in the covariance) models,
//! * known subspace `⟨H⟩` vs subspace known only by its dimension `r`,
//! * homogeneous (secondary covariance equal to the primary one) vs
//!   partially-homogeneous (secondary covariance `γR`, `γ` unknown) noise,
//!
//! together with a Monte-Carlo harness that calibrates detection thresholds
//! and estimates detection probability on synthetic data.
//!
//! ```no_run
//! use subdet::prelude::*;
//!
//! let cfg = ScenarioConfig::new(8, 2, 4, 16).with_seed(7);
//! let r = make_covariance(cfg.n, 0.5).unwrap();
//! let h = sample_subspace(cfg.n, cfg.r, 11).unwrap();
//! let data = generate(&cfg, None, &r, 3).unwrap();
//! let stats = compute_stats(&data, Some(&h)).unwrap();
//! let out = fo_ks_he(&stats).unwrap();
//! println!("FO-KS-HE statistic: {}", out.statistic);
//! ```

pub mod detector;
pub mod error;
pub mod fo;
pub mod harness;
pub mod numerics;
pub mod oracle;
pub mod scenario;
pub mod so;
pub mod stats;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::detector::{evaluate, Detector, DetectorOutput, Diagnostics};
    pub use crate::error::{Error, Result};
    pub use crate::fo::{fo_ks_he, fo_ks_phe, fo_us_he, fo_us_phe, gamma_hat_corollary, gamma_hat_theorem1};
    pub use crate::harness::{calibrate_threshold, estimate_pd, ExperimentConfig, ResultRow};
    pub use crate::numerics::{
        hermitian_eigen, inv_sqrt_pd, kron_block_solve, logdet_pd, solve_monotone_root, ComplexMatrix, EigenSpectrum,
        RootBranch, RootSolveReport,
    };
    pub use crate::scenario::{
        generate, make_covariance, sample_subspace, snr_db, DataSet, Environment, ScenarioConfig, SignalModel,
        SignalOrder, SubspaceMode,
    };
    pub use crate::so::{
        gamma_hat_theorem4, gamma_hat_theorem5, ml_two_cov, so_h1_compressed_loglik, so_ks_he, so_ks_phe, so_us_he,
        so_us_phe, AltMaxOptions, TwoCovEstimate,
    };
    pub use crate::stats::{compute_stats, Dims, SufficientStats};
}
