//! Detector catalogue, shared output type and a single dispatch entry point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scenario::{DataSet, SubspaceMode};
use crate::so::AltMaxOptions;
use crate::stats::compute_stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    #[serde(rename = "FO-KS-HE")]
    FoKsHe,
    #[serde(rename = "FO-KS-PHE")]
    FoKsPhe,
    #[serde(rename = "FO-US-HE")]
    FoUsHe,
    #[serde(rename = "FO-US-PHE")]
    FoUsPhe,
    #[serde(rename = "SO-US-HE")]
    SoUsHe,
    #[serde(rename = "SO-US-PHE")]
    SoUsPhe,
    #[serde(rename = "SO-KS-HE")]
    SoKsHe,
    #[serde(rename = "SO-KS-PHE")]
    SoKsPhe,
}

impl Detector {
    pub const ALL: [Detector; 8] = [
        Detector::FoKsHe,
        Detector::FoKsPhe,
        Detector::FoUsHe,
        Detector::FoUsPhe,
        Detector::SoUsHe,
        Detector::SoUsPhe,
        Detector::SoKsHe,
        Detector::SoKsPhe,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Detector::FoKsHe => "FO-KS-HE",
            Detector::FoKsPhe => "FO-KS-PHE",
            Detector::FoUsHe => "FO-US-HE",
            Detector::FoUsPhe => "FO-US-PHE",
            Detector::SoUsHe => "SO-US-HE",
            Detector::SoUsPhe => "SO-US-PHE",
            Detector::SoKsHe => "SO-KS-HE",
            Detector::SoKsPhe => "SO-KS-PHE",
        }
    }

    pub fn is_first_order(&self) -> bool {
        matches!(self, Detector::FoKsHe | Detector::FoKsPhe | Detector::FoUsHe | Detector::FoUsPhe)
    }

    pub fn is_phe(&self) -> bool {
        matches!(self, Detector::FoKsPhe | Detector::FoUsPhe | Detector::SoUsPhe | Detector::SoKsPhe)
    }

    pub fn subspace_mode(&self) -> SubspaceMode {
        match self {
            Detector::FoKsHe | Detector::FoKsPhe | Detector::SoKsHe | Detector::SoKsPhe => SubspaceMode::Known,
            _ => SubspaceMode::UnknownDim,
        }
    }

    /// Checks the dimension-only preconditions of the detector. Conditions that
    /// also depend on the data (numerical ranks) are checked at evaluation time.
    pub fn check_dims(&self, n: usize, r: usize, k_p: usize, k_s: usize) -> Result<()> {
        let k = (k_p + k_s) as f64;
        let rhs = (n * k_p) as f64 / k;
        if r == 0 || r > n {
            return Err(Error::Infeasible(format!("need 1 <= r <= N, got r={r}, N={n}")));
        }
        if k_s < n {
            return Err(Error::Infeasible(format!("need K_S >= N, got K_S={k_s}, N={n}")));
        }
        match self {
            Detector::FoKsHe | Detector::FoUsHe => Ok(()),
            Detector::FoKsPhe => {
                if r >= n {
                    return Err(Error::Infeasible("FO-KS-PHE needs r < N (the H1 likelihood is unbounded at r = N)".into()));
                }
                let t1 = k_p.min(n - r) as f64;
                if t1 <= rhs {
                    return Err(Error::Infeasible(format!(
                        "FO-KS-PHE needs t1 = min(K_P, N-r) > N*K_P/K, got t1={t1}, N*K_P/K={rhs:.4}"
                    )));
                }
                Ok(())
            }
            Detector::FoUsPhe => {
                let m1 = k_p.min(n) as f64;
                if m1 <= rhs + r as f64 {
                    return Err(Error::Infeasible(format!(
                        "FO-US-PHE needs m1 > N*K_P/K + r, got m1={m1}, N*K_P/K + r={:.4}",
                        rhs + r as f64
                    )));
                }
                Ok(())
            }
            Detector::SoUsHe => so_us_dims(r, k_p, n),
            Detector::SoUsPhe => {
                so_us_dims(r, k_p, n)?;
                if r >= k_p {
                    return Err(Error::Infeasible(format!("SO-US-PHE needs r < K_P, got r={r}, K_P={k_p}")));
                }
                if (k_p - r) * k_s <= (n - k_p) * k_p {
                    return Err(Error::Infeasible(format!(
                        "SO-US-PHE needs (K_P-r)K_S > (N-K_P)K_P, got {} <= {}",
                        (k_p - r) * k_s,
                        (n - k_p) * k_p
                    )));
                }
                Ok(())
            }
            Detector::SoKsHe | Detector::SoKsPhe => {
                if r >= n {
                    return Err(Error::Infeasible(format!("{} needs r < N", self.label())));
                }
                if r > k_p {
                    return Err(Error::Infeasible(format!(
                        "{} needs r <= K_P (K_P < r is not supported), got r={r}, K_P={k_p}",
                        self.label()
                    )));
                }
                Ok(())
            }
        }
    }
}

fn so_us_dims(r: usize, k_p: usize, n: usize) -> Result<()> {
    if r > k_p || k_p > n {
        return Err(Error::Infeasible(format!(
            "SO-US detectors need r <= K_P <= N (K_P < r is not supported), got r={r}, K_P={k_p}, N={n}"
        )));
    }
    Ok(())
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Detector::ALL
            .into_iter()
            .find(|d| d.label() == upper)
            .ok_or_else(|| Error::Config(format!("unknown detector {s:?}")))
    }
}

/// Which closed form or search produced the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The general expression.
    Standard,
    /// FO-KS-HE with `r = N` or FO-US-HE with `m1 < r + 1`: plain `det(I + T_P)`.
    FullDeterminant,
    /// The H1 γ estimate came from a bounded search rather than a root.
    IntervalSearch,
    /// The H1 γ root violated its theoretical lower bound; γ chosen by grid maximization.
    GridFallback,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Outer iterations of the alternating maximization (zero for closed forms).
    pub iterations: usize,
    pub converged: bool,
    /// Compressed H1 log-likelihood after each outer iteration.
    pub loglik_trace: Vec<f64>,
    /// Iteration counts of the scalar root solves, in call order.
    pub root_iterations: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct DetectorOutput {
    /// Ratio form for first-order detectors, log-GLR for second-order ones.
    pub statistic: f64,
    /// Natural log of the ratio form (equal to `statistic` for second-order detectors).
    pub log_statistic: f64,
    pub gamma_hat_h0: Option<f64>,
    pub gamma_hat_h1: Option<f64>,
    pub branch: Branch,
    pub diagnostics: Diagnostics,
}

impl DetectorOutput {
    pub(crate) fn from_log_ratio(log_statistic: f64, branch: Branch) -> Result<Self> {
        let statistic = log_statistic.exp();
        if !statistic.is_finite() {
            return Err(Error::Conditioning(format!("statistic overflow (log value {log_statistic})")));
        }
        Ok(DetectorOutput {
            statistic,
            log_statistic,
            gamma_hat_h0: None,
            gamma_hat_h1: None,
            branch,
            diagnostics: Diagnostics { converged: true, ..Default::default() },
        })
    }

    pub(crate) fn from_log_glr(log_glr: f64, branch: Branch) -> Result<Self> {
        if !log_glr.is_finite() {
            return Err(Error::Conditioning(format!("non-finite log-GLR {log_glr}")));
        }
        Ok(DetectorOutput {
            statistic: log_glr,
            log_statistic: log_glr,
            gamma_hat_h0: None,
            gamma_hat_h1: None,
            branch,
            diagnostics: Diagnostics { converged: true, ..Default::default() },
        })
    }
}

/// Evaluates `detector` on `data`. `h` is required by known-subspace
/// detectors and ignored otherwise; `r` is the subspace dimension.
pub fn evaluate(
    detector: Detector,
    data: &DataSet,
    h: Option<&ComplexMatrix>,
    r: usize,
    opts: &AltMaxOptions,
) -> Result<DetectorOutput> {
    detector.check_dims(data.n(), r, data.k_p(), data.k_s())?;
    let basis = || -> Result<&ComplexMatrix> {
        let h = h.ok_or_else(|| Error::Usage(format!("{detector} needs a subspace basis H")))?;
        if h.ncols() != r {
            return Err(Error::Dimension(format!("H has {} columns, r = {r}", h.ncols())));
        }
        Ok(h)
    };
    match detector {
        Detector::FoKsHe => crate::fo::fo_ks_he(&compute_stats(data, Some(basis()?))?),
        Detector::FoKsPhe => crate::fo::fo_ks_phe(&compute_stats(data, Some(basis()?))?),
        Detector::FoUsHe => crate::fo::fo_us_he(&compute_stats(data, None)?, r),
        Detector::FoUsPhe => crate::fo::fo_us_phe(&compute_stats(data, None)?, r),
        Detector::SoUsHe => crate::so::so_us_he(&compute_stats(data, None)?, r),
        Detector::SoUsPhe => crate::so::so_us_phe(&compute_stats(data, None)?, r),
        Detector::SoKsHe => crate::so::so_ks_he(data, basis()?, opts),
        Detector::SoKsPhe => crate::so::so_ks_phe(data, basis()?, opts),
    }
}
