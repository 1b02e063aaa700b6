//! First-order detectors: the signal `HX` sits in the mean of the primary data.
//!
//! All four statistics depend on the data only through the eigenvalues of
//! `T_P` and, for a known subspace, of `P_G⊥ T_P P_G⊥`. They are evaluated
//! in the log domain and exponentiated once at the end.

use crate::detector::{Branch, DetectorOutput};
use crate::error::{Error, Result};
use crate::numerics::{numerical_rank, solve_monotone_root, Infeasibility, RootBranch, RootSolveReport};
use crate::stats::{Dims, SufficientStats};

/// Residual target for the first-order γ equations.
const ROOT_TOL: f64 = 1e-12;
const GAMMA_BRACKET: (f64, f64) = (1e-8, 1e8);

/// Solves `Σ λγ/(λγ+1) = N K_P / K` over `values`, where `t` is the number
/// of terms that count towards the existence condition.
fn solve_fractional(values: &[f64], t: usize, dims: &Dims) -> RootSolveReport {
    let rhs = dims.gamma_rhs();
    let lhs = t as f64 * dims.k() as f64;
    let target = (dims.n * dims.k_p) as f64;
    if lhs < target {
        return RootSolveReport::infeasible(Infeasibility::ZeroInfimum);
    }
    if lhs == target {
        return RootSolveReport::infeasible(Infeasibility::PositiveInfimum);
    }
    let f = |g: f64| values.iter().map(|&l| 1.0 - 1.0 / (l * g + 1.0)).sum::<f64>() - rhs;
    solve_monotone_root(f, GAMMA_BRACKET, ROOT_TOL)
}

/// γ estimate minimizing `γ^{N(1-K_P/K)} Π_i (1/γ + λ_i)`: the root of
/// `Σ_k λ_k γ / (λ_k γ + 1) = N K_P / K` over the `t` largest entries of
/// `spectrum`.
///
/// `t ≤ N K_P / K` yields an infeasible report (zero infimum below, positive
/// infimum at equality).
pub fn gamma_hat_theorem1(spectrum: &[f64], t: usize, dims: &Dims) -> RootSolveReport {
    let mut sorted: Vec<f64> = spectrum.iter().map(|v| v.max(0.0)).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let t = t.min(sorted.len());
    solve_fractional(&sorted[..t], t, dims)
}

/// γ estimate for the unknown-subspace case: the same equation restricted to
/// the ascending eigenvalues `σ²_lower ..= σ²_upper` (1-based indices).
pub fn gamma_hat_corollary(spectrum: &[f64], lower: usize, upper: usize, dims: &Dims) -> RootSolveReport {
    if lower == 0 || upper > spectrum.len() || lower > upper {
        let t = if lower >= 1 && upper >= lower { upper - lower + 1 } else { 0 };
        return solve_fractional(&[], t, dims);
    }
    let slice: Vec<f64> = spectrum[lower - 1..upper].iter().map(|v| v.max(0.0)).collect();
    solve_fractional(&slice, slice.len(), dims)
}

/// `log[γ^{N(1-K_P/K) - shift} Π_i (1/γ + λ_i)]`: the γ-dependent part of
/// the log H0 likelihood after maximizing over `R`.
pub fn log_f(gamma: f64, values: &[f64], exponent: f64) -> f64 {
    exponent * gamma.ln() + values.iter().map(|&l| (1.0 / gamma + l.max(0.0)).ln()).sum::<f64>()
}

fn gamma_or_err(rep: &RootSolveReport, what: &str) -> Result<f64> {
    match rep.branch {
        RootBranch::Infeasible(kind) => Err(Error::Infeasible(format!("{what}: no minimizer over gamma ({kind:?})"))),
        _ => Ok(rep.root),
    }
}

fn require_subspace(stats: &SufficientStats) -> Result<(usize, &[f64])> {
    match (stats.r(), stats.proj_spectrum.as_ref()) {
        (Some(r), Some(p)) => Ok((r, &p.values)),
        _ => Err(Error::Usage("known-subspace detector called without a subspace basis".into())),
    }
}

/// FO-KS-HE: `det(I + T_P) / det(I + P_G⊥ T_P P_G⊥)`; reduces to
/// `det(I + T_P)` when `r = N`.
pub fn fo_ks_he(stats: &SufficientStats) -> Result<DetectorOutput> {
    let (r, proj) = require_subspace(stats)?;
    let num: f64 = stats.tp_ascending().iter().map(|s| s.ln_1p()).sum();
    if r == stats.dims.n {
        return DetectorOutput::from_log_ratio(num, Branch::FullDeterminant);
    }
    let den: f64 = proj.iter().map(|s| s.max(0.0).ln_1p()).sum();
    DetectorOutput::from_log_ratio(num - den, Branch::Standard)
}

/// FO-KS-PHE: ratio of the H0 and H1 minima of
/// `γ^{N(1-K_P/K)} det(I/γ + ·)`, with independent γ estimates under each
/// hypothesis.
pub fn fo_ks_phe(stats: &SufficientStats) -> Result<DetectorOutput> {
    let (r, proj) = require_subspace(stats)?;
    let dims = stats.dims;
    let n = dims.n;
    if r >= n {
        return Err(Error::Infeasible("FO-KS-PHE needs r < N (the H1 likelihood is unbounded at r = N)".into()));
    }
    let t1 = dims.k_p.min(n - r);
    if t1 as f64 <= dims.gamma_rhs() {
        return Err(Error::Infeasible(format!(
            "FO-KS-PHE needs t1 = min(K_P, N-r) > N*K_P/K, got t1={t1}, N*K_P/K={:.4}",
            dims.gamma_rhs()
        )));
    }
    let tp = stats.tp_ascending();
    let proj: Vec<f64> = proj.iter().map(|v| v.max(0.0)).collect();
    let rep0 = gamma_hat_theorem1(&tp, stats.m1, &dims);
    let rep1 = gamma_hat_theorem1(&proj, numerical_rank(&proj), &dims);
    let g0 = gamma_or_err(&rep0, "FO-KS-PHE under H0")?;
    let g1 = gamma_or_err(&rep1, "FO-KS-PHE under H1")?;
    let e = n as f64 * dims.k_s as f64 / dims.k() as f64;
    let log_stat = log_f(g0, &tp, e) - log_f(g1, &proj, e);
    let mut out = DetectorOutput::from_log_ratio(log_stat, Branch::Standard)?;
    out.gamma_hat_h0 = Some(g0);
    out.gamma_hat_h1 = Some(g1);
    out.diagnostics.root_iterations = vec![rep0.iterations, rep1.iterations];
    Ok(out)
}

/// FO-US-HE: product of `1 + σ²` over the `r` largest eigenvalues of `T_P`
/// when `rank(T_P) ≥ r + 1`, otherwise `det(I + T_P)`.
pub fn fo_us_he(stats: &SufficientStats, r: usize) -> Result<DetectorOutput> {
    let desc = stats.tp_descending();
    if r == 0 || r > desc.len() {
        return Err(Error::Dimension(format!("r={r} outside 1..={}", desc.len())));
    }
    if stats.m1 > r {
        let log_stat = desc[..r].iter().map(|s| s.ln_1p()).sum();
        DetectorOutput::from_log_ratio(log_stat, Branch::Standard)
    } else {
        let log_stat = desc.iter().map(|s| s.ln_1p()).sum();
        DetectorOutput::from_log_ratio(log_stat, Branch::FullDeterminant)
    }
}

/// FO-US-PHE. With `σ²` ascending, `γ̂₀` solves the γ equation over indices
/// `N-m1+1 ..= N` and `γ̂₁` over `N-m1+1 ..= N-r`; the H1 term drops the top
/// `r` eigenvalues and `r` powers of `γ̂₁`.
pub fn fo_us_phe(stats: &SufficientStats, r: usize) -> Result<DetectorOutput> {
    let dims = stats.dims;
    let n = dims.n;
    let m1 = stats.m1;
    if r == 0 || r >= n {
        return Err(Error::Dimension(format!("FO-US-PHE needs 1 <= r < N, got r={r}")));
    }
    if m1 as f64 <= dims.gamma_rhs() + r as f64 {
        return Err(Error::Infeasible(format!(
            "FO-US-PHE needs m1 > N*K_P/K + r, got m1={m1}, N*K_P/K + r={:.4}",
            dims.gamma_rhs() + r as f64
        )));
    }
    let asc = stats.tp_ascending();
    let lower = n - m1 + 1;
    let rep0 = gamma_hat_corollary(&asc, lower, n, &dims);
    let rep1 = gamma_hat_corollary(&asc, lower, n - r, &dims);
    let g0 = gamma_or_err(&rep0, "FO-US-PHE under H0")?;
    let g1 = gamma_or_err(&rep1, "FO-US-PHE under H1")?;
    let e = n as f64 * dims.k_s as f64 / dims.k() as f64;
    let log_stat = log_f(g0, &asc, e) - log_f(g1, &asc[..n - r], e - r as f64);
    let mut out = DetectorOutput::from_log_ratio(log_stat, Branch::Standard)?;
    out.gamma_hat_h0 = Some(g0);
    out.gamma_hat_h1 = Some(g1);
    out.diagnostics.root_iterations = vec![rep0.iterations, rep1.iterations];
    Ok(out)
}
