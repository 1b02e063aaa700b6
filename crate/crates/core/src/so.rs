//! Second-order detectors: the signal enters the primary covariance as
//! `H R_s H† + R`.
//!
//! Statistics are log-GLRs. Log-likelihoods keep every constant term so that
//! H0 and H1 values are directly comparable.

use std::f64::consts::PI;

use crate::detector::{Branch, DetectorOutput, Diagnostics};
use crate::error::{Error, Result};
use crate::fo::gamma_hat_theorem1;
use crate::numerics::{
    c64, from_real_diag, hermitian_eigen, hermitize, identity, inv_pd, inv_sqrt_pd, kron_block_solve, logdet_pd,
    scan_golden_max, solve_monotone_root, sqrt_pd, trace, ComplexMatrix, Infeasibility, RootBranch, RootSolveReport,
};
use crate::scenario::DataSet;
use crate::stats::{compute_stats, Dims, SufficientStats};

const ROOT_TOL: f64 = 1e-11;
const GAMMA_BRACKET: (f64, f64) = (1e-8, 1e8);
const SEARCH_TOL: f64 = 1e-10;
const SEARCH_POINTS: usize = 400;

#[derive(Debug, Clone, Copy)]
pub struct AltMaxOptions {
    pub max_iters: usize,
    /// Stop when the relative log-likelihood increase drops below this.
    pub tol: f64,
}

impl Default for AltMaxOptions {
    fn default() -> Self {
        AltMaxOptions { max_iters: 200, tol: 1e-8 }
    }
}

/// `max(K_S γ γ_i / K_P, 1)`.
fn lambda_hat(gamma: f64, gi: f64, dims: &Dims) -> f64 {
    (dims.k_s as f64 * gamma * gi / dims.k_p as f64).max(1.0)
}

/// γ-dependent part of the H0 log-likelihood maximized over `R`:
/// `N K ln K − N K_S ln γ − K Σ ln(1/γ + γ_i)`.
fn h0_core(gamma: f64, spectrum: &[f64], dims: &Dims) -> f64 {
    let (n, k, k_s) = (dims.n as f64, dims.k() as f64, dims.k_s as f64);
    n * k * k.ln() - n * k_s * gamma.ln() - k * spectrum.iter().map(|&g| (1.0 / gamma + g.max(0.0)).ln()).sum::<f64>()
}

/// Terms shared by the H0 and H1 log-likelihoods.
fn common_terms(logdet_s_s: f64, dims: &Dims) -> f64 {
    let (n, k) = (dims.n as f64, dims.k() as f64);
    -n * k * PI.ln() - k * logdet_s_s - n * k
}

/// H0 log-likelihood maximized over `R` at a given γ.
pub fn h0_loglik(gamma: f64, spectrum: &[f64], logdet_s_s: f64, dims: &Dims) -> f64 {
    common_terms(logdet_s_s, dims) + h0_core(gamma, spectrum, dims)
}

/// γ-dependent part of the compressed H1 log-likelihood with at most `r`
/// signal eigenvalues. `spectrum` is descending.
fn h1_core(gamma: f64, spectrum: &[f64], dims: &Dims, r: usize) -> f64 {
    let (k, k_s, k_p) = (dims.k() as f64, dims.k_s as f64, dims.k_p as f64);
    let g_r = spectrum[r - 1].max(0.0);
    let mut acc = -(dims.n as f64) * k_s * gamma.ln();
    let below = g_r == 0.0 || gamma < (k_p / k_s) / g_r;
    for (i, &gi) in spectrum.iter().enumerate() {
        let gi = gi.max(0.0);
        if i < r {
            if below {
                let l = lambda_hat(gamma, gi, dims);
                acc += k * (gamma * k / (gamma * gi + l)).ln() + k_s * l.ln();
            } else {
                acc += k * (k_p / gi).ln() + k_s * (k_s * gamma * gi / k_p).ln();
            }
        } else {
            acc += k * (gamma * k / (gamma * gi + 1.0)).ln();
        }
    }
    acc
}

fn check_so_dims(spectrum: &[f64], dims: &Dims, r: usize) -> Result<()> {
    if spectrum.len() != dims.n {
        return Err(Error::Dimension(format!("spectrum has {} entries, N = {}", spectrum.len(), dims.n)));
    }
    if r == 0 || r > dims.n {
        return Err(Error::Dimension(format!("r={r} outside 1..={}", dims.n)));
    }
    if dims.k_p < r {
        return Err(Error::Infeasible(format!("K_P < r is not supported (K_P={}, r={r})", dims.k_p)));
    }
    Ok(())
}

/// Compressed H1 log-likelihood at γ when `R_s` has rank at most `r`.
///
/// `spectrum` holds the descending eigenvalues of `S_S^{-1/2} S_P S_S^{-1/2}`.
/// Below `γ = (K_P/K_S)/γ_r` the top `r` eigenvalues use
/// `λ̂_i = max(K_S γ γ_i / K_P, 1)`; at or above it every one of them is active.
pub fn so_h1_compressed_loglik(gamma: f64, spectrum: &[f64], logdet_s_s: f64, dims: &Dims, r: usize) -> Result<f64> {
    check_so_dims(spectrum, dims, r)?;
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    Ok(common_terms(logdet_s_s, dims) + h1_core(gamma, spectrum, dims, r))
}

/// Closed-form maximizer of the two-covariance likelihood.
#[derive(Debug, Clone)]
pub struct TwoCovEstimate {
    pub r_hat: ComplexMatrix,
    pub rs_tilde_hat: ComplexMatrix,
    pub m_hat: ComplexMatrix,
    /// `λ̂_i`, descending.
    pub lambda_hat: Vec<f64>,
    pub d2_hat: Vec<f64>,
    /// Descending eigenvalues of `S_S^{-1/2} S_P S_S^{-1/2}`.
    pub gammas: Vec<f64>,
    pub loglik: f64,
}

/// Maximizes `h(R, R̃_s, γ)` over `R` positive definite and `R̃_s` positive
/// semidefinite, for sample matrices of any dimension `n`.
pub fn ml_two_cov(s_p: &ComplexMatrix, s_s: &ComplexMatrix, gamma: f64, k_p: usize, k_s: usize) -> Result<TwoCovEstimate> {
    let n = s_s.nrows();
    if !s_s.is_square() || s_p.shape() != (n, n) {
        return Err(Error::Dimension(format!("S_P {:?} vs S_S {:?}", s_p.shape(), s_s.shape())));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let dims = Dims::new(n, k_p, k_s);
    let k = dims.k() as f64;
    let w = inv_sqrt_pd(s_s)?;
    let spec = hermitian_eigen(&hermitize(&(&w * s_p * &w)))?;
    let order: Vec<usize> = (0..n).rev().collect();
    let gammas: Vec<f64> = order.iter().map(|&i| spec.values[i].max(0.0)).collect();
    let v = ComplexMatrix::from_fn(n, n, |row, col| spec.vectors[(row, order[col])]);
    let kmat = sqrt_pd(s_s)? * v;

    let lambda_hat: Vec<f64> = gammas.iter().map(|&g| lambda_hat(gamma, g, &dims)).collect();
    let d2_hat: Vec<f64> = gammas.iter().zip(&lambda_hat).map(|(&g, &l)| gamma * k / (gamma * g + l)).collect();
    let scale: Vec<f64> = d2_hat.iter().zip(&lambda_hat).map(|(d, l)| 1.0 / (d * l).sqrt()).collect();
    let m_hat = &kmat * from_real_diag(&scale);
    let r_hat = hermitize(&(&m_hat * m_hat.adjoint()));
    let excess: Vec<f64> = lambda_hat.iter().map(|l| l - 1.0).collect();
    let rs_tilde_hat = hermitize(&(&m_hat * from_real_diag(&excess) * m_hat.adjoint()));

    let logdet_s_s = logdet_pd(s_s)?;
    let loglik = -(n as f64) * k_s as f64 * gamma.ln() - k * logdet_s_s - n as f64 * k
        + d2_hat
            .iter()
            .zip(&lambda_hat)
            .map(|(d, l)| k * d.ln() + k_s as f64 * l.ln())
            .sum::<f64>();
    Ok(TwoCovEstimate { r_hat, rs_tilde_hat, m_hat, lambda_hat, d2_hat, gammas, loglik })
}

/// The raw objective
/// `−n K_S ln γ − K_P ln det(R̃_s + R) − K_S ln det R − tr((R̃_s + R)⁻¹ S_P) − tr(R⁻¹ S_S)/γ`.
pub fn two_cov_objective(
    r: &ComplexMatrix,
    rs: &ComplexMatrix,
    s_p: &ComplexMatrix,
    s_s: &ComplexMatrix,
    gamma: f64,
    k_p: usize,
    k_s: usize,
) -> Result<f64> {
    let n = r.nrows() as f64;
    let total = hermitize(&(rs + r));
    let total_inv = inv_pd(&total)?;
    let r_inv = inv_pd(r)?;
    Ok(-n * k_s as f64 * gamma.ln() - k_p as f64 * logdet_pd(&total)? - k_s as f64 * logdet_pd(r)?
        - trace(&(total_inv * s_p)).re
        - trace(&(r_inv * s_s)).re / gamma)
}

/// SO-US-HE log-GLR at γ = 1:
/// `Σ_{i≤r} [K ln((1+γ_i)/(γ_i+λ̂_i)) + K_S ln λ̂_i]`, exactly zero when
/// every `λ̂_i = 1`.
pub fn so_us_he(stats: &SufficientStats, r: usize) -> Result<DetectorOutput> {
    let dims = stats.dims;
    if r > dims.k_p || dims.k_p > dims.n {
        return Err(Error::Infeasible(format!(
            "SO-US-HE needs r <= K_P <= N, got r={r}, K_P={}, N={}",
            dims.k_p, dims.n
        )));
    }
    let desc = stats.tp_descending();
    check_so_dims(&desc, &dims, r)?;
    let (k, k_s) = (dims.k() as f64, dims.k_s as f64);
    let mut log_glr = 0.0;
    for &g in &desc[..r] {
        let l = lambda_hat(1.0, g, &dims);
        if l > 1.0 {
            log_glr += k * ((1.0 + g) / (g + l)).ln() + k_s * l.ln();
        }
    }
    let mut out = DetectorOutput::from_log_glr(log_glr, Branch::Standard)?;
    out.gamma_hat_h0 = Some(1.0);
    out.gamma_hat_h1 = Some(1.0);
    Ok(out)
}

/// Maximizer of the compressed H1 likelihood over γ for the unknown-subspace
/// model: root of `Σ_{i=r+1}^{K_P} K/(γγ_i + 1) = (K_P − r)K_S − (N − K_P)K_P`.
///
/// Infeasible unless `(K_P − r)K_S > (N − K_P)K_P`. A root below
/// `(K_P/K_S)/γ_r` is replaced by a grid maximization of the likelihood and
/// reported with [`RootBranch::IntervalSearch`].
pub fn gamma_hat_theorem4(spectrum: &[f64], dims: &Dims, r: usize) -> RootSolveReport {
    let (n, k_p, k_s) = (dims.n, dims.k_p, dims.k_s);
    if spectrum.len() != n || r == 0 || r >= k_p || k_p > n {
        return RootSolveReport::infeasible(Infeasibility::ConditionViolated);
    }
    if (k_p - r) * k_s <= (n - k_p) * k_p {
        return RootSolveReport::infeasible(Infeasibility::ConditionViolated);
    }
    let k = dims.k() as f64;
    let rhs = ((k_p - r) * k_s) as f64 - ((n - k_p) * k_p) as f64;
    let active: Vec<f64> = spectrum[r..k_p].iter().map(|g| g.max(0.0)).collect();
    let f = |g: f64| active.iter().map(|&gi| k / (g * gi + 1.0)).sum::<f64>() - rhs;
    let mut rep = solve_monotone_root(f, GAMMA_BRACKET, ROOT_TOL);
    if !rep.is_feasible() {
        return rep;
    }
    let g_r = spectrum[r - 1].max(0.0);
    let bound = if g_r > 0.0 { (k_p as f64 / k_s as f64) / g_r } else { f64::INFINITY };
    if rep.root < bound {
        let hi = if bound.is_finite() { bound.max(rep.root) * 1e3 } else { rep.root * 1e6 };
        let lo = rep.root.min(bound) * 1e-3;
        let (x, _) = scan_golden_max(|g| h1_core(g, spectrum, dims, r), lo, hi, 4 * SEARCH_POINTS, SEARCH_TOL);
        rep.root = x;
        rep.residual = f(x);
        rep.branch = RootBranch::IntervalSearch;
    }
    rep
}

fn gamma_hat_h0(stats: &SufficientStats) -> Result<(f64, RootSolveReport)> {
    let rep = gamma_hat_theorem1(&stats.tp_ascending(), stats.m1, &stats.dims);
    match rep.branch {
        RootBranch::Infeasible(kind) => {
            Err(Error::Infeasible(format!("H0 likelihood has no maximizer over gamma ({kind:?})")))
        }
        _ => Ok((rep.root, rep)),
    }
}

/// SO-US-PHE log-GLR: H1 likelihood at the γ of [`gamma_hat_theorem4`]
/// minus the H0 likelihood maximized over γ.
pub fn so_us_phe(stats: &SufficientStats, r: usize) -> Result<DetectorOutput> {
    let dims = stats.dims;
    let desc = stats.tp_descending();
    check_so_dims(&desc, &dims, r)?;
    let rep1 = gamma_hat_theorem4(&desc, &dims, r);
    if let RootBranch::Infeasible(kind) = rep1.branch {
        return Err(Error::Infeasible(format!(
            "SO-US-PHE needs r < K_P <= N and (K_P-r)K_S > (N-K_P)K_P ({kind:?}; r={r}, N={}, K_P={}, K_S={})",
            dims.n, dims.k_p, dims.k_s
        )));
    }
    let (g0, rep0) = gamma_hat_h0(stats)?;
    let log_glr = h1_core(rep1.root, &desc, &dims, r) - h0_core(g0, &desc, &dims);
    let branch = if rep1.branch == RootBranch::IntervalSearch { Branch::GridFallback } else { Branch::Standard };
    let mut out = DetectorOutput::from_log_glr(log_glr, branch)?;
    out.gamma_hat_h0 = Some(g0);
    out.gamma_hat_h1 = Some(rep1.root);
    out.diagnostics.root_iterations = vec![rep0.iterations, rep1.iterations];
    if branch == Branch::GridFallback {
        out.diagnostics.warnings.push("gamma root fell below its lower bound; grid maximization used".into());
    }
    Ok(out)
}

/// Objective maximized over γ by the known-subspace PHE detector, up to
/// constants: `−K Σ ln(1/γ + δ_i) − N K_S ln γ + Σ_{i≤r} [K ln(γK/(γγ_i + λ̂_i)) + K_S ln λ̂_i]`.
///
/// `gammas` are the `r` descending eigenvalues of the reduced `r × r`
/// system, `deltas` the `N − r` eigenvalues of `B̃22^{-1/2} Ã22 B̃22^{-1/2}`.
pub fn so_ks_gamma_objective(gamma: f64, gammas: &[f64], deltas: &[f64], dims: &Dims) -> f64 {
    let (k, k_s) = (dims.k() as f64, dims.k_s as f64);
    let tail: f64 = deltas.iter().map(|&d| (1.0 / gamma + d.max(0.0)).ln()).sum();
    let head: f64 = gammas
        .iter()
        .map(|&g| {
            let g = g.max(0.0);
            let l = lambda_hat(gamma, g, dims);
            k * (gamma * k / (gamma * g + l)).ln() + k_s * l.ln()
        })
        .sum();
    -k * tail - dims.n as f64 * k_s * gamma.ln() + head
}

/// γ for one outer step of the known-subspace PHE maximization.
///
/// Solves `Σ_{i≤m} 1/(1 + γδ_i) + (N − r − m) − (N − r)K_S/K = 0` with
/// `m = min(K_P, N − r)`. A root at or above `(K_P/K_S)/γ_r` is returned;
/// otherwise the objective is maximized over the interval between the two.
pub fn gamma_hat_theorem5(gammas: &[f64], deltas: &[f64], dims: &Dims, r: usize) -> RootSolveReport {
    let n = dims.n;
    if r == 0 || r >= n || gammas.len() != r || deltas.len() != n - r || dims.k_p < r {
        return RootSolveReport::infeasible(Infeasibility::ConditionViolated);
    }
    let mut d: Vec<f64> = deltas.iter().map(|v| v.max(0.0)).collect();
    d.sort_by(|a, b| b.total_cmp(a));
    let m = dims.k_p.min(n - r);
    let constant = (n - r - m) as f64 - ((n - r) * dims.k_s) as f64 / dims.k() as f64;
    let f = |g: f64| d[..m].iter().map(|&di| 1.0 / (1.0 + g * di)).sum::<f64>() + constant;
    let mut rep = solve_monotone_root(f, GAMMA_BRACKET, ROOT_TOL);
    if !rep.is_feasible() {
        return rep;
    }
    let g_r = gammas.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
    let bound = if g_r > 0.0 { (dims.k_p as f64 / dims.k_s as f64) / g_r } else { f64::INFINITY };
    if rep.root < bound {
        let hi = if bound.is_finite() { bound } else { rep.root * 1e12 };
        let obj = |g: f64| so_ks_gamma_objective(g, gammas, &d, dims);
        let (x, _) = scan_golden_max(obj, rep.root, hi, SEARCH_POINTS, SEARCH_TOL);
        rep.root = x;
        rep.residual = f(x);
        rep.branch = RootBranch::IntervalSearch;
    }
    rep
}

/// Data rotated into the `[H H⊥]` frame and split into `r` and `N − r` blocks.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub dims: Dims,
    pub r: usize,
    pub a11: ComplexMatrix,
    pub a12: ComplexMatrix,
    pub a21: ComplexMatrix,
    pub a22: ComplexMatrix,
    pub b11: ComplexMatrix,
    pub b12: ComplexMatrix,
    pub b21: ComplexMatrix,
    pub b22: ComplexMatrix,
    /// Eigenvalues of `B̃22^{-1/2} Ã22 B̃22^{-1/2}`, descending.
    pub deltas: Vec<f64>,
}

/// Orthonormal basis of the complement of `⟨H⟩`.
pub fn complete_basis(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, r) = h.shape();
    let p = hermitize(&(identity(n) - h * h.adjoint()));
    let spec = hermitian_eigen(&p)?;
    Ok(spec.vectors.columns(r, n - r).into_owned())
}

impl BlockPartition {
    pub fn new(data: &DataSet, h: &ComplexMatrix) -> Result<Self> {
        let n = data.n();
        let r = h.ncols();
        if h.nrows() != n || r == 0 || r >= n {
            return Err(Error::Dimension(format!("H is {:?}, need {n}xr with 1 <= r < {n}", h.shape())));
        }
        let mut v = ComplexMatrix::zeros(n, n);
        v.columns_mut(0, r).copy_from(h);
        v.columns_mut(r, n - r).copy_from(&complete_basis(h)?);
        Self::with_rotation(data, &v, r)
    }

    /// Partition under an explicit unitary `V` whose first `r` columns span `⟨H⟩`.
    pub fn with_rotation(data: &DataSet, v: &ComplexMatrix, r: usize) -> Result<Self> {
        let n = data.n();
        let zp = v.adjoint() * &data.z_p;
        let zs = v.adjoint() * &data.z_s;
        let a = hermitize(&(&zp * zp.adjoint()));
        let b = hermitize(&(&zs * zs.adjoint()));
        let m = n - r;
        let blk = |x: &ComplexMatrix, i0: usize, rows: usize, j0: usize, cols: usize| x.view((i0, j0), (rows, cols)).into_owned();
        let a22 = blk(&a, r, m, r, m);
        let b22 = blk(&b, r, m, r, m);
        let w = inv_sqrt_pd(&b22)?;
        let mut deltas: Vec<f64> = hermitian_eigen(&hermitize(&(&w * &a22 * &w)))?
            .values
            .iter()
            .map(|x| x.max(0.0))
            .collect();
        deltas.reverse();
        Ok(BlockPartition {
            dims: Dims::new(n, data.k_p(), data.k_s()),
            r,
            a11: blk(&a, 0, r, 0, r),
            a12: blk(&a, 0, r, r, m),
            a21: blk(&a, r, m, 0, r),
            a22,
            b11: blk(&b, 0, r, 0, r),
            b12: blk(&b, 0, r, r, m),
            b21: blk(&b, r, m, 0, r),
            b22,
            deltas,
        })
    }

    /// Initial β from the secondary data only: `R̃22⁻¹ R̃21` with `R̃ = V†(S_S/K_S)V`.
    pub fn initial_beta(&self) -> Result<ComplexMatrix> {
        Ok(inv_pd(&self.b22)? * &self.b21)
    }

    /// β maximizing the H0 likelihood at γ: `(Ã22 + B̃22/γ)⁻¹ (Ã21 + B̃21/γ)`.
    pub fn h0_beta(&self, gamma: f64) -> Result<ComplexMatrix> {
        let g = c64(1.0 / gamma, 0.0);
        Ok(inv_pd(&hermitize(&(&self.a22 + &self.b22 * g)))? * (&self.a21 + &self.b21 * g))
    }

    /// `B Ã B†` and `B B̃ B†` for `B = [I_r, −β†]`.
    pub fn reduced(&self, beta: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
        let bt = beta.adjoint();
        let sp = &self.a11 - &bt * &self.a21 - &self.a12 * beta + &bt * &self.a22 * beta;
        let ss = &self.b11 - &bt * &self.b21 - &self.b12 * beta + &bt * &self.b22 * beta;
        (hermitize(&sp), hermitize(&ss))
    }

    /// Part of the compressed H1 log-likelihood that does not depend on
    /// `(β, R̃1.2, R_s)`: everything coming from the `N − r` block.
    fn block22_terms(&self, gamma: f64) -> Result<f64> {
        let (n, k, k_s) = (self.dims.n as f64, self.dims.k() as f64, self.dims.k_s as f64);
        let m = (self.dims.n - self.r) as f64;
        let logdet_b22 = logdet_pd(&self.b22)?;
        let logdet = logdet_b22 + self.deltas.iter().map(|&d| (d + 1.0 / gamma).ln()).sum::<f64>();
        Ok(-n * k * PI.ln() + m * k * (k.ln() - 1.0) - m * k_s * gamma.ln() - k * logdet)
    }

    /// Compressed H1 log-likelihood at `(β, γ)` with `R̃1.2, R_s` at their
    /// conditional maximum.
    pub fn profile_loglik(&self, beta: &ComplexMatrix, gamma: f64) -> Result<(f64, TwoCovEstimate)> {
        let (sp, ss) = self.reduced(beta);
        let est = ml_two_cov(&sp, &ss, gamma, self.dims.k_p, self.dims.k_s)?;
        Ok((self.block22_terms(gamma)? + est.loglik, est))
    }

    /// Full H1 log-likelihood at `(β, R̃1.2, R_s, γ)`, with `R̃22` at its
    /// conditional maximum.
    pub fn loglik_at(&self, beta: &ComplexMatrix, r12: &ComplexMatrix, rs: &ComplexMatrix, gamma: f64) -> Result<f64> {
        let (sp, ss) = self.reduced(beta);
        Ok(self.block22_terms(gamma)? + two_cov_objective(r12, rs, &sp, &ss, gamma, self.dims.k_p, self.dims.k_s)?)
    }

    /// `tr[(R_s + R̃1.2)⁻¹ B Ã B†] + tr[R̃1.2⁻¹ B B̃ B†]/γ`, the function of β
    /// minimized by [`beta_step`].
    pub fn beta_objective(&self, beta: &ComplexMatrix, r12: &ComplexMatrix, rs: &ComplexMatrix, gamma: f64) -> Result<f64> {
        let (sp, ss) = self.reduced(beta);
        let p = inv_pd(&hermitize(&(rs + r12)))?;
        let q = inv_pd(r12)?;
        Ok(trace(&(p * sp)).re + trace(&(q * ss)).re / gamma)
    }
}

/// ML estimate of `R̃22` given γ: `(Ã22 + B̃22/γ)/K`.
pub fn estimate_r22(partition: &BlockPartition, gamma: f64) -> ComplexMatrix {
    let k = partition.dims.k() as f64;
    hermitize(&((&partition.a22 + &partition.b22 * c64(1.0 / gamma, 0.0)) * c64(1.0 / k, 0.0)))
}

/// Minimizer over β of [`BlockPartition::beta_objective`] for fixed
/// `R̃1.2` and `R_s`.
pub fn beta_step(partition: &BlockPartition, r12: &ComplexMatrix, rs: &ComplexMatrix, gamma: f64) -> Result<ComplexMatrix> {
    let p = inv_pd(&hermitize(&(rs + r12)))?;
    let q = inv_pd(r12)?;
    let g = c64(1.0 / gamma, 0.0);
    let c = partition.a12.transpose() * p.transpose() + partition.b12.transpose() * q.transpose() * g;
    let beta_conj = kron_block_solve(&p, &partition.a22, &q, &partition.b22, &c, gamma)?;
    Ok(beta_conj.conjugate())
}

#[derive(Clone, Copy, PartialEq)]
enum GammaMode {
    Fixed,
    Estimated,
}

struct AltMaxResult {
    loglik: f64,
    gamma: f64,
    diagnostics: Diagnostics,
    interval_steps: usize,
}

/// `(R̃1.2, R_s, γ)` half-step at fixed β: the new γ (unchanged in fixed
/// mode), the profile log-likelihood and the covariance estimates.
fn covariance_step(
    partition: &BlockPartition,
    beta: &ComplexMatrix,
    mode: GammaMode,
    gamma: f64,
) -> Result<(f64, f64, TwoCovEstimate, Option<RootSolveReport>)> {
    let mut rep = None;
    let mut gamma = gamma;
    if mode == GammaMode::Estimated {
        let (sp, ss) = partition.reduced(beta);
        let w = inv_sqrt_pd(&ss)?;
        let mut gammas: Vec<f64> =
            hermitian_eigen(&hermitize(&(&w * sp * &w)))?.values.iter().map(|x| x.max(0.0)).collect();
        gammas.reverse();
        let r5 = gamma_hat_theorem5(&gammas, &partition.deltas, &partition.dims, partition.r);
        if let RootBranch::Infeasible(kind) = r5.branch {
            return Err(Error::Infeasible(format!("no maximizer over gamma under H1 ({kind:?})")));
        }
        gamma = r5.root;
        rep = Some(r5);
    }
    let (ll, est) = partition.profile_loglik(beta, gamma)?;
    Ok((gamma, ll, est, rep))
}

/// Coordinate ascent between `(R̃1.2, R_s[, γ])` and β.
///
/// Two starting points are scored: the secondary-only β and the β that
/// maximizes the H0 likelihood at `gamma_h0`. The ascent continues from the
/// better one, so the final value never falls below the H0 maximum.
///
/// The relative stopping test uses `N K` as the scale of the log-likelihood,
/// so the iteration count does not depend on the data's units.
fn alternating_max(
    partition: &BlockPartition,
    mode: GammaMode,
    gamma_h0: f64,
    opts: &AltMaxOptions,
) -> Result<AltMaxResult> {
    let scale = (partition.dims.n * partition.dims.k()) as f64;
    let mut diag = Diagnostics::default();
    let mut interval_steps = 0;
    let mut record = |rep: &Option<RootSolveReport>, diag: &mut Diagnostics| {
        if let Some(rep) = rep {
            diag.root_iterations.push(rep.iterations);
            if rep.branch == RootBranch::IntervalSearch {
                interval_steps += 1;
            }
        }
    };

    let mut beta = partition.initial_beta()?;
    let mut step = covariance_step(partition, &beta, mode, gamma_h0)?;
    record(&step.3, &mut diag);
    let beta_h0 = partition.h0_beta(gamma_h0)?;
    let alt = covariance_step(partition, &beta_h0, mode, gamma_h0)?;
    if alt.1 > step.1 {
        beta = beta_h0;
        step = alt;
        record(&step.3, &mut diag);
    }

    let mut prev = f64::NEG_INFINITY;
    for it in 1..=opts.max_iters.max(1) {
        if it > 1 {
            step = covariance_step(partition, &beta, mode, step.0)?;
            record(&step.3, &mut diag);
        }
        let (gamma, ll, ref est, _) = step;
        diag.loglik_trace.push(ll);
        diag.iterations = it;
        if it > 1 && ll - prev < opts.tol * scale {
            diag.converged = true;
            break;
        }
        prev = ll;
        if it == opts.max_iters {
            break;
        }
        beta = beta_step(partition, &est.r_hat, &est.rs_tilde_hat, gamma)?;
    }
    if !diag.converged {
        diag.warnings.push(format!("alternating maximization stopped after {} iterations", diag.iterations));
    }
    Ok(AltMaxResult { loglik: step.1, gamma: step.0, diagnostics: diag, interval_steps })
}

fn check_ks(data: &DataSet, h: &ComplexMatrix) -> Result<usize> {
    let (n, r) = h.shape();
    if n != data.n() {
        return Err(Error::Dimension(format!("H has {n} rows, data has {}", data.n())));
    }
    if r == 0 || r >= n {
        return Err(Error::Infeasible(format!("SO-KS detectors need 1 <= r < N, got r={r}, N={n}")));
    }
    if data.k_s() < n {
        return Err(Error::Infeasible(format!("need K_S >= N, got K_S={}, N={n}", data.k_s())));
    }
    if data.k_p() < r {
        return Err(Error::Infeasible(format!("K_P < r is not supported (K_P={}, r={r})", data.k_p())));
    }
    Ok(r)
}

/// SO-KS-HE log-GLR by alternating maximization over `(R̃1.2, R_s)` and β.
pub fn so_ks_he(data: &DataSet, h: &ComplexMatrix, opts: &AltMaxOptions) -> Result<DetectorOutput> {
    check_ks(data, h)?;
    let stats = compute_stats(data, Some(h))?;
    let partition = BlockPartition::new(data, h)?;
    let res = alternating_max(&partition, GammaMode::Fixed, 1.0, opts)?;
    let l0 = h0_loglik(1.0, &stats.tp_descending(), stats.logdet_s_s, &stats.dims);
    let mut out = DetectorOutput::from_log_glr(res.loglik - l0, Branch::Standard)?;
    out.gamma_hat_h0 = Some(1.0);
    out.gamma_hat_h1 = Some(1.0);
    out.diagnostics = res.diagnostics;
    Ok(out)
}

/// SO-KS-PHE log-GLR: each outer step also re-estimates γ; the H0 term is
/// maximized over γ.
pub fn so_ks_phe(data: &DataSet, h: &ComplexMatrix, opts: &AltMaxOptions) -> Result<DetectorOutput> {
    check_ks(data, h)?;
    let stats = compute_stats(data, Some(h))?;
    let (g0, _) = gamma_hat_h0(&stats)?;
    let partition = BlockPartition::new(data, h)?;
    let res = alternating_max(&partition, GammaMode::Estimated, g0, opts)?;
    let l0 = h0_loglik(g0, &stats.tp_descending(), stats.logdet_s_s, &stats.dims);
    let branch = if res.interval_steps > 0 { Branch::IntervalSearch } else { Branch::Standard };
    let mut out = DetectorOutput::from_log_glr(res.loglik - l0, branch)?;
    out.gamma_hat_h0 = Some(g0);
    out.gamma_hat_h1 = Some(res.gamma);
    out.diagnostics = res.diagnostics;
    Ok(out)
}
