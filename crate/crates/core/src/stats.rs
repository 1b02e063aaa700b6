//! Sufficient statistics shared by all detectors.
//!
//! `S_S = Z_S Z_S†` and `S_P = Z_P Z_P†` are kept unnormalized (no `1/K`
//! factor); every closed form in [`crate::fo`] and [`crate::so`] assumes this.

use crate::error::{Error, Result};
use crate::numerics::{
    frobenius, hermitian_eigen, hermitize, identity, inv_pd, inv_sqrt_pd, logdet_pd, numerical_rank, ComplexMatrix,
    EigenSpectrum,
};
use crate::scenario::DataSet;

/// Problem dimensions `N`, `K_P`, `K_S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub k_p: usize,
    pub k_s: usize,
}

impl Dims {
    pub fn new(n: usize, k_p: usize, k_s: usize) -> Self {
        Dims { n, k_p, k_s }
    }

    pub fn k(&self) -> usize {
        self.k_p + self.k_s
    }

    /// `N K_P / K`, the right-hand side of every first-order γ equation.
    pub fn gamma_rhs(&self) -> f64 {
        (self.n * self.k_p) as f64 / self.k() as f64
    }
}

#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub dims: Dims,
    pub s_s: ComplexMatrix,
    pub s_p: ComplexMatrix,
    pub s_s_inv_sqrt: ComplexMatrix,
    pub logdet_s_s: f64,
    /// Whitened primary covariance `S_S^{-1/2} S_P S_S^{-1/2}`.
    pub t_p: ComplexMatrix,
    pub tp_spectrum: EigenSpectrum,
    /// Numerical rank of `T_P`.
    pub m1: usize,
    /// Whitened basis `G = S_S^{-1/2} H` (known subspace only).
    pub g: Option<ComplexMatrix>,
    pub p_g_perp: Option<ComplexMatrix>,
    /// Spectrum of `P_G⊥ T_P P_G⊥` (known subspace only).
    pub proj_spectrum: Option<EigenSpectrum>,
}

impl SufficientStats {
    /// Subspace dimension when a basis was supplied.
    pub fn r(&self) -> Option<usize> {
        self.g.as_ref().map(|g| g.ncols())
    }

    /// Eigenvalues of `T_P` in descending order.
    pub fn tp_descending(&self) -> Vec<f64> {
        clip(&self.tp_spectrum.descending())
    }

    /// Eigenvalues of `T_P` in ascending order, rounding noise below zero clipped.
    pub fn tp_ascending(&self) -> Vec<f64> {
        clip(&self.tp_spectrum.values)
    }
}

fn clip(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.max(0.0)).collect()
}

/// Builds every cached statistic from the data and, for known-subspace
/// detectors, the basis `H`.
pub fn compute_stats(data: &DataSet, h: Option<&ComplexMatrix>) -> Result<SufficientStats> {
    let n = data.n();
    let dims = Dims::new(n, data.k_p(), data.k_s());
    if dims.k_s < n {
        return Err(Error::Dimension(format!("need K_S >= N, got K_S={}, N={n}", dims.k_s)));
    }
    if data.k_p() == 0 {
        return Err(Error::Dimension("primary channel is empty".into()));
    }
    let s_s = hermitize(&(&data.z_s * data.z_s.adjoint()));
    let s_p = hermitize(&(&data.z_p * data.z_p.adjoint()));
    let s_s_inv_sqrt = inv_sqrt_pd(&s_s).map_err(|e| match e {
        Error::Conditioning(msg) => Error::Conditioning(format!("secondary sample covariance is rank deficient ({msg})")),
        other => other,
    })?;
    let logdet_s_s = logdet_pd(&s_s)?;
    let t_p = hermitize(&(&s_s_inv_sqrt * &s_p * &s_s_inv_sqrt));
    let tp_spectrum = hermitian_eigen(&t_p)?;
    let m1 = numerical_rank(&tp_spectrum.values);

    let (g, p_g_perp, proj_spectrum) = match h {
        None => (None, None, None),
        Some(h) => {
            if h.nrows() != n || h.ncols() == 0 || h.ncols() > n {
                return Err(Error::Dimension(format!("H is {:?}, expected {n}xr with 1 <= r <= {n}", h.shape())));
            }
            let r = h.ncols();
            if frobenius(&(h.adjoint() * h - identity(r))) > 1e-8 {
                return Err(Error::Domain("H must have orthonormal columns".into()));
            }
            let g = &s_s_inv_sqrt * h;
            let gram_inv = inv_pd(&hermitize(&(g.adjoint() * &g)))?;
            let p = hermitize(&(identity(n) - &g * gram_inv * g.adjoint()));
            let proj = hermitian_eigen(&hermitize(&(&p * &t_p * &p)))?;
            (Some(g), Some(p), Some(proj))
        }
    };

    Ok(SufficientStats { dims, s_s, s_p, s_s_inv_sqrt, logdet_s_s, t_p, tp_spectrum, m1, g, p_g_perp, proj_spectrum })
}
