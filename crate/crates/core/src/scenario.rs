//! Scenario configuration and synthetic two-channel data.
//!
//! Primary columns are `CN(HX_k, R)` (first-order), `CN(0, HR_sH† + R)`
//! (second-order) or `CN(0, R)` under the null; secondary columns are
//! `CN(0, γR)`. Complex normals use two independent real normals per entry
//! scaled by `1/√2`, so `E[zz†] = I` before coloring by the Hermitian square
//! root of the target covariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    c64, frobenius, hermitize, identity, inv_pd, is_finite, orthonormalize_columns, sqrt_pd, sqrt_psd, trace,
    ComplexMatrix,
};

/// Secondary-channel noise scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Environment {
    /// Secondary covariance `γR` with `γ` known; data are renormalized to `γ = 1` before detection.
    Homogeneous { gamma_known: f64 },
    /// Secondary covariance `γR` with `γ` unknown to the detector.
    PartiallyHomogeneous { gamma_true: f64 },
}

impl Environment {
    pub fn gamma(&self) -> f64 {
        match *self {
            Environment::Homogeneous { gamma_known } => gamma_known,
            Environment::PartiallyHomogeneous { gamma_true } => gamma_true,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Environment::Homogeneous { .. } => "HE",
            Environment::PartiallyHomogeneous { .. } => "PHE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspaceMode {
    Known,
    UnknownDim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub r: usize,
    pub k_p: usize,
    pub k_s: usize,
    pub env: Environment,
    pub subspace_mode: SubspaceMode,
    pub clutter_rho: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Homogeneous, known-subspace, white-noise scenario with seed 0.
    pub fn new(n: usize, r: usize, k_p: usize, k_s: usize) -> Self {
        ScenarioConfig {
            n,
            r,
            k_p,
            k_s,
            env: Environment::Homogeneous { gamma_known: 1.0 },
            subspace_mode: SubspaceMode::Known,
            clutter_rho: 0.0,
            seed: 0,
        }
    }

    pub fn with_env(mut self, env: Environment) -> Self {
        self.env = env;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.clutter_rho = rho;
        self
    }

    pub fn with_subspace_mode(mut self, mode: SubspaceMode) -> Self {
        self.subspace_mode = mode;
        self
    }

    /// Total number of snapshots `K = K_P + K_S`.
    pub fn k(&self) -> usize {
        self.k_p + self.k_s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.r == 0 || self.r > self.n {
            return Err(Error::Config(format!("need 1 <= r <= N, got N={}, r={}", self.n, self.r)));
        }
        if self.k_p == 0 {
            return Err(Error::Config("K_P must be at least 1".into()));
        }
        if self.k_s < self.n {
            return Err(Error::Config(format!("need K_S >= N, got K_S={}, N={}", self.k_s, self.n)));
        }
        if !(0.0..1.0).contains(&self.clutter_rho) {
            return Err(Error::Config(format!("clutter_rho must lie in [0, 1), got {}", self.clutter_rho)));
        }
        let g = self.env.gamma();
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("environment gamma must be positive, got {g}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum SignalOrder {
    /// Deterministic coordinates `X` (`r × K_P`).
    FirstOrder(ComplexMatrix),
    /// Coordinate covariance `R_s` (`r × r`, Hermitian PSD).
    SecondOrder(ComplexMatrix),
}

#[derive(Debug, Clone)]
pub struct SignalModel {
    pub order: SignalOrder,
    /// `N × r` basis with orthonormal columns.
    pub h: ComplexMatrix,
}

impl SignalModel {
    pub fn first_order(h: ComplexMatrix, x: ComplexMatrix) -> Result<Self> {
        let model = SignalModel { order: SignalOrder::FirstOrder(x), h };
        model.validate()?;
        Ok(model)
    }

    pub fn second_order(h: ComplexMatrix, rs: ComplexMatrix) -> Result<Self> {
        let model = SignalModel { order: SignalOrder::SecondOrder(hermitize(&rs)), h };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.h.ncols();
        let gram = self.h.adjoint() * &self.h;
        if frobenius(&(gram - identity(r))) > 1e-10 {
            return Err(Error::Domain("signal basis H must have orthonormal columns".into()));
        }
        match &self.order {
            SignalOrder::FirstOrder(x) if x.nrows() != r => {
                Err(Error::Dimension(format!("X has {} rows, H has {} columns", x.nrows(), r)))
            }
            SignalOrder::SecondOrder(rs) if rs.shape() != (r, r) => {
                Err(Error::Dimension(format!("R_s is {:?}, expected {r}x{r}", rs.shape())))
            }
            SignalOrder::SecondOrder(rs) => sqrt_psd(rs).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Fixed-direction first-order signal scaled so that `snr_db` returns `target_db`.
    pub fn first_order_at_snr(h: ComplexMatrix, direction: &ComplexMatrix, r: &ComplexMatrix, target_db: f64) -> Result<Self> {
        let unit = SignalModel::first_order(h, direction.clone())?;
        let base = snr_linear(&unit, r, direction.ncols())?;
        let scale = scale_for(base, target_db, 2.0)?;
        SignalModel::first_order(unit.h, direction * c64(scale, 0.0))
    }

    /// Fixed-shape second-order signal scaled so that `snr_db` returns `target_db`.
    pub fn second_order_at_snr(
        h: ComplexMatrix,
        shape: &ComplexMatrix,
        r: &ComplexMatrix,
        k_p: usize,
        target_db: f64,
    ) -> Result<Self> {
        let unit = SignalModel::second_order(h, shape.clone())?;
        let base = snr_linear(&unit, r, k_p)?;
        let scale = scale_for(base, target_db, 1.0)?;
        SignalModel::second_order(unit.h, shape * c64(scale, 0.0))
    }
}

/// Multiplier turning linear SNR `base` into `target_db`; SNR scales as `c^power`.
fn scale_for(base: f64, target_db: f64, power: f64) -> Result<f64> {
    if target_db == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if !(base > 0.0) {
        return Err(Error::Domain("cannot rescale a zero signal to a finite SNR".into()));
    }
    Ok((10f64.powf(target_db / 10.0) / base).powf(1.0 / power))
}

/// Primary and secondary data matrices.
#[derive(Debug, Clone)]
pub struct DataSet {
    /// `N × K_P`
    pub z_p: ComplexMatrix,
    /// `N × K_S`
    pub z_s: ComplexMatrix,
}

impl DataSet {
    pub fn new(z_p: ComplexMatrix, z_s: ComplexMatrix) -> Result<Self> {
        if z_p.nrows() != z_s.nrows() {
            return Err(Error::Dimension(format!("Z_P has {} rows, Z_S has {}", z_p.nrows(), z_s.nrows())));
        }
        if !is_finite(&z_p) || !is_finite(&z_s) {
            return Err(Error::Domain("data contain non-finite entries".into()));
        }
        Ok(DataSet { z_p, z_s })
    }

    pub fn n(&self) -> usize {
        self.z_p.nrows()
    }

    pub fn k_p(&self) -> usize {
        self.z_p.ncols()
    }

    pub fn k_s(&self) -> usize {
        self.z_s.ncols()
    }

    /// Divides the secondary data by `√γ`, mapping a known-γ environment onto `γ = 1`.
    pub fn normalize_secondary(&mut self, gamma: f64) {
        self.z_s *= c64(1.0 / gamma.sqrt(), 0.0);
    }

    /// Applies `A` to both channels.
    pub fn transformed(&self, a: &ComplexMatrix) -> DataSet {
        DataSet { z_p: a * &self.z_p, z_s: a * &self.z_s }
    }
}

/// Exponentially correlated covariance `R[i,j] = ρ^|i−j|`.
pub fn make_covariance(n: usize, rho: f64) -> Result<ComplexMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("correlation coefficient must lie in [0, 1), got {rho}")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| c64(rho.powi(i.abs_diff(j) as i32), 0.0)))
}

pub(crate) fn complex_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(s * re, s * im)
    })
}

/// Seeded `N × r` matrix with orthonormal columns.
pub fn sample_subspace(n: usize, r: usize, seed: u64) -> Result<ComplexMatrix> {
    if r == 0 || r > n {
        return Err(Error::Dimension(format!("need 1 <= r <= N, got N={n}, r={r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    orthonormalize_columns(&complex_gaussian(n, r, &mut rng))
}

/// Random `r × K_P` coordinate matrix with unit Frobenius norm.
pub fn random_direction(r: usize, k_p: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = complex_gaussian(r, k_p, &mut rng);
    let norm = frobenius(&x);
    x * c64(1.0 / norm, 0.0)
}

/// Rank-`r` Wishart-style `r × r` PSD matrix with unit trace.
pub fn random_wishart(r: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = complex_gaussian(r, r, &mut rng);
    let rs = hermitize(&(&w * w.adjoint()));
    let tr = trace(&rs).re;
    rs * c64(1.0 / tr, 0.0)
}

/// Precomputed coloring factors for repeated draws from one scenario.
#[derive(Debug, Clone)]
pub struct Generator {
    n: usize,
    k_p: usize,
    k_s: usize,
    r_sqrt: ComplexMatrix,
    secondary_scale: f64,
    signal: Option<PreparedSignal>,
}

#[derive(Debug, Clone)]
enum PreparedSignal {
    Mean(ComplexMatrix),
    /// `H R_s^{1/2}`
    Covariance(ComplexMatrix),
}

impl Generator {
    pub fn new(config: &ScenarioConfig, signal: Option<&SignalModel>, r: &ComplexMatrix) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        if r.shape() != (n, n) {
            return Err(Error::Dimension(format!("R is {:?}, expected {n}x{n}", r.shape())));
        }
        let signal = match signal {
            None => None,
            Some(model) => {
                model.validate()?;
                if model.h.nrows() != n {
                    return Err(Error::Dimension(format!("H has {} rows, expected {n}", model.h.nrows())));
                }
                Some(match &model.order {
                    SignalOrder::FirstOrder(x) => {
                        if x.ncols() != config.k_p {
                            return Err(Error::Dimension(format!("X has {} columns, K_P={}", x.ncols(), config.k_p)));
                        }
                        PreparedSignal::Mean(&model.h * x)
                    }
                    SignalOrder::SecondOrder(rs) => PreparedSignal::Covariance(&model.h * sqrt_psd(rs)?),
                })
            }
        };
        Ok(Generator {
            n,
            k_p: config.k_p,
            k_s: config.k_s,
            r_sqrt: sqrt_pd(r)?,
            secondary_scale: config.env.gamma().sqrt(),
            signal,
        })
    }

    pub fn draw(&self, rng: &mut impl Rng) -> DataSet {
        let noise_p = &self.r_sqrt * complex_gaussian(self.n, self.k_p, rng);
        let z_p = match &self.signal {
            None => noise_p,
            Some(PreparedSignal::Mean(mean)) => noise_p + mean,
            Some(PreparedSignal::Covariance(factor)) => {
                noise_p + factor * complex_gaussian(factor.ncols(), self.k_p, rng)
            }
        };
        let z_s = &self.r_sqrt * complex_gaussian(self.n, self.k_s, rng) * c64(self.secondary_scale, 0.0);
        DataSet { z_p, z_s }
    }
}

/// One draw of `(Z_P, Z_S)`; `signal = None` samples the null hypothesis.
pub fn generate(config: &ScenarioConfig, signal: Option<&SignalModel>, r: &ComplexMatrix, seed: u64) -> Result<DataSet> {
    let generator = Generator::new(config, signal, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(generator.draw(&mut rng))
}

fn snr_linear(signal: &SignalModel, r: &ComplexMatrix, k_p: usize) -> Result<f64> {
    let r_inv = inv_pd(r)?;
    let h = &signal.h;
    Ok(match &signal.order {
        SignalOrder::FirstOrder(x) => {
            let hx = h * x;
            trace(&(hx.adjoint() * &r_inv * &hx)).re
        }
        SignalOrder::SecondOrder(rs) => k_p as f64 * trace(&(&r_inv * h * rs * h.adjoint())).re,
    })
}

/// Signal-to-noise ratio in dB: `tr(X†H†R⁻¹HX)` for first-order signals,
/// `K_P · tr(R⁻¹HR_sH†)` for second-order ones. A zero signal reports `-∞`.
pub fn snr_db(signal: &SignalModel, r: &ComplexMatrix, k_p: usize) -> Result<f64> {
    let lin = snr_linear(signal, r, k_p)?;
    Ok(if lin <= 0.0 { f64::NEG_INFINITY } else { 10.0 * lin.log10() })
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based substream `index` of the stream family `(master, purpose)`.
///
/// The generator for a trial depends only on these three numbers, so serial
/// and parallel runs draw identical data.
pub fn substream(master: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master ^ mix(purpose)));
    rng.set_stream(index);
    rng
}
