//! Brute-force validators for the closed forms and solvers.
//!
//! Nothing in here is used by the detectors; these routines trade speed for
//! independence from the production code paths.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::{c64, hermitize, identity, ComplexMatrix};
use crate::scenario::DataSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn log(lo: f64, hi: f64, points: usize) -> Self {
        GridSpec { lo, hi, points, scale: Scale::Log }
    }

    pub fn linear(lo: f64, hi: f64, points: usize) -> Self {
        GridSpec { lo, hi, points, scale: Scale::Linear }
    }

    /// The grid used for γ objectives: 10⁴ log-spaced points on `(1e-6, 1e6)`.
    pub fn gamma_default() -> Self {
        GridSpec::log(1e-6, 1e6, 10_000)
    }

    fn unit_of(self, x: f64) -> f64 {
        match self.scale {
            Scale::Linear => x,
            Scale::Log => x.ln(),
        }
    }

    fn point_at(self, u: f64) -> f64 {
        match self.scale {
            Scale::Linear => u,
            Scale::Log => u.exp(),
        }
    }

    pub fn node(&self, k: usize) -> f64 {
        let (a, b) = (self.unit_of(self.lo), self.unit_of(self.hi));
        self.point_at(a + (b - a) * k as f64 / (self.points - 1) as f64)
    }
}

/// Grid extremum of `f`, refined by golden-section search between the
/// neighbours of the best node. The refined point is kept only if it
/// improves on the grid value.
pub fn grid_extremize(f: impl Fn(f64) -> f64, grid: GridSpec, mode: Mode) -> (f64, f64) {
    assert!(grid.lo < grid.hi && grid.points >= 2, "invalid grid");
    let sign = if mode == Mode::Max { 1.0 } else { -1.0 };
    let g = |x: f64| sign * f(x);
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..grid.points {
        let v = g(grid.node(k));
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    let mut a = grid.unit_of(grid.node(best.saturating_sub(1)));
    let mut b = grid.unit_of(grid.node((best + 1).min(grid.points - 1)));
    let h = |u: f64| g(grid.point_at(u));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = h(d);
        }
    }
    let (u, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    if v > best_val {
        (grid.point_at(u), sign * v)
    } else {
        (grid.node(best), sign * best_val)
    }
}

/// Compass search maximizing `f` over `R^dim` from `start`, halving the step
/// until it drops below `min_step`.
pub fn pattern_search_max(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, min_step: f64) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut h = step;
    let mut trial = x.clone();
    while h >= min_step {
        let mut improved = false;
        for i in 0..x.len() {
            for s in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[i] += s * h;
                let v = f(&trial);
                if v > fx {
                    // Keep stepping along a successful direction.
                    let mut cur = v;
                    x.copy_from_slice(&trial);
                    loop {
                        trial[i] += s * h;
                        let w = f(&trial);
                        if w > cur {
                            cur = w;
                            x.copy_from_slice(&trial);
                        } else {
                            break;
                        }
                    }
                    fx = cur;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

/// 2×2 complex Hermitian matrix `[[a, b], [b*, d]]`.
#[derive(Debug, Clone, Copy)]
struct H2 {
    a: f64,
    b: Complex64,
    d: f64,
}

impl H2 {
    fn from_matrix(m: &ComplexMatrix) -> Self {
        H2 { a: m[(0, 0)].re, b: m[(0, 1)], d: m[(1, 1)].re }
    }

    /// `L L†` for lower-triangular `L = [[l0, 0], [l1, l2]]`.
    fn gram(l0: f64, l1: Complex64, l2: f64) -> Self {
        H2 { a: l0 * l0, b: l1.conj() * l0, d: l1.norm_sqr() + l2 * l2 }
    }

    fn add(&self, o: &H2) -> H2 {
        H2 { a: self.a + o.a, b: self.b + o.b, d: self.d + o.d }
    }

    fn det(&self) -> f64 {
        self.a * self.d - self.b.norm_sqr()
    }

    /// `tr(self⁻¹ s)`.
    fn inv_trace(&self, s: &H2) -> f64 {
        (self.d * s.a + self.a * s.d - 2.0 * (self.b.conj() * s.b).re) / self.det()
    }
}

/// Maximum over `R ≻ 0`, `R̃_s ⪰ 0` of the two-covariance objective
/// `−2K_S ln γ − K_P ln det(R̃_s + R) − K_S ln det R − tr((R̃_s + R)⁻¹S_P) − tr(R⁻¹S_S)/γ`
/// for 2×2 inputs.
///
/// Both matrices are parameterized by lower-triangular factors (four reals
/// each; the diagonal of the `R` factor through `exp`). A coarse grid over
/// the factor scales seeds a compass search per start.
pub fn brute_force_loglik_max(s_p: &ComplexMatrix, s_s: &ComplexMatrix, gamma: f64, k_p: usize, k_s: usize) -> f64 {
    assert_eq!(s_s.shape(), (2, 2), "oracle is for N = 2 only");
    let sp = H2::from_matrix(s_p);
    let ss = H2::from_matrix(s_s);
    let (kp, ks) = (k_p as f64, k_s as f64);
    let obj = move |x: &[f64]| -> f64 {
        let r = H2::gram(x[0].exp(), c64(x[1], x[2]), x[3].exp());
        let rs = H2::gram(x[4], c64(x[5], x[6]), x[7]);
        let total = r.add(&rs);
        let (dt, dr) = (total.det(), r.det());
        if !(dt > 0.0 && dr > 0.0) {
            return f64::NEG_INFINITY;
        }
        -2.0 * ks * gamma.ln() - kp * dt.ln() - ks * dr.ln() - total.inv_trace(&sp) - r.inv_trace(&ss) / gamma
    };
    let scale = ((ss.a + ss.d) / (2.0 * (kp + ks))).max(1e-12);
    let mut best = f64::NEG_INFINITY;
    for &rf in &[0.25, 1.0, 4.0] {
        for &sf in &[0.0, 0.5, 2.0, 8.0] {
            let ld = 0.5 * (rf * scale).ln();
            let sd = (sf * scale).sqrt();
            let start = [ld, 0.0, 0.0, ld, sd, 0.0, 0.0, sd];
            let (_, v) = pattern_search_max(&obj, &start, 0.5 * (1.0 + sd), 1e-11);
            best = best.max(v);
        }
    }
    best
}

/// Maximized H1 log-likelihood of the second-order known-subspace model for
/// `N = 2`, `r = 1` and γ = 1, by direct search over `R` (2×2, four reals) and
/// `R_s ≥ 0` (one real), with no block decomposition.
pub fn brute_force_so_ks_h1(data: &DataSet, h: &ComplexMatrix) -> f64 {
    assert_eq!((data.n(), h.ncols()), (2, 1), "oracle is for N = 2, r = 1 only");
    let sp = H2::from_matrix(&hermitize(&(&data.z_p * data.z_p.adjoint())));
    let ss = H2::from_matrix(&hermitize(&(&data.z_s * data.z_s.adjoint())));
    let hh = H2::from_matrix(&(h * h.adjoint()));
    let (kp, ks) = (data.k_p() as f64, data.k_s() as f64);
    let k = kp + ks;
    let obj = move |x: &[f64]| -> f64 {
        let r = H2::gram(x[0].exp(), c64(x[1], x[2]), x[3].exp());
        let s = x[4] * x[4];
        let cp = r.add(&H2 { a: s * hh.a, b: hh.b * s, d: s * hh.d });
        let (dp, dr) = (cp.det(), r.det());
        if !(dp > 0.0 && dr > 0.0) {
            return f64::NEG_INFINITY;
        }
        -2.0 * k * PI.ln() - kp * dp.ln() - cp.inv_trace(&sp) - ks * dr.ln() - r.inv_trace(&ss)
    };
    let scale = ((ss.a + ss.d) / (2.0 * k)).max(1e-12);
    let ld = 0.5 * scale.ln();
    let mut best = f64::NEG_INFINITY;
    for &sf in &[0.0, 0.5, 2.0, 10.0, 50.0] {
        let sd = (sf * scale).sqrt();
        let (_, v) = pattern_search_max(&obj, &[ld, 0.0, 0.0, ld, sd], 0.5 * (1.0 + sd), 1e-11);
        best = best.max(v);
    }
    best
}

/// H0 log-likelihood at γ = 1 for any `N`, from the ML covariance
/// `(S_P + S_S)/K` and an LU determinant.
pub fn h0_loglik_direct(data: &DataSet) -> f64 {
    let n = data.n() as f64;
    let k = (data.k_p() + data.k_s()) as f64;
    let s = &data.z_p * data.z_p.adjoint() + &data.z_s * data.z_s.adjoint();
    let det = (s * c64(1.0 / k, 0.0)).determinant().re;
    -n * k * PI.ln() - k * det.ln() - n * k
}

/// Compressed H1 log-likelihood at γ with at most `r` signal eigenvalues,
/// by enumerating every admissible active set and maximizing each
/// per-eigenvalue objective over `λ ∈ [1, 1e6]` on a log grid.
pub fn brute_force_h1_loglik(gamma: f64, spectrum: &[f64], logdet_s_s: f64, k_p: usize, k_s: usize, r: usize) -> f64 {
    let n = spectrum.len();
    let (kp, ks) = (k_p as f64, k_s as f64);
    let k = kp + ks;
    let h = |gi: f64, l: f64| k * (gamma * k / (gamma * gi + l)).ln() + ks * l.ln();
    let base: Vec<f64> = spectrum.iter().map(|&g| h(g, 1.0)).collect();
    let best_h: Vec<f64> = spectrum
        .iter()
        .map(|&g| grid_extremize(|l| h(g, l), GridSpec::log(1.0, 1e6, 10_000), Mode::Max).1)
        .collect();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize > r {
            continue;
        }
        let total: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { best_h[i] } else { base[i] }).sum();
        best = best.max(total);
    }
    let nf = n as f64;
    -nf * k * PI.ln() - nf * ks * gamma.ln() - k * logdet_s_s - nf * k + best
}

/// FO-KS-HE statistic from `K_P × K_P` determinants computed by LU.
pub fn fo_ks_he_primary_form(data: &DataSet, h: &ComplexMatrix) -> f64 {
    let k_p = data.k_p();
    let s_s = &data.z_s * data.z_s.adjoint();
    let s_inv = s_s.clone().try_inverse().expect("S_S invertible");
    let m0 = data.z_p.adjoint() * &s_inv * &data.z_p;
    // P_G⊥ in the whitened frame, written with S_S⁻¹ only:
    // (W Z_P)† P⊥ (W Z_P) = Z_P† [S⁻¹ − S⁻¹H (H†S⁻¹H)⁻¹ H†S⁻¹] Z_P.
    let hs = h.adjoint() * &s_inv * h;
    let proj = &s_inv - &s_inv * h * hs.try_inverse().expect("H†S⁻¹H invertible") * h.adjoint() * &s_inv;
    let m1 = data.z_p.adjoint() * proj * &data.z_p;
    let num = (identity(k_p) + m0).determinant().re;
    let den = (identity(k_p) + m1).determinant().re;
    num / den
}

/// Eigenvalues of a Hermitian matrix from nalgebra's solver, ascending.
pub fn reference_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
