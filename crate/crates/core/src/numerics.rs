//! Complex-matrix kernels and scalar root solvers shared by every detector.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>` (column-major). The Hermitian
//! eigensolver is a cyclic complex Jacobi method: the matrices handled here
//! are at most a few dozen rows, where Jacobi's accuracy on small eigenvalues
//! matters more than its cubic-per-sweep cost.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative Hermitian-symmetry tolerance accepted by [`hermitian_eigen`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// A matrix is positive definite iff `min_eig > PD_TOL * max_eig`.
pub const PD_TOL: f64 = 1e-12;
/// Eigenvalues above `RANK_TOL * max_eig` count towards the numerical rank.
pub const RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;
const MAX_ROOT_ITERS: usize = 200;
const MAX_BRACKET_EXPANSIONS: usize = 40;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn from_real_diag(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c64(d[i], 0.0) } else { c64(0.0, 0.0) })
}

/// Largest entry modulus.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(A + A†) / 2`; removes the rounding asymmetry left by products such as `W S W`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Orthonormalizes the columns of `a` (modified Gram–Schmidt, two passes).
pub fn orthonormalize_columns(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = a.shape();
    if k > n {
        return Err(Error::Dimension(format!("cannot orthonormalize {k} columns in dimension {n}")));
    }
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let mut q = a.clone();
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 = (0..n).map(|t| q[(t, i)].conj() * q[(t, j)]).sum();
                for t in 0..n {
                    let qi = q[(t, i)];
                    q[(t, j)] -= proj * qi;
                }
            }
        }
        let norm = (0..n).map(|t| q[(t, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale {
            return Err(Error::Conditioning(format!("column {j} is numerically dependent on the previous ones")));
        }
        for t in 0..n {
            q[(t, j)] /= norm;
        }
    }
    Ok(q)
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Domain(format!("matrix is {}x{}, expected square", a.nrows(), a.ncols())));
    }
    if !is_finite(a) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let scale = max_abs(a);
    let asym = max_abs(&(a - a.adjoint()));
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::Domain(format!("matrix is not Hermitian (asymmetry {asym:.3e}, scale {scale:.3e})")));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and the matching unitary eigenvector matrix (eigenvectors as columns).
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSpectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues in descending order.
    pub fn descending(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `RANK_TOL` times the largest one.
    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.values)
    }

    /// `U diag(values) U†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }

    /// `U diag(f(values)) U†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Count of entries exceeding `RANK_TOL · max`.
pub fn numerical_rank(values: &[f64]) -> usize {
    let top = values.iter().fold(0.0_f64, |m, &v| m.max(v));
    if top <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > RANK_TOL * top).count()
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<EigenSpectrum> {
    check_hermitian(a)?;
    let n = a.nrows();
    let mut m = hermitize(a);
    let mut v = identity(n);
    let floor = 1e-18 * frobenius(&m);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if mag <= floor || mag <= f64::EPSILON * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotated = true;
                // Phase e^{iφ} of a_pq; D = diag(1, e^{-iφ}) makes the pivot real,
                // then a real rotation annihilates it.
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let conj_phase = phase.conj();
                // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
                let u_pp = c64(c, 0.0);
                let u_pq = c64(s, 0.0);
                let u_qp = conj_phase * (-s);
                let u_qq = conj_phase * c;

                // M <- M U (columns p, q)
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * u_pp + miq * u_qp;
                    m[(i, q)] = mip * u_pq + miq * u_qq;
                }
                // M <- U† M (rows p, q)
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = u_pp.conj() * mpj + u_qp.conj() * mqj;
                    m[(q, j)] = u_pq.conj() * mpj + u_qq.conj() * mqj;
                }
                m[(p, q)] = c64(0.0, 0.0);
                m[(q, p)] = c64(0.0, 0.0);
                m[(p, p)] = c64(m[(p, p)].re, 0.0);
                m[(q, q)] = c64(m[(q, q)].re, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * u_pp + viq * u_qp;
                    v[(i, q)] = vip * u_pq + viq * u_qq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenSpectrum { values, vectors })
}

fn pd_spectrum(a: &ComplexMatrix, what: &str) -> Result<EigenSpectrum> {
    let spec = hermitian_eigen(a)?;
    let (lo, hi) = (spec.min(), spec.max());
    if !(hi > 0.0) || !(lo > PD_TOL * hi) {
        return Err(Error::Conditioning(format!(
            "{what}: matrix not numerically positive definite (eigenvalues in [{lo:.3e}, {hi:.3e}])"
        )));
    }
    Ok(spec)
}

/// `A^{-1/2}` for Hermitian positive definite `A`.
pub fn inv_sqrt_pd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = pd_spectrum(a, "inverse square root")?;
    Ok(hermitize(&spec.map_values(|x| 1.0 / x.sqrt())))
}

/// `A^{1/2}` for Hermitian positive definite `A`.
pub fn sqrt_pd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = pd_spectrum(a, "square root")?;
    Ok(hermitize(&spec.map_values(f64::sqrt)))
}

/// `A^{1/2}` for Hermitian positive semidefinite `A`; negative rounding
/// noise in the spectrum is clipped to zero.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = hermitian_eigen(a)?;
    let tol = 1e-10 * spec.max().abs().max(f64::MIN_POSITIVE);
    if spec.min() < -tol {
        return Err(Error::Domain(format!("matrix not positive semidefinite (min eigenvalue {:.3e})", spec.min())));
    }
    Ok(hermitize(&spec.map_values(|x| x.max(0.0).sqrt())))
}

/// `A^{-1}` for Hermitian positive definite `A`.
pub fn inv_pd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = pd_spectrum(a, "inverse")?;
    Ok(hermitize(&spec.map_values(|x| 1.0 / x)))
}

/// `log det A` as a sum of log-eigenvalues.
pub fn logdet_pd(a: &ComplexMatrix) -> Result<f64> {
    let spec = pd_spectrum(a, "log-determinant")?;
    Ok(spec.values.iter().map(|x| x.ln()).sum())
}

/// Which case a scalar γ-solver ended in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootBranch {
    /// Unique root found strictly inside the bracket.
    InteriorRoot,
    /// Maximizer located by a bounded one-dimensional search.
    IntervalSearch,
    Infeasible(Infeasibility),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// The function never changed sign over the (expanded) bracket.
    NoSignChange,
    /// Objective has no minimizer but a positive infimum (tie case of the rank condition).
    PositiveInfimum,
    /// Objective infimum is zero; no minimizer.
    ZeroInfimum,
    /// An explicit existence condition on the dimensions fails.
    ConditionViolated,
}

#[derive(Debug, Clone)]
pub struct RootSolveReport {
    pub root: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub branch: RootBranch,
    /// Best-so-far |f| after each iteration.
    pub history: Vec<f64>,
}

impl RootSolveReport {
    pub fn infeasible(kind: Infeasibility) -> Self {
        RootSolveReport {
            root: f64::NAN,
            residual: f64::NAN,
            bracket: (f64::NAN, f64::NAN),
            iterations: 0,
            branch: RootBranch::Infeasible(kind),
            history: Vec::new(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self.branch, RootBranch::Infeasible(_))
    }
}

/// Root of a continuous strictly monotone `f` inside `bracket`.
///
/// When `f` does not change sign on the initial bracket it is widened
/// geometrically (lower end divided, upper end multiplied by ten) up to 40
/// times before the infeasible branch is reported. The iteration is an
/// Illinois-modified regula falsi with bisection fall-back; bisection is
/// geometric while the bracket spans more than a factor of eight on the
/// positive axis.
pub fn solve_monotone_root(f: impl Fn(f64) -> f64, bracket: (f64, f64), tol: f64) -> RootSolveReport {
    let (mut a, mut b) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut fa = f(a);
    let mut fb = f(b);
    let mut expansions = 0;
    while fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
        if expansions == MAX_BRACKET_EXPANSIONS || !fa.is_finite() || !fb.is_finite() {
            let mut rep = RootSolveReport::infeasible(Infeasibility::NoSignChange);
            rep.bracket = (a, b);
            return rep;
        }
        a = if a > 0.0 { a / 10.0 } else { a * 10.0 - 1.0 };
        b = if b > 0.0 { b * 10.0 } else { b / 10.0 + 1.0 };
        fa = f(a);
        fb = f(b);
        expansions += 1;
    }
    let initial = (a, b);
    let (mut best_x, mut best_f) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut side = 0i8;
    // Working copies of fa/fb; the Illinois step halves them.
    let (mut wa, mut wb) = (fa, fb);

    while best_f.abs() > tol && iterations < MAX_ROOT_ITERS {
        iterations += 1;
        let (lo, hi) = (a.min(b), a.max(b));
        let mut c = (a * wb - b * wa) / (wb - wa);
        let wide = lo > 0.0 && hi / lo > 8.0;
        if wide || !c.is_finite() || c <= lo || c >= hi {
            c = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        }
        let fc = f(c);
        if fc.abs() < best_f.abs() {
            best_x = c;
            best_f = fc;
        }
        history.push(best_f.abs());
        if fc == 0.0 {
            break;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            wb = fc;
            if side == -1 {
                wa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            wa = fc;
            if side == 1 {
                wb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }

    RootSolveReport {
        root: best_x,
        residual: best_f,
        bracket: initial,
        iterations,
        branch: RootBranch::InteriorRoot,
        history,
    }
}

/// Maximizer of a unimodal `f` on `[lo, hi]` by golden-section search,
/// stopping when the bracket is narrower than `rel_tol` times its upper end.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..300 {
        if (b - a) <= rel_tol * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 { (x1, f1) } else { (x2, f2) }
}

/// Maximizer of `f` over `[lo, hi] ⊂ (0, ∞)`: a log-spaced scan with
/// `points` nodes locates the best cell, then golden-section refines it.
pub fn scan_golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize, rel_tol: f64) -> (f64, f64) {
    let points = points.max(3);
    let (l0, l1) = (lo.ln(), hi.ln());
    let node = |k: usize| (l0 + (l1 - l0) * k as f64 / (points - 1) as f64).exp();
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..points {
        let v = f(node(k));
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    let a = node(best.saturating_sub(1));
    let b = node((best + 1).min(points - 1));
    let (x, v) = golden_section_max(&f, a, b, rel_tol);
    if v >= best_val { (x, v) } else { (node(best), best_val) }
}

/// Solves `[P ⊗ A22ᵀ + (1/γ) Q ⊗ B22ᵀ] vec(X) = vec(C)` for the
/// `(N−r) × r` matrix `X`, with `vec` stacking columns.
pub fn kron_block_solve(
    p: &ComplexMatrix,
    a22: &ComplexMatrix,
    q: &ComplexMatrix,
    b22: &ComplexMatrix,
    c: &ComplexMatrix,
    gamma: f64,
) -> Result<ComplexMatrix> {
    let r = p.nrows();
    let m = a22.nrows();
    if !p.is_square() || q.shape() != (r, r) || !a22.is_square() || b22.shape() != (m, m) || c.shape() != (m, r) {
        return Err(Error::Dimension(format!(
            "kron_block_solve: P {:?}, A22 {:?}, Q {:?}, B22 {:?}, C {:?}",
            p.shape(),
            a22.shape(),
            q.shape(),
            b22.shape(),
            c.shape()
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let system = kron(p, &a22.transpose()) + kron(q, &b22.transpose()) * c64(1.0 / gamma, 0.0);
    let rhs = nalgebra::DVector::from_iterator(m * r, c.iter().copied());
    let sol = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Conditioning("Kronecker system is singular".into()))?;
    let residual = (&system * &sol - &rhs).norm();
    let scale = rhs.norm().max(f64::MIN_POSITIVE);
    if !sol.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || residual > 1e-9 * scale {
        return Err(Error::Conditioning(format!("Kronecker system ill-conditioned (residual {residual:.3e})")));
    }
    Ok(ComplexMatrix::from_iterator(m, r, sol.iter().copied()))
}
