//! Physical inner products for the block Hamiltonians.
//!
//! A metric `Θ = Θ† > 0` with `H†Θ = ΘH` makes `H` self-adjoint under
//! `(a, b)_Θ = a†Θb`. For the block `[[E, 1], [eps², E]]` every
//! `[[eps, b], [b, 1/eps]]` with `|b| < 1` works, so the physical space is far
//! from unique. Factorizing `Θ = Ω†Ω` maps states into a third space where
//! `Ω H Ω⁻¹` is Hermitian in the ordinary sense.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{direct_sum, frobenius, hermiticity_defect, sorted_svd, to_complex, vector_norm};
use crate::{CMatrix, CVector};

/// Dieudonné residual above which an evolution is not expected to be unitary.
pub const UNITARITY_RESIDUAL: f64 = 1e-10;
/// Per-step Θ-norm drift that rejects the step size.
pub const MAX_STEP_DRIFT: f64 = 1e-6;
/// `dt · ‖H‖_F` must not exceed this.
pub const MAX_STEP_SCALE: f64 = 0.01;
const BISECTION_TOLERANCE: f64 = 1e-13;
const SCAN_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("metric scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("metric block with |b| = {} >= 1 is not positive definite (Lemma 3 requires |b_n| < 1)", .0.abs())]
    NotPositive(f64),
    #[error("exceptional point: no metric exists (alpha = {alpha}, K = {k})")]
    ExceptionalPoint { k: u32, alpha: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("metric is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("metric is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("Omega is numerically singular")]
    SingularOmega,
    #[error("trigonometric factorization has no root for eps = {eps}, b = {b}")]
    Infeasible { eps: f64, b: f64 },
    #[error("time step {dt} exceeds {limit} = 0.01/||H||")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("final time and step must be positive and finite")]
    InvalidTime,
    #[error("step {step}: theta-norm drift {drift:e} exceeds the per-step limit")]
    StepRejected { step: usize, drift: f64 },
}

fn check_block_params(eps: f64, b: f64) -> Result<(), MetricError> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(MetricError::InvalidScale(eps));
    }
    if !b.is_finite() || b.abs() >= 1.0 {
        return Err(MetricError::NotPositive(b));
    }
    Ok(())
}

/// `[[eps, b], [b, 1/eps]]`, positive definite iff `|b| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricBlock {
    eps: f64,
    b: f64,
}

pub fn metric_block(eps: f64, b: f64) -> Result<MetricBlock, MetricError> {
    check_block_params(eps, b)?;
    Ok(MetricBlock { eps, b })
}

impl MetricBlock {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.eps, self.b, self.b, 1.0 / self.eps])
    }

    pub fn determinant(&self) -> f64 {
        1.0 - self.b * self.b
    }

    /// Closed-form eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let tr = self.eps + 1.0 / self.eps;
        let disc = (tr * tr - 4.0 * self.determinant()).max(0.0).sqrt();
        let hi = 0.5 * (tr + disc);
        [self.determinant() / hi, hi]
    }
}

/// `I_K ⊕ Θ_0 ⊕ … ⊕ Θ_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledMetric {
    pub k: u32,
    pub nd_dim: usize,
    pub blocks: Vec<MetricBlock>,
}

impl AssembledMetric {
    pub fn dim(&self) -> usize {
        self.nd_dim + 2 * self.blocks.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for (i, block) in self.blocks.iter().enumerate() {
            let o = self.nd_dim + 2 * i;
            out.view_mut((o, o), (2, 2)).copy_from(&block.matrix());
        }
        out
    }

    pub fn to_complex(&self) -> CMatrix {
        to_complex(&self.matrix())
    }

    /// Smallest and largest eigenvalue from the block closed forms.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let mut lo: f64 = if self.nd_dim > 0 { 1.0 } else { f64::INFINITY };
        let mut hi: f64 = if self.nd_dim > 0 { 1.0 } else { f64::NEG_INFINITY };
        for b in &self.blocks {
            let [a, c] = b.eigenvalues();
            lo = lo.min(a);
            hi = hi.max(c);
        }
        (lo, hi)
    }

    /// `I ⊕ Ω_0 ⊕ …` from the trigonometric block factorization.
    pub fn trig_factor(&self) -> Result<CMatrix, MetricError> {
        let identity = CMatrix::identity(self.nd_dim, self.nd_dim);
        let factors = self
            .blocks
            .iter()
            .map(|b| factor_trig(b.eps, b.b).map(|f| to_complex(&f.matrix())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(direct_sum(std::iter::once(&identity).chain(factors.iter())))
    }
}

/// Metric scale `eps`: `α` at `K = 0`, `|α - K|` otherwise.
pub fn metric_scale(k: u32, alpha: f64) -> f64 {
    if k == 0 {
        alpha
    } else {
        (alpha - f64::from(k)).abs()
    }
}

pub fn assemble_metric(k: u32, alpha: f64, b_list: &[f64]) -> Result<AssembledMetric, MetricError> {
    if !alpha.is_finite() {
        return Err(MetricError::InvalidScale(alpha));
    }
    let eps = metric_scale(k, alpha);
    if eps == 0.0 {
        return Err(MetricError::ExceptionalPoint { k, alpha });
    }
    let blocks = b_list
        .iter()
        .map(|&b| metric_block(eps, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AssembledMetric {
        k,
        nd_dim: k as usize,
        blocks,
    })
}

fn square_dim(m: &CMatrix) -> Result<usize, MetricError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(MetricError::NotSquare { rows, cols });
    }
    Ok(rows)
}

fn same_dim(expected: usize, actual: usize) -> Result<(), MetricError> {
    if expected == actual {
        Ok(())
    } else {
        Err(MetricError::DimensionMismatch { expected, actual })
    }
}

/// `‖H†Θ - ΘH‖_F / (‖H‖_F ‖Θ‖_F)`.
pub fn dieudonne_residual(h: &CMatrix, theta: &CMatrix) -> Result<f64, MetricError> {
    let n = square_dim(h)?;
    same_dim(n, square_dim(theta)?)?;
    let scale = frobenius(h) * frobenius(theta);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(frobenius(&(h.adjoint() * theta - theta * h)) / scale)
}

/// `ψ_a† Θ ψ_b`.
pub fn inner_product(psi_a: &CVector, psi_b: &CVector, theta: &CMatrix) -> Result<Complex64, MetricError> {
    let n = square_dim(theta)?;
    same_dim(n, psi_a.len())?;
    same_dim(n, psi_b.len())?;
    Ok(psi_a.dotc(&(theta * psi_b)))
}

/// Lower-triangular `Ω` with positive diagonal and `Ω†Ω = Θ`.
///
/// This is the Cholesky recurrence run from the last index upwards, so the
/// reported pivot is the index at which positivity first fails in that order.
pub fn factor_cholesky(theta: &CMatrix) -> Result<CMatrix, MetricError> {
    let n = square_dim(theta)?;
    let defect = hermiticity_defect(theta);
    if defect > 1e-12 {
        return Err(MetricError::NotHermitian(defect));
    }
    let mut omega = CMatrix::zeros(n, n);
    for j in (0..n).rev() {
        let tail: f64 = (j + 1..n).map(|k| omega[(k, j)].norm_sqr()).sum();
        let pivot = theta[(j, j)].re - tail;
        if !(pivot > 0.0) {
            return Err(MetricError::NotPositiveDefinite { pivot: j, value: pivot });
        }
        let d = pivot.sqrt();
        omega[(j, j)] = Complex64::new(d, 0.0);
        for i in 0..j {
            let mut s = theta[(i, j)];
            for k in j + 1..n {
                s -= omega[(k, i)].conj() * omega[(k, j)];
            }
            omega[(j, i)] = (s / d).conj();
        }
    }
    Ok(omega)
}

/// Symmetric factor `Ω = [[p, a], [a, q]]` of a metric block, parametrized by
/// `p = e^{t/2} sin μ`, `q = e^{-t/2} sin ν`, `a = e^{t/2} cos μ = e^{-t/2} cos ν`
/// with `eps = e^t`.
///
/// With these entries the off-diagonal of `ΩᵀΩ` is `sin(μ + ν)`, so `μ` is
/// fixed by requiring `sin(μ + ν) = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaFactor {
    pub p: f64,
    pub a: f64,
    pub q: f64,
    pub mu: f64,
    pub nu: f64,
    pub t: f64,
}

impl OmegaFactor {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.p, self.a, self.a, self.q])
    }

    /// `|e^{t/2} cos μ - e^{-t/2} cos ν|`.
    pub fn consistency_defect(&self) -> f64 {
        ((0.5 * self.t).exp() * self.mu.cos() - (-0.5 * self.t).exp() * self.nu.cos()).abs()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.p > 0.0 && self.q > 0.0 && self.p * self.q > self.a * self.a
    }
}

fn reduced_equation(eps: f64, b: f64, mu: f64) -> f64 {
    let nu = (eps * mu.cos()).clamp(-1.0, 1.0).acos();
    (mu + nu).sin() - b
}

fn omega_at(eps: f64, mu: f64) -> OmegaFactor {
    let t = eps.ln();
    let nu = (eps * mu.cos()).clamp(-1.0, 1.0).acos();
    OmegaFactor {
        p: (0.5 * t).exp() * mu.sin(),
        a: (0.5 * t).exp() * mu.cos(),
        q: (-0.5 * t).exp() * nu.sin(),
        mu,
        nu,
        t,
    }
}

/// Solves the trigonometric factorization by scanning `μ ∈ (0, π)` for sign
/// changes of the reduced equation and bisecting each bracket.
///
/// When several roots exist the one giving a positive-definite `Ω` (the
/// principal square root) is preferred.
pub fn factor_trig(eps: f64, b: f64) -> Result<OmegaFactor, MetricError> {
    check_block_params(eps, b)?;
    // |eps cos μ| <= 1 keeps ν real
    let edge = if eps > 1.0 { (1.0 / eps).acos() } else { 0.0 };
    let (lo, hi) = (edge, PI - edge);
    let sample = |i: usize| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64;
    let admissible = |mu: f64| mu > 0.0 && mu < PI;

    let points: Vec<(f64, f64)> = (0..=SCAN_POINTS)
        .map(sample)
        .filter(|&mu| admissible(mu))
        .map(|mu| (mu, reduced_equation(eps, b, mu)))
        .collect();
    let mut roots = Vec::new();
    for (i, w) in points.windows(2).enumerate() {
        let ((m0, f0), (m1, f1)) = (w[0], w[1]);
        if f0 == 0.0 {
            roots.push(m0);
        } else if f1 != 0.0 && f0.signum() != f1.signum() {
            roots.push(bisect(eps, b, m0, m1, f0));
        } else if i > 0 {
            // a pair of roots closer than the scan spacing hides inside a
            // local extremum that stays on one side of zero at the samples
            let (mp, fp) = points[i - 1];
            let peak = f0 < 0.0 && f0 > fp && f0 >= f1;
            let trough = f0 > 0.0 && f0 < fp && f0 <= f1;
            if peak || trough {
                let sign = if peak { 1.0 } else { -1.0 };
                let (mx, fx) = golden_extremum(|mu| sign * reduced_equation(eps, b, mu), mp, m1);
                if fx > 0.0 {
                    roots.push(bisect(eps, b, mp, mx, fp));
                    roots.push(bisect(eps, b, mx, m1, sign * fx));
                }
            }
        }
    }
    if let Some(&(m, f)) = points.last() {
        if f == 0.0 {
            roots.push(m);
        }
    }

    let candidates: Vec<OmegaFactor> = roots.into_iter().map(|mu| omega_at(eps, mu)).collect();
    candidates
        .iter()
        .find(|f| f.is_positive_definite())
        .or(candidates.first())
        .copied()
        .ok_or(MetricError::Infeasible { eps, b })
}

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_extremum(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > BISECTION_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

fn bisect(eps: f64, b: f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let sign_lo = f_lo.signum();
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f = reduced_equation(eps, b, mid);
        if f == 0.0 {
            return mid;
        }
        if f.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Hamiltonian in the third space, `𝔥 = Ω H Ω⁻¹`.
#[derive(Debug, Clone)]
pub struct LSpaceImage {
    pub h: CMatrix,
    /// `‖𝔥 - 𝔥†‖_F / ‖𝔥‖_F`.
    pub hermiticity_residual: f64,
    /// 2-norm condition number of `Ω`.
    pub omega_condition: f64,
}

pub fn to_l_space(h: &CMatrix, omega: &CMatrix) -> Result<LSpaceImage, MetricError> {
    let n = square_dim(h)?;
    same_dim(n, square_dim(omega)?)?;
    let svd = sorted_svd(omega).ok_or(MetricError::SingularOmega)?;
    let smallest = *svd.values.last().unwrap_or(&0.0);
    if n > 0 && smallest <= 1e3 * f64::EPSILON * svd.values[0] {
        return Err(MetricError::SingularOmega);
    }
    let inv = omega.clone().try_inverse().ok_or(MetricError::SingularOmega)?;
    let image = omega * h * inv;
    Ok(LSpaceImage {
        hermiticity_residual: hermiticity_defect(&image),
        omega_condition: if n == 0 { 1.0 } else { svd.values[0] / smallest },
        h: image,
    })
}

/// `|ψ⦒ = Ω|ψ⟩`.
pub fn map_state(psi: &CVector, omega: &CMatrix) -> Result<CVector, MetricError> {
    let n = square_dim(omega)?;
    same_dim(n, psi.len())?;
    Ok(omega * psi)
}

/// Block observable `[[u, v], [y, z]]` with `y = eps² v + eps b (z - u)`,
/// the unique lower-left entry that makes it self-adjoint under `Θ(eps, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableBlock {
    pub u: f64,
    pub v: f64,
    pub y: f64,
    pub z: f64,
    pub eps: f64,
    pub b: f64,
}

impl ObservableBlock {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.u, self.v, self.y, self.z])
    }

    pub fn metric(&self) -> MetricBlock {
        MetricBlock { eps: self.eps, b: self.b }
    }

    /// Real linear combination `s·self + r·other` over the same metric.
    pub fn combine(&self, s: f64, other: &ObservableBlock, r: f64) -> Result<ObservableBlock, MetricError> {
        observable_block(
            s * self.u + r * other.u,
            s * self.v + r * other.v,
            s * self.z + r * other.z,
            self.eps,
            self.b,
        )
    }
}

pub fn observable_block(u: f64, v: f64, z: f64, eps: f64, b: f64) -> Result<ObservableBlock, MetricError> {
    check_block_params(eps, b)?;
    Ok(ObservableBlock {
        u,
        v,
        y: eps * eps * v + eps * b * (z - u),
        z,
        eps,
        b,
    })
}

/// RK4 trajectory of `i dψ/dt = Hψ`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `ψ†Θψ` after every step.
    pub theta_norms: Vec<f64>,
    /// `ψ†ψ` after every step.
    pub k_norms: Vec<f64>,
    pub final_state: CVector,
    /// `max |ψ†Θψ - ψ0†Θψ0| / ψ0†Θψ0`.
    pub max_norm_drift: f64,
    /// `(max - min) / initial` of the plain norm.
    pub k_norm_variation: f64,
    pub dieudonne_residual: f64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }
}

/// Integrates with fixed-step classical RK4 and tracks the Θ-norm.
///
/// The step is shrunk so that `T/dt` is an integer.
pub fn evolve(h: &CMatrix, theta: &CMatrix, psi0: &CVector, t_final: f64, dt: f64) -> Result<Trajectory, MetricError> {
    let n = square_dim(h)?;
    same_dim(n, square_dim(theta)?)?;
    same_dim(n, psi0.len())?;
    if !(t_final > 0.0 && t_final.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(MetricError::InvalidTime);
    }
    let limit = MAX_STEP_SCALE / frobenius(h).max(f64::MIN_POSITIVE);
    if dt > limit * (1.0 + 1e-12) {
        return Err(MetricError::StepTooLarge { dt, limit });
    }
    let residual = dieudonne_residual(h, theta)?;
    if residual > UNITARITY_RESIDUAL {
        log::warn!("Dieudonne residual {residual:e}: the theta-norm is not expected to be conserved");
    }

    let steps = (t_final / dt).ceil() as usize;
    let dt = t_final / steps as f64;
    // dψ/dt = -i H ψ
    let gen = h * Complex64::new(0.0, -1.0);
    let theta_norm = |psi: &CVector| psi.dotc(&(theta * psi)).re;
    let k_norm = |psi: &CVector| vector_norm(psi).powi(2);

    let mut psi = psi0.clone();
    let norm0 = theta_norm(&psi);
    let k0 = k_norm(&psi);
    let mut times = Vec::with_capacity(steps + 1);
    let mut theta_norms = Vec::with_capacity(steps + 1);
    let mut k_norms = Vec::with_capacity(steps + 1);
    times.push(0.0);
    theta_norms.push(norm0);
    k_norms.push(k0);

    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let mut max_drift = 0.0f64;
    let mut prev = norm0;
    for step in 1..=steps {
        let k1 = &gen * &psi;
        let k2 = &gen * (&psi + &k1 * half);
        let k3 = &gen * (&psi + &k2 * half);
        let k4 = &gen * (&psi + &k3 * full);
        psi += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * sixth;

        let norm = theta_norm(&psi);
        let step_drift = (norm - prev).abs() / norm0;
        if step_drift > MAX_STEP_DRIFT {
            return Err(MetricError::StepRejected { step, drift: step_drift });
        }
        prev = norm;
        max_drift = max_drift.max((norm - norm0).abs() / norm0);
        times.push(step as f64 * dt);
        theta_norms.push(norm);
        k_norms.push(k_norm(&psi));
    }
    let (kmin, kmax) = k_norms
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(Trajectory {
        times,
        theta_norms,
        k_norms,
        final_state: psi,
        max_norm_drift: max_drift,
        k_norm_variation: (kmax - kmin) / k0,
        dieudonne_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{assemble_leading_order, BlockHamiltonian};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cm(rows: usize, data: &[f64]) -> CMatrix {
        to_complex(&DMatrix::from_row_slice(rows, rows, data))
    }

    #[test]
    fn metric_block_examples() {
        assert_eq!(metric_block(1.0, 0.0).unwrap().matrix(), DMatrix::identity(2, 2));
        let m = metric_block(2.0, 0.5).unwrap();
        assert_eq!(m.matrix(), DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 0.5]));
        assert_eq!(m.determinant(), 0.75);
        assert_eq!(metric_block(0.3, 1.0), Err(MetricError::NotPositive(1.0)));
        assert_eq!(metric_block(0.0, 0.1), Err(MetricError::InvalidScale(0.0)));
        let msg = metric_block(0.3, -1.2).unwrap_err().to_string();
        assert!(msg.contains("|b_n| < 1"), "{msg}");
    }

    #[test]
    fn block_eigenvalues_match_closed_form() {
        let m = metric_block(3.0, -0.7).unwrap();
        let [lo, hi] = m.eigenvalues();
        assert!((lo * hi - m.determinant()).abs() < 1e-14);
        assert!((lo + hi - (3.0 + 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn dieudonne_examples() {
        for xi in [0.01, 0.25, 2.0] {
            let h = to_complex(&BlockHamiltonian::new(6.0, xi, 0).matrix());
            for b in [-0.9, 0.0, 0.4] {
                let theta = metric_block(xi.sqrt(), b).unwrap();
                assert!(dieudonne_residual(&h, &to_complex(&theta.matrix())).unwrap() < 1e-14);
            }
            let id = CMatrix::identity(2, 2);
            let raw = frobenius(&(h.adjoint() - &h));
            assert!((raw - 2f64.sqrt() * (xi - 1.0).abs()).abs() < 1e-14);
            let normalized = dieudonne_residual(&h, &id).unwrap();
            assert!((normalized - raw / (frobenius(&h) * 2f64.sqrt())).abs() < 1e-15);
        }
        let herm = cm(2, &[1.0, 2.0, 2.0, -3.0]);
        assert_eq!(dieudonne_residual(&herm, &CMatrix::identity(2, 2)).unwrap(), 0.0);
        assert!(matches!(
            dieudonne_residual(&herm, &CMatrix::identity(3, 3)),
            Err(MetricError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn assemble_metric_examples() {
        let m = assemble_metric(0, 0.1, &[0.0, 0.0]).unwrap();
        let full = m.matrix();
        for o in [0, 2] {
            assert_eq!(full[(o, o)], 0.1);
            assert!((full[(o + 1, o + 1)] - 10.0).abs() < 1e-14);
            assert_eq!(full[(o, o + 1)], 0.0);
        }

        let m1 = assemble_metric(1, 1.2, &[0.3]).unwrap();
        let full = m1.matrix();
        assert_eq!(full[(0, 0)], 1.0);
        assert!((full[(1, 1)] - 0.2).abs() < 1e-15);
        assert_eq!(full[(1, 2)], 0.3);
        assert!((full[(2, 2)] - 5.0).abs() < 1e-13);

        assert_eq!(
            assemble_metric(0, 0.0, &[0.0]),
            Err(MetricError::ExceptionalPoint { k: 0, alpha: 0.0 })
        );
        assert!(matches!(
            assemble_metric(2, 2.0, &[0.0]),
            Err(MetricError::ExceptionalPoint { .. })
        ));
        assert!(matches!(assemble_metric(0, 0.2, &[0.1, 1.5]), Err(MetricError::NotPositive(_))));
    }

    #[test]
    fn metric_matches_leading_order_on_both_sides_of_ep() {
        for alpha in [0.8, 1.2] {
            let h = assemble_leading_order(1, alpha, 3).unwrap().to_complex();
            let theta = assemble_metric(1, alpha, &[0.2, -0.5, 0.9]).unwrap().to_complex();
            assert!(dieudonne_residual(&h, &theta).unwrap() < 1e-14);
        }
    }

    #[test]
    fn inner_product_examples() {
        let a = CVector::from_vec(vec![c(1.0), Complex64::new(0.0, 2.0)]);
        let b = CVector::from_vec(vec![Complex64::new(0.5, -1.0), c(3.0)]);
        let id = CMatrix::identity(2, 2);
        assert_eq!(inner_product(&a, &b, &id).unwrap(), a.dotc(&b));

        let alpha = 0.3;
        let theta = to_complex(&metric_block(alpha, 0.4).unwrap().matrix());
        let e1 = CVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!((inner_product(&e1, &e1, &theta).unwrap() - c(alpha)).norm() < 1e-15);

        // Θ-orthogonality of the unfolded pair (1, ±√ξ) at b = 0, scale √ξ
        let xi: f64 = 0.09;
        let theta0 = to_complex(&metric_block(xi.sqrt(), 0.0).unwrap().matrix());
        let up = CVector::from_vec(vec![c(1.0), c(xi.sqrt())]);
        let down = CVector::from_vec(vec![c(1.0), c(-xi.sqrt())]);
        assert!(inner_product(&up, &down, &theta0).unwrap().norm() < 1e-15);
        // eigenvectors of distinct real eigenvalues stay orthogonal under every admissible metric
        let theta_b = to_complex(&metric_block(xi.sqrt(), 0.5).unwrap().matrix());
        assert!(inner_product(&up, &down, &theta_b).unwrap().norm() < 1e-15);
        assert!(up.dotc(&down).norm() > 0.9);
    }

    #[test]
    fn cholesky_examples() {
        let id = CMatrix::identity(3, 3);
        assert_eq!(factor_cholesky(&id).unwrap(), id);
        let d = cm(2, &[4.0, 0.0, 0.0, 1.0]);
        assert_eq!(factor_cholesky(&d).unwrap(), cm(2, &[2.0, 0.0, 0.0, 1.0]));

        let theta = cm(2, &[2.0, 0.5, 0.5, 0.5]);
        let omega = factor_cholesky(&theta).unwrap();
        assert_eq!(omega[(0, 1)], c(0.0));
        // Ω†Ω with Ω lower: q = √Θ₂₂, a = Θ₁₂/q, p = √(Θ₁₁ - a²)
        let q = 0.5f64.sqrt();
        let a = 0.5 / q;
        let p = (2.0 - a * a).sqrt();
        assert!((omega[(1, 1)].re - q).abs() < 1e-15);
        assert!((omega[(1, 0)].re - a).abs() < 1e-15);
        assert!((omega[(0, 0)].re - p).abs() < 1e-15);
        assert!(frobenius(&(omega.adjoint() * &omega - &theta)) < 1e-14);
    }

    #[test]
    fn cholesky_complex_hermitian() {
        let i = Complex64::new(0.0, 1.0);
        let theta = CMatrix::from_row_slice(2, 2, &[c(3.0), c(1.0) + i, c(1.0) - i, c(2.0)]);
        let omega = factor_cholesky(&theta).unwrap();
        assert!(frobenius(&(omega.adjoint() * &omega - &theta)) < 1e-14);
        assert!(omega[(0, 0)].im == 0.0 && omega[(0, 0)].re > 0.0);
    }

    #[test]
    fn cholesky_rejects() {
        let indefinite = cm(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            factor_cholesky(&indefinite),
            Err(MetricError::NotPositiveDefinite { pivot: 0, .. })
        ));
        let bad_tail = cm(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            factor_cholesky(&bad_tail),
            Err(MetricError::NotPositiveDefinite { pivot: 2, .. })
        ));
        let skew = cm(2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(factor_cholesky(&skew), Err(MetricError::NotHermitian(_))));
    }

    #[test]
    fn trig_factor_examples() {
        let f = factor_trig(1.0, 0.0).unwrap();
        assert!((f.mu - PI / 2.0).abs() < 1e-12 && (f.nu - PI / 2.0).abs() < 1e-12);
        assert!(frobenius(&(to_complex(&f.matrix()) - CMatrix::identity(2, 2))) < 1e-12);

        let near = factor_trig(1.0, 1.0 - 1e-9).unwrap();
        assert!((near.mu - PI / 4.0).abs() < 1e-4 && (near.nu - near.mu).abs() < 1e-12);
        let h = 0.5f64.sqrt();
        assert!((near.p - h).abs() < 1e-4 && (near.a - h).abs() < 1e-4 && (near.q - h).abs() < 1e-4);

        let g = factor_trig(2.0, 0.3).unwrap();
        let theta = metric_block(2.0, 0.3).unwrap().matrix();
        let om = g.matrix();
        assert!((om.transpose() * &om - theta).norm() <= 1e-10);
        assert!(g.consistency_defect() < 1e-12);
        assert!(g.is_positive_definite());
        // the off-diagonal is sin(μ+ν), not cos
        assert!(((g.mu + g.nu).sin() - 0.3).abs() < 1e-12);

        assert!(matches!(factor_trig(-1.0, 0.0), Err(MetricError::InvalidScale(_))));
        assert!(matches!(factor_trig(1.0, 1.0), Err(MetricError::NotPositive(_))));
    }

    #[test]
    fn trig_factor_negative_b_and_large_scale() {
        for (eps, b) in [(1.0, -0.5), (10.0, 0.8), (0.05, -0.95), (50.0, -0.2)] {
            let f = factor_trig(eps, b).unwrap();
            let om = f.matrix();
            let theta = metric_block(eps, b).unwrap().matrix();
            assert!((om.transpose() * &om - &theta).norm() <= 1e-10 * theta.norm(), "{eps} {b}");
            assert!(f.is_positive_definite());
        }
    }

    #[test]
    fn l_space_examples() {
        let xi: f64 = 0.16;
        let h = to_complex(&BlockHamiltonian::new(2.0, xi, 0).matrix());
        let omega = factor_cholesky(&to_complex(&metric_block(xi.sqrt(), 0.0).unwrap().matrix())).unwrap();
        let img = to_l_space(&h, &omega).unwrap();
        assert!(img.hermiticity_residual <= 1e-12);

        let herm = cm(2, &[1.0, 2.0, 2.0, -3.0]);
        let same = to_l_space(&herm, &CMatrix::identity(2, 2)).unwrap();
        assert_eq!(same.h, herm);
        assert_eq!(same.hermiticity_residual, 0.0);

        let singular = cm(2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(to_l_space(&herm, &singular), Err(MetricError::SingularOmega)));
    }

    #[test]
    fn map_state_basis_vector_norm() {
        let theta = to_complex(&metric_block(2.0, 0.5).unwrap().matrix());
        let omega = factor_cholesky(&theta).unwrap();
        let e1 = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let mapped = map_state(&e1, &omega).unwrap();
        assert!((vector_norm(&mapped) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(map_state(&e1, &CMatrix::identity(2, 2)).unwrap(), e1);
        assert!(map_state(&e1, &CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn observable_examples() {
        for b in [-0.5, 0.0, 0.7] {
            let eps = 0.3;
            let h = observable_block(0.0, 1.0, 0.0, eps, b).unwrap();
            assert!((h.y - eps * eps).abs() < 1e-15);
            let theta = to_complex(&h.metric().matrix());
            assert!(dieudonne_residual(&to_complex(&h.matrix()), &theta).unwrap() <= 1e-13);
        }
        let eps = 0.4;
        let charge = observable_block(0.0, 1.0 / eps, 0.0, eps, 0.0).unwrap();
        assert!((charge.y - eps).abs() < 1e-15);
        let id = observable_block(1.0, 0.0, 1.0, eps, 0.6).unwrap();
        assert_eq!(id.matrix(), DMatrix::identity(2, 2));
        assert!(observable_block(0.0, 1.0, 0.0, eps, 1.0).is_err());
    }

    #[test]
    fn evolve_hermitian_block() {
        let h = cm(2, &[2.0, 1.0, 1.0, 2.0]);
        let psi0 = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let tr = evolve(&h, &CMatrix::identity(2, 2), &psi0, 10.0, 1e-3).unwrap();
        assert!(tr.max_norm_drift <= 1e-9);
        assert_eq!(tr.steps(), 10_000);
    }

    #[test]
    fn evolve_rejects_large_step() {
        let h = cm(2, &[2.0, 1.0, 1.0, 2.0]);
        let psi0 = CVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!(matches!(
            evolve(&h, &CMatrix::identity(2, 2), &psi0, 1.0, 0.1),
            Err(MetricError::StepTooLarge { .. })
        ));
        assert_eq!(
            evolve(&h, &CMatrix::identity(2, 2), &psi0, -1.0, 1e-3).unwrap_err(),
            MetricError::InvalidTime
        );
    }
}
