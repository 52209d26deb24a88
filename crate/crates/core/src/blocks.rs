//! Jordan canonical forms at the exceptional points and their leading-order
//! unfoldings.
//!
//! Near `α = 0` the spectrum splits into pairs of 2×2 blocks
//! `[[E, 1], [ξ, E]]` with `ξ = α²` and `E = 4n + 2`. Near `α = K ≥ 1` the
//! lowest `K` levels stay simple (the non-degenerate sector) and the rest
//! pair into blocks `[[E, 1], [δ², E]]` with `δ = α - K` and `E = 2K + 2 + 4n`.
//!
//! Infinite direct sums are always truncated to their leading `m` blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{fix_phase, frobenius, sorted_svd, to_complex, vector_norm};
use crate::numgrid::eigen;
use crate::{CMatrix, CVector};

pub const DEFAULT_BLOCKS: usize = 8;
/// Relative numerical-rank threshold for [`jordan_chain`].
pub const DEFAULT_CHAIN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlockError {
    #[error("at least one 2x2 block is required")]
    NoBlocks,
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("numerical nullspace of (M - E) at E = {energy} has dimension {dim}, expected 1")]
    NullspaceDimension { energy: Complex64, dim: usize },
    #[error("Jordan chain equation inconsistent at E = {energy}: residual {residual:e}")]
    InconsistentChain { energy: Complex64, residual: f64 },
    #[error("{listed} listed energies need {needed} columns but the matrix has dimension {dim}")]
    TooManyEnergies { listed: usize, needed: usize, dim: usize },
    #[error("remaining eigenvalue {0} is not simple; list it as an exceptional energy")]
    RepeatedEigenvalue(Complex64),
    #[error("transition matrix is numerically singular")]
    SingularTransition,
    #[error("singular value decomposition failed to converge")]
    Svd,
    #[error(transparent)]
    Eigen(#[from] eigen::EigenError),
}

/// `J(E) = [[E, 1], [0, E]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanBlock2 {
    pub energy: f64,
}

impl JordanBlock2 {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.energy, 1.0, 0.0, self.energy])
    }
}

/// `[[E, 1], [eps, E]]`: a Jordan block plus `eps` times the transposed nilpotent block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockHamiltonian {
    pub energy: f64,
    /// `ξ` at `K = 0`, `δ²` at `K ≥ 1`.
    pub eps: f64,
    pub k: u32,
}

impl BlockHamiltonian {
    pub fn new(energy: f64, eps: f64, k: u32) -> Self {
        Self { energy, eps, k }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.energy, 1.0, self.eps, self.energy])
    }

    pub fn unfold(&self) -> Unfolding {
        unfolded_eigs(self)
    }
}

/// `diag(ND energies) ⊕ H_0 ⊕ … ⊕ H_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperator {
    pub k: u32,
    pub nd_energies: Vec<f64>,
    pub blocks: Vec<BlockHamiltonian>,
}

impl AssembledOperator {
    pub fn nd_dim(&self) -> usize {
        self.nd_energies.len()
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.nd_dim() + 2 * self.m()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let nd = self.nd_dim();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (j, &e) in self.nd_energies.iter().enumerate() {
            out[(j, j)] = e;
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let o = nd + 2 * b;
            out.view_mut((o, o), (2, 2)).copy_from(&block.matrix());
        }
        out
    }

    pub fn to_complex(&self) -> CMatrix {
        to_complex(&self.matrix())
    }

    /// Degenerate energies of the paired sector.
    pub fn block_energies(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.energy).collect()
    }

    /// All eigenvalues from the closed form, ND sector first.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.nd_energies.iter().map(|&e| Complex64::new(e, 0.0)).collect();
        for b in &self.blocks {
            out.extend(b.unfold().eigenvalues);
        }
        out
    }
}

/// `E_j = -2K + 2 + 4j`, `j < K`.
pub fn nd_energies(k: u32) -> Vec<f64> {
    let k = i64::from(k);
    (0..k).map(|j| (-2 * k + 2 + 4 * j) as f64).collect()
}

/// `E_n = 2K + 2 + 4n`.
pub fn block_energy(k: u32, n: usize) -> f64 {
    (2 * i64::from(k) + 2 + 4 * n as i64) as f64
}

fn assemble(k: u32, m: usize, eps: f64) -> Result<AssembledOperator, BlockError> {
    if m == 0 {
        return Err(BlockError::NoBlocks);
    }
    Ok(AssembledOperator {
        k,
        nd_energies: nd_energies(k),
        blocks: (0..m).map(|n| BlockHamiltonian::new(block_energy(k, n), eps, k)).collect(),
    })
}

/// Canonical EP representative: every block a pure Jordan block.
pub fn canonical_j(k: u32, m: usize) -> Result<AssembledOperator, BlockError> {
    assemble(k, m, 0.0)
}

/// Unfolding parameter: `α²` at `K = 0`, `(α - K)²` otherwise.
pub fn unfolding_parameter(k: u32, alpha: f64) -> f64 {
    let delta = alpha - f64::from(k);
    delta * delta
}

/// `J + eps·V` truncated to `m` blocks.
pub fn assemble_leading_order(k: u32, alpha: f64, m: usize) -> Result<AssembledOperator, BlockError> {
    assemble(k, m, unfolding_parameter(k, alpha))
}

/// `m` copies of `[[0, 0], [1, 0]]` on the diagonal.
pub fn perturbation_v(m: usize) -> Result<DMatrix<f64>, BlockError> {
    if m == 0 {
        return Err(BlockError::NoBlocks);
    }
    let mut v = DMatrix::zeros(2 * m, 2 * m);
    for b in 0..m {
        v[(2 * b + 1, 2 * b)] = 1.0;
    }
    Ok(v)
}

/// `V` padded with zeros over the ND sector so it matches `AssembledOperator::matrix`.
pub fn padded_perturbation(op: &AssembledOperator) -> DMatrix<f64> {
    let nd = op.nd_dim();
    let mut out = DMatrix::zeros(op.dim(), op.dim());
    for b in 0..op.m() {
        out[(nd + 2 * b + 1, nd + 2 * b)] = 1.0;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnfoldingPhase {
    /// `eps > 0`: two real eigenvalues.
    Real,
    /// `eps = 0`: one defective eigenvalue.
    Exceptional,
    /// `eps < 0`: complex-conjugate pair.
    Broken,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unfolding {
    /// `E + √eps`, `E - √eps`.
    pub eigenvalues: [Complex64; 2],
    /// `(1, ±√eps)`; a single vector `(1, 0)` at the exceptional point.
    pub eigenvectors: Vec<[Complex64; 2]>,
    pub phase: UnfoldingPhase,
}

impl Unfolding {
    pub fn is_real(&self) -> bool {
        self.phase != UnfoldingPhase::Broken
    }
}

/// Closed-form eigensystem of `[[E, 1], [eps, E]]`.
pub fn unfolded_eigs(block: &BlockHamiltonian) -> Unfolding {
    let one = Complex64::new(1.0, 0.0);
    let e = Complex64::new(block.energy, 0.0);
    let (root, phase) = if block.eps > 0.0 {
        (Complex64::new(block.eps.sqrt(), 0.0), UnfoldingPhase::Real)
    } else if block.eps == 0.0 {
        (Complex64::new(0.0, 0.0), UnfoldingPhase::Exceptional)
    } else {
        (Complex64::new(0.0, (-block.eps).sqrt()), UnfoldingPhase::Broken)
    };
    let eigenvectors = if phase == UnfoldingPhase::Exceptional {
        vec![[one, root]]
    } else {
        vec![[one, root], [one, -root]]
    };
    Unfolding {
        eigenvalues: [e + root, e - root],
        eigenvectors,
        phase,
    }
}

/// Length-2 Jordan chain: `(M - E)v1 = 0`, `(M - E)v2 = v1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain {
    pub energy: Complex64,
    /// Unit norm, largest component real positive.
    pub v1: CVector,
    /// Minimal-norm solution, orthogonal to `v1`.
    pub v2: CVector,
    pub residual_eigen: f64,
    pub residual_chain: f64,
}

fn check_square(m: &CMatrix) -> Result<usize, BlockError> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 {
        return Err(BlockError::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// Extracts the Jordan chain at a defective eigenvalue from the SVD of `M - E`.
///
/// `tol` is the relative rank threshold (against the largest singular value)
/// and also bounds the chain residuals relative to `‖M‖_F`.
pub fn jordan_chain(m: &CMatrix, energy: Complex64, tol: f64) -> Result<JordanChain, BlockError> {
    let n = check_square(m)?;
    if !(tol > 0.0) {
        return Err(BlockError::InvalidTolerance(tol));
    }
    let shifted = m - CMatrix::identity(n, n) * energy;
    let svd = sorted_svd(&shifted).ok_or(BlockError::Svd)?;
    let threshold = tol * svd.values[0];
    let rank = svd.values.iter().filter(|&&s| s > threshold).count();
    let null_dim = n - rank;
    if null_dim != 1 {
        return Err(BlockError::NullspaceDimension { energy, dim: null_dim });
    }

    let mut v1: CVector = svd.right.column(n - 1).into_owned();
    fix_phase(&mut v1);

    // truncated pseudo-inverse applied to v1
    let mut v2 = CVector::zeros(n);
    for i in 0..rank {
        let coeff = svd.left.column(i).dotc(&v1) / svd.values[i];
        v2 += svd.right.column(i) * coeff;
    }

    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    let residual_eigen = vector_norm(&(&shifted * &v1)) / scale;
    let residual_chain = vector_norm(&(&shifted * &v2 - &v1)) / scale;
    if residual_chain > tol {
        return Err(BlockError::InconsistentChain {
            energy,
            residual: residual_chain,
        });
    }
    Ok(JordanChain {
        energy,
        v1,
        v2,
        residual_eigen,
        residual_chain,
    })
}

/// Columns of `Q` and the canonical form they produce.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    /// Eigenvectors of the simple eigenvalues (by ascending real part),
    /// then one Jordan chain per listed energy in the given order.
    pub q: CMatrix,
    /// `Q⁻¹ M Q`.
    pub transformed: CMatrix,
    /// `diag(simple) ⊕ J(E_1) ⊕ J(E_2) ⊕ …`.
    pub canonical: CMatrix,
    /// `‖Q⁻¹ M Q - canonical‖_F / ‖M‖_F`.
    pub residual: f64,
}

/// Solves `M Q = Q J` for a matrix with order-2 exceptional points at the
/// listed energies and simple eigenvalues elsewhere.
pub fn transition_matrix(m: &CMatrix, ep_energies: &[Complex64], tol: f64) -> Result<TransitionMatrix, BlockError> {
    let n = check_square(m)?;
    let needed = 2 * ep_energies.len();
    if needed > n {
        return Err(BlockError::TooManyEnergies {
            listed: ep_energies.len(),
            needed,
            dim: n,
        });
    }
    let chains = ep_energies
        .iter()
        .map(|&e| jordan_chain(m, e, tol))
        .collect::<Result<Vec<_>, _>>()?;

    // remaining spectrum: drop the two eigenvalues nearest each listed energy
    let mut rest = eigen::eigenvalues(m)?;
    for &e in ep_energies {
        for _ in 0..2 {
            let (idx, _) = rest
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - e).norm().total_cmp(&(b.1 - e).norm()))
                .expect("enough eigenvalues remain");
            rest.swap_remove(idx);
        }
    }
    rest.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    for &lambda in &rest {
        let shifted = m - CMatrix::identity(n, n) * lambda;
        let svd = sorted_svd(&shifted).ok_or(BlockError::Svd)?;
        let threshold = tol * svd.values[0];
        if svd.values.iter().filter(|&&s| s <= threshold).count() > 1 {
            return Err(BlockError::RepeatedEigenvalue(lambda));
        }
        let mut v: CVector = svd.right.column(n - 1).into_owned();
        fix_phase(&mut v);
        columns.push(v);
    }
    let simple = rest.len();
    for chain in &chains {
        columns.push(chain.v1.clone());
        columns.push(chain.v2.clone());
    }
    let q = CMatrix::from_columns(&columns);

    let q_svd = sorted_svd(&q).ok_or(BlockError::Svd)?;
    if q_svd.values[n - 1] <= 1e3 * f64::EPSILON * q_svd.values[0] {
        return Err(BlockError::SingularTransition);
    }
    let q_inv = q.clone().try_inverse().ok_or(BlockError::SingularTransition)?;
    let transformed = &q_inv * m * &q;

    let mut canonical = CMatrix::zeros(n, n);
    for (j, &lambda) in rest.iter().enumerate() {
        canonical[(j, j)] = lambda;
    }
    for (b, &e) in ep_energies.iter().enumerate() {
        let o = simple + 2 * b;
        canonical[(o, o)] = e;
        canonical[(o + 1, o + 1)] = e;
        canonical[(o, o + 1)] = Complex64::new(1.0, 0.0);
    }
    let residual = frobenius(&(&transformed - &canonical)) / frobenius(m).max(f64::MIN_POSITIVE);
    Ok(TransitionMatrix {
        q,
        transformed,
        canonical,
        residual,
    })
}

/// Higher-order remainder `Q⁻¹ M Q - (J + eps·V)` against a leading-order assembly.
pub fn higher_order_residual(transition: &TransitionMatrix, leading: &AssembledOperator) -> CMatrix {
    &transition.transformed - leading.to_complex()
}
