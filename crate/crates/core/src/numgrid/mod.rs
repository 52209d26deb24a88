//! Finite-difference discretization of the contour Hamiltonian
//! `-d²/dx² + (x - ic)² + G/(x - ic)²` on `[-L, L]` with Dirichlet ends.
//!
//! This is the independent numerical cross-check of the closed-form
//! spectrum in [`crate::exact`].

pub mod eigen;

use num_complex::Complex64;

use crate::exact::{energy_complex, LevelLabel, ModelParams, QuasiParity};
use crate::{CMatrix, CVector};

pub use eigen::{EigenError, EigenOptions};

pub const DEFAULT_HALF_WIDTH: f64 = 8.0;
pub const DEFAULT_POINTS: usize = 800;
pub const MIN_POINTS: usize = 16;
/// Below this half-width the Gaussian tails are visibly cut off.
pub const MIN_SAFE_HALF_WIDTH: f64 = 6.0;
/// Eigenvalues with `|Re E|` above this fraction of the largest potential are
/// treated as truncation artifacts.
pub const SPURIOUS_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid half-width must be positive and finite, got {0}")]
    InvalidHalfWidth(f64),
    #[error("grid needs at least {MIN_POINTS} interior points, got {0}")]
    TooFewPoints(usize),
    #[error("stencil order must be 2 or 4, got {0}")]
    InvalidOrder(u32),
    #[error("requested {requested} levels but only {available} eigenvalues survive the spurious filter")]
    TooManyLevels { requested: usize, available: usize },
    #[error("n_levels must be positive")]
    NoLevels,
    #[error("inverse iteration failed near {0}")]
    InverseIteration(Complex64),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Uniform grid of `N` interior points on `(-L, L)`, spacing `h = 2L/(N+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(half_width: f64, points: usize) -> Result<Self, GridError> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(GridError::InvalidHalfWidth(half_width));
        }
        if points < MIN_POINTS {
            return Err(GridError::TooFewPoints(points));
        }
        Ok(Self {
            half_width,
            points,
            spacing: 2.0 * half_width / (points as f64 + 1.0),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 1.0) * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|j| self.node(j))
    }

    /// Same domain with half the spacing.
    pub fn refined(&self) -> Self {
        Self::new(self.half_width, 2 * self.points + 1).expect("refining a valid grid")
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::new(DEFAULT_HALF_WIDTH, DEFAULT_POINTS).expect("default grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    Second,
    #[default]
    Fourth,
}

impl StencilOrder {
    pub fn from_order(order: u32) -> Result<Self, GridError> {
        match order {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            other => Err(GridError::InvalidOrder(other)),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    /// Coefficients of `-d²/dx²` at offsets 0, 1, 2, in units of `1/h²`.
    fn coefficients(self) -> [f64; 3] {
        match self {
            StencilOrder::Second => [2.0, -1.0, 0.0],
            StencilOrder::Fourth => [30.0 / 12.0, -16.0 / 12.0, 1.0 / 12.0],
        }
    }
}

/// `(x - ic)² + G/(x - ic)²`.
pub fn potential(params: &ModelParams, x: f64) -> Complex64 {
    let r = Complex64::new(x, -params.shift());
    let r2 = r * r;
    r2 + params.coupling() / r2
}

/// Dense discretized Hamiltonian.
#[derive(Debug, Clone)]
pub struct GridOperator {
    matrix: CMatrix,
    grid: Grid,
    order: StencilOrder,
    params: ModelParams,
}

impl GridOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> StencilOrder {
        self.order
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `max |M - Mᵀ|` (plain transpose).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        worst
    }

    /// Largest `Re V(x_j)` over the grid.
    pub fn max_potential(&self) -> f64 {
        self.grid
            .nodes()
            .map(|x| potential(&self.params, x).re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Banded matrix-vector product, cheaper than going through the dense matrix.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(psi.len(), n, "vector length must match the grid");
        let h2 = self.grid.spacing * self.grid.spacing;
        let [c0, c1, c2] = self.order.coefficients();
        (0..n)
            .map(|j| {
                let at = |k: isize| -> Complex64 {
                    let idx = j as isize + k;
                    if idx < 0 || idx >= n as isize {
                        Complex64::new(0.0, 0.0)
                    } else {
                        psi[idx as usize]
                    }
                };
                let kinetic = (at(0) * c0 + (at(-1) + at(1)) * c1 + (at(-2) + at(2)) * c2) / h2;
                kinetic + potential(&self.params, self.grid.node(j)) * psi[j]
            })
            .collect()
    }
}

pub fn build_operator(params: &ModelParams, grid: &Grid, order: StencilOrder) -> GridOperator {
    if grid.half_width() < MIN_SAFE_HALF_WIDTH {
        log::warn!(
            "grid half-width {} < {}: Dirichlet truncation will dominate the error",
            grid.half_width(),
            MIN_SAFE_HALF_WIDTH
        );
    }
    let n = grid.points();
    let h2 = grid.spacing() * grid.spacing();
    let [c0, c1, c2] = order.coefficients();
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = potential(params, grid.node(j)) + c0 / h2;
        if j + 1 < n {
            m[(j, j + 1)] = Complex64::new(c1 / h2, 0.0);
            m[(j + 1, j)] = Complex64::new(c1 / h2, 0.0);
        }
        if c2 != 0.0 && j + 2 < n {
            m[(j, j + 2)] = Complex64::new(c2 / h2, 0.0);
            m[(j + 2, j)] = Complex64::new(c2 / h2, 0.0);
        }
    }
    GridOperator {
        matrix: m,
        grid: *grid,
        order,
        params: *params,
    }
}

pub fn eig_complex(op: &GridOperator) -> Result<Vec<Complex64>, EigenError> {
    eigen::eigenvalues(op.matrix())
}

/// One exact level matched to a numerical eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPair {
    pub label: LevelLabel,
    pub exact: Complex64,
    pub numerical: Complex64,
    pub abs_error: f64,
    /// Degenerate exact level, or a match that could swap with a neighbor.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub pairs: Vec<LevelPair>,
    pub max_imag: f64,
    pub broken_phase: bool,
    /// Eigenvalues removed by the spurious filter.
    pub discarded: usize,
}

impl SpectrumReport {
    pub fn max_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.abs_error).fold(0.0, f64::max)
    }

    pub fn has_ambiguity(&self) -> bool {
        self.pairs.iter().any(|p| p.ambiguous)
    }
}

/// The `n_levels` exact levels of lowest real part, ordered by `(Re E, label)`.
pub fn exact_levels(params: &ModelParams, n_levels: usize) -> Vec<(LevelLabel, Complex64)> {
    let alpha = params.alpha();
    let mut levels: Vec<(LevelLabel, Complex64)> = (0..n_levels as u32)
        .flat_map(|n| QuasiParity::BOTH.map(|q| LevelLabel::new(n, q)))
        .map(|label| (label, energy_complex(label, alpha)))
        .collect();
    levels.sort_by(|a, b| a.1.re.total_cmp(&b.1.re).then(a.0.cmp(&b.0)));
    levels.truncate(n_levels);
    levels
}

/// Pairs exact levels with numerical eigenvalues.
///
/// Eigenvalues with `|Re E| > cutoff` are discarded, the `n_levels` of lowest
/// real part are kept and matched greedily by global nearest distance.
pub fn compare_eigenvalues(
    params: &ModelParams,
    eigenvalues: &[Complex64],
    cutoff: f64,
    n_levels: usize,
) -> Result<SpectrumReport, GridError> {
    if n_levels == 0 {
        return Err(GridError::NoLevels);
    }
    let mut kept: Vec<Complex64> = eigenvalues.iter().copied().filter(|e| e.re.abs() <= cutoff).collect();
    let discarded = eigenvalues.len() - kept.len();
    if kept.len() < n_levels {
        return Err(GridError::TooManyLevels {
            requested: n_levels,
            available: kept.len(),
        });
    }
    kept.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    kept.truncate(n_levels);
    let exact = exact_levels(params, n_levels);

    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(n_levels * n_levels);
    for (i, (_, e)) in exact.iter().enumerate() {
        for (j, z) in kept.iter().enumerate() {
            candidates.push(((e - z).norm(), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assigned: Vec<Option<usize>> = vec![None; n_levels];
    let mut taken = vec![false; n_levels];
    for (_, i, j) in candidates {
        if assigned[i].is_none() && !taken[j] {
            assigned[i] = Some(j);
            taken[j] = true;
        }
    }

    let pairs = exact
        .iter()
        .enumerate()
        .map(|(i, &(label, e))| {
            let z = kept[assigned[i].expect("square assignment")];
            let err = (e - z).norm();
            let nearest_other = exact
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, (_, f))| (e - f).norm())
                .fold(f64::INFINITY, f64::min);
            let degenerate = nearest_other <= 1e-9 * (1.0 + e.norm());
            LevelPair {
                label,
                exact: e,
                numerical: z,
                abs_error: err,
                ambiguous: degenerate || err > 0.5 * nearest_other,
            }
        })
        .collect();
    let max_imag = kept.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(SpectrumReport {
        pairs,
        max_imag,
        broken_phase: params.is_broken_phase(),
        discarded,
    })
}

pub fn spectrum_compare(params: &ModelParams, grid: &Grid, n_levels: usize) -> Result<SpectrumReport, GridError> {
    spectrum_compare_with(params, grid, StencilOrder::Fourth, n_levels)
}

pub fn spectrum_compare_with(
    params: &ModelParams,
    grid: &Grid,
    order: StencilOrder,
    n_levels: usize,
) -> Result<SpectrumReport, GridError> {
    let op = build_operator(params, grid, order);
    let eigenvalues = eig_complex(&op)?;
    compare_eigenvalues(params, &eigenvalues, SPURIOUS_FRACTION * op.max_potential(), n_levels)
}

/// Spectra on a grid and on its refinement (half spacing), computed in parallel.
#[derive(Debug, Clone)]
pub struct RefinementStudy {
    pub coarse: SpectrumReport,
    pub fine: SpectrumReport,
    /// Per-level `coarse error / fine error`.
    pub ratios: Vec<f64>,
}

pub fn refinement_study(
    params: &ModelParams,
    grid: &Grid,
    order: StencilOrder,
    n_levels: usize,
) -> Result<RefinementStudy, GridError> {
    let fine_grid = grid.refined();
    let (coarse, fine) = rayon::join(
        || spectrum_compare_with(params, grid, order, n_levels),
        || spectrum_compare_with(params, &fine_grid, order, n_levels),
    );
    let (coarse, fine) = (coarse?, fine?);
    let ratios = coarse
        .pairs
        .iter()
        .zip(&fine.pairs)
        .map(|(c, f)| c.abs_error / f.abs_error)
        .collect();
    Ok(RefinementStudy { coarse, fine, ratios })
}

/// Defectivity signature near an exceptional point: condition number of the
/// unit-normalized eigenvector pair of the two eigenvalues closest to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpDiagnostic {
    pub eigenvalues: [Complex64; 2],
    pub splitting: f64,
    pub condition: f64,
}

pub fn ep_condition_number(op: &GridOperator, target: Complex64) -> Result<EpDiagnostic, GridError> {
    let mut eigenvalues = eig_complex(op)?;
    eigenvalues.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
    let pair = [eigenvalues[0], eigenvalues[1]];
    let v1 = inverse_iteration(op.matrix(), pair[0])?;
    let v2 = inverse_iteration(op.matrix(), pair[1])?;
    let overlap = v1.dotc(&v2).norm().min(1.0);
    // singular values of [v1 v2] with unit columns are √(1 ± |⟨v1,v2⟩|)
    let condition = ((1.0 + overlap) / (1.0 - overlap)).sqrt();
    Ok(EpDiagnostic {
        eigenvalues: pair,
        splitting: (pair[0] - pair[1]).norm(),
        condition,
    })
}

fn inverse_iteration(m: &CMatrix, lambda: Complex64) -> Result<CVector, GridError> {
    let n = m.nrows();
    let shift = lambda + Complex64::new(1e-10 * (1.0 + lambda.norm()), 0.0);
    let shifted = m - CMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = CVector::from_fn(n, |i, _| Complex64::new(1.0, 0.01 * i as f64));
    v /= Complex64::new(v.norm(), 0.0);
    for _ in 0..4 {
        let w = lu.solve(&v).ok_or(GridError::InverseIteration(lambda))?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(GridError::InverseIteration(lambda));
        }
        v = w / Complex64::new(norm, 0.0);
    }
    Ok(v)
}
