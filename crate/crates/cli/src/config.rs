//! Every default the CLI uses, in one place.
//!
//! Command-line flags override these values. Three of them can also be set
//! through the environment, and a flag still takes precedence over the
//! variable:
//!
//! | variable              | default | flag                     |
//! |-----------------------|---------|--------------------------|
//! | `PTHO_SEED`           | 0       | `--seed`                 |
//! | `PTHO_TOL`            | 1e-10   | `verify --tol`           |
//! | `PTHO_DEFAULT_GRID_N` | 800     | `discretize --points`    |

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const ENV_SEED: &str = "PTHO_SEED";
pub const ENV_TOL: &str = "PTHO_TOL";
pub const ENV_GRID_N: &str = "PTHO_DEFAULT_GRID_N";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defaults {
    /// Half-width `L` of the truncated domain.
    pub half_width: f64,
    /// Interior grid points `N`.
    pub grid_points: usize,
    /// Contour shift `c`.
    pub shift: f64,
    pub stencil_order: u32,
    /// Levels compared by `discretize`.
    pub grid_levels: usize,
    /// Truncation size `m` of the block direct sums.
    pub blocks: usize,
    /// Residual threshold used by `verify`.
    pub tolerance: f64,
    pub seed: u64,
    pub g_min: f64,
    pub g_max: f64,
    /// Grid points of the `spectrum` sweep; the default puts every `G`
    /// with `G + 1/4` a multiple of 1/4 on the grid.
    pub g_steps: usize,
    /// Levels per quasi-parity branch in `spectrum`.
    pub sweep_levels: usize,
    pub e_max: f64,
    /// Evolution time for `evolve` and `verify`.
    pub t_final: f64,
    /// Maximum relative Θ-norm drift accepted by `verify`.
    pub drift_threshold: f64,
    /// Random `b_n` are drawn uniformly from `[-bound, bound]`.
    pub random_b_bound: f64,
    /// Trace rows written by `evolve`.
    pub trace_rows: usize,
}

pub const DEFAULTS: Defaults = Defaults {
    half_width: 8.0,
    grid_points: 800,
    shift: 1.0,
    stencil_order: 4,
    grid_levels: 6,
    blocks: 8,
    tolerance: 1e-10,
    seed: 0,
    g_min: -0.25,
    g_max: 16.0,
    g_steps: 66,
    sweep_levels: 5,
    e_max: 10.0,
    t_final: 20.0,
    drift_threshold: 1e-7,
    random_b_bound: 0.9,
    trace_rows: 1000,
};
