//! One function per subcommand; each validates its parameters before computing.

use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use ptho_core::blocks::{assemble_leading_order, AssembledOperator};
use ptho_core::exact::{alpha_from_coupling, degeneracy_table, energy_complex, ep_location, LevelLabel, ModelParams, QuasiParity};
use ptho_core::linalg::{frobenius, to_complex};
use ptho_core::metric::{assemble_metric, dieudonne_residual, evolve, factor_cholesky, factor_trig, to_l_space, AssembledMetric, MetricError, MAX_STEP_SCALE};
use ptho_core::numgrid::{refinement_study, spectrum_compare_with, Grid, SpectrumReport, StencilOrder};
use ptho_core::{CMatrix, CVector};

use crate::config::DEFAULTS;
use crate::error::CliError;
use crate::output::{Cell, Report, Table};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn require_finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

// ---------------------------------------------------------------------------
// spectrum

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumParams {
    pub g_min: f64,
    pub g_max: f64,
    pub steps: usize,
    pub n_levels: u32,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            g_min: DEFAULTS.g_min,
            g_max: DEFAULTS.g_max,
            steps: DEFAULTS.g_steps,
            n_levels: DEFAULTS.sweep_levels as u32,
        }
    }
}

/// Sample `i` of `steps` equally spaced points, with both ends hit exactly.
fn sweep_point(lo: f64, hi: f64, i: usize, steps: usize) -> f64 {
    if i + 1 == steps {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (steps - 1) as f64
    }
}

/// Exact levels `E_n^(Q)(G)` along a coupling sweep, both branches.
///
/// Columns: `G, n, Q, re_E, im_E`. The summary lists every grid coupling at
/// which levels of different `n` coincide (`E_n^(-) = E_n'^(+)`).
pub fn cmd_spectrum(p: &SpectrumParams) -> Result<Report, CliError> {
    require_finite("g-min", p.g_min)?;
    require_finite("g-max", p.g_max)?;
    if p.g_min >= p.g_max {
        return Err(invalid(format!("g-min ({}) must be below g-max ({})", p.g_min, p.g_max)));
    }
    if p.steps < 2 {
        return Err(invalid(format!("steps must be at least 2, got {}", p.steps)));
    }
    if p.n_levels == 0 {
        return Err(invalid("n-levels must be at least 1"));
    }

    let per_point: Vec<(f64, Vec<(LevelLabel, Complex64)>)> = (0..p.steps)
        .into_par_iter()
        .map(|i| {
            let g = sweep_point(p.g_min, p.g_max, i, p.steps);
            let alpha = alpha_from_coupling(g);
            let levels = (0..p.n_levels)
                .flat_map(|n| QuasiParity::BOTH.map(|q| LevelLabel::new(n, q)))
                .map(|label| (label, energy_complex(label, alpha)))
                .collect();
            (g, levels)
        })
        .collect();

    let mut table = Table::new(&["G", "n", "Q", "re_E", "im_E"]);
    let mut crossings = Vec::new();
    let mut degenerate = Vec::new();
    for (g, levels) in &per_point {
        for (label, e) in levels {
            table.push(vec![
                (*g).into(),
                label.n.into(),
                i64::from(label.q.as_i8()).into(),
                e.re.into(),
                e.im.into(),
            ]);
        }
        let of = |q: QuasiParity| levels.iter().filter(move |(l, _)| l.q == q);
        for (minus, em) in of(QuasiParity::Minus) {
            for (plus, ep) in of(QuasiParity::Plus) {
                if em == ep {
                    if minus.n == plus.n {
                        degenerate.push(*g);
                    } else {
                        crossings.push(json!({"G": g, "minus_n": minus.n, "plus_n": plus.n, "energy": em.re}));
                    }
                }
            }
        }
    }
    degenerate.dedup();
    let mut crossing_couplings: Vec<f64> = crossings.iter().filter_map(|c| c["G"].as_f64()).collect();
    crossing_couplings.dedup();
    let ep_couplings: Vec<f64> = (0..)
        .map(ep_location)
        .take_while(|&g| g <= p.g_max)
        .filter(|&g| g >= p.g_min)
        .collect();

    let params = object(json!({"g_min": p.g_min, "g_max": p.g_max, "steps": p.steps, "n_levels": p.n_levels}));
    let mut report = Report::new("spectrum", params, table);
    report.summary.insert("crossings".into(), Value::from(crossings));
    report.summary.insert("crossing_couplings".into(), json!(crossing_couplings));
    report.summary.insert("degenerate_couplings".into(), json!(degenerate));
    report.summary.insert("ep_couplings".into(), json!(ep_couplings));
    Ok(report)
}

// ---------------------------------------------------------------------------
// ep-table

#[derive(Debug, Clone, PartialEq)]
pub struct EpTableParams {
    pub ks: Vec<u32>,
    pub e_max: f64,
}

impl Default for EpTableParams {
    fn default() -> Self {
        Self {
            ks: (0..=4).collect(),
            e_max: DEFAULTS.e_max,
        }
    }
}

/// Degeneracies at the exceptional points `α = K`.
///
/// Columns: `K, E, multiplicity, members` with members joined by `=`.
pub fn cmd_ep_table(p: &EpTableParams) -> Result<Report, CliError> {
    require_finite("e-max", p.e_max)?;
    if p.ks.is_empty() {
        return Err(invalid("at least one K is required"));
    }
    let mut table = Table::new(&["K", "E", "multiplicity", "members"]);
    for &k in &p.ks {
        for row in degeneracy_table(k, p.e_max).rows {
            let members: Vec<String> = row.members.iter().map(ToString::to_string).collect();
            table.push(vec![k.into(), row.energy.into(), row.members.len().into(), members.join("=").into()]);
        }
    }
    let params = object(json!({"k": p.ks, "e_max": p.e_max}));
    Ok(Report::new("ep-table", params, table))
}

// ---------------------------------------------------------------------------
// discretize

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strength {
    Alpha(f64),
    Coupling(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizeParams {
    pub strength: Strength,
    pub shift: f64,
    pub half_width: f64,
    pub points: usize,
    pub order: u32,
    pub n_levels: usize,
    /// Also solve on the refined grid and report error ratios.
    pub refine: bool,
}

impl DiscretizeParams {
    pub fn new(strength: Strength) -> Self {
        Self {
            strength,
            shift: DEFAULTS.shift,
            half_width: DEFAULTS.half_width,
            points: DEFAULTS.grid_points,
            order: DEFAULTS.stencil_order,
            n_levels: DEFAULTS.grid_levels,
            refine: false,
        }
    }
}

fn spectrum_table(report: &SpectrumReport) -> Table {
    let mut table = Table::new(&["n", "Q", "exact_re", "exact_im", "num_re", "num_im", "abs_error", "ambiguous"]);
    for pair in &report.pairs {
        table.push(vec![
            pair.label.n.into(),
            i64::from(pair.label.q.as_i8()).into(),
            pair.exact.re.into(),
            pair.exact.im.into(),
            pair.numerical.re.into(),
            pair.numerical.im.into(),
            pair.abs_error.into(),
            pair.ambiguous.into(),
        ]);
    }
    table
}

/// Finite-difference spectrum on the shifted contour compared with the exact levels.
pub fn cmd_discretize(p: &DiscretizeParams) -> Result<Report, CliError> {
    let model = match p.strength {
        Strength::Alpha(a) => ModelParams::from_alpha(a, p.shift)?,
        Strength::Coupling(g) => ModelParams::from_coupling(g, p.shift)?,
    };
    let grid = Grid::new(p.half_width, p.points)?;
    let order = StencilOrder::from_order(p.order)?;
    if p.n_levels == 0 || p.n_levels > p.points {
        return Err(invalid(format!("n-levels must be in 1..={}, got {}", p.points, p.n_levels)));
    }

    let (report, refinement) = if p.refine {
        let study = refinement_study(&model, &grid, order, p.n_levels)?;
        let extra = json!({
            "fine_points": grid.refined().points(),
            "fine_max_error": study.fine.max_error(),
            "fine_max_imag": study.fine.max_imag,
            "ratios": study.ratios,
        });
        (study.coarse, Some(extra))
    } else {
        (spectrum_compare_with(&model, &grid, order, p.n_levels)?, None)
    };

    let strength = match p.strength {
        Strength::Alpha(a) => json!({"alpha": a}),
        Strength::Coupling(g) => json!({"G": g}),
    };
    let mut params = object(strength);
    params.extend(object(json!({
        "c": p.shift,
        "L": p.half_width,
        "N": p.points,
        "order": p.order,
        "n_levels": p.n_levels,
        "refine": p.refine,
    })));
    let mut out = Report::new("discretize", params, spectrum_table(&report));
    out.summary.insert("max_error".into(), json!(report.max_error()));
    out.summary.insert("max_imag".into(), json!(report.max_imag));
    out.summary.insert("broken_phase".into(), json!(report.broken_phase));
    out.summary.insert("ambiguous".into(), json!(report.has_ambiguity()));
    out.summary.insert("discarded".into(), json!(report.discarded));
    out.summary.insert("spacing".into(), json!(grid.spacing()));
    if let Some(extra) = refinement {
        out.summary.insert("refinement".into(), extra);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// block commands

/// Metric off-diagonals: an explicit list (a single value is broadcast) or random.
#[derive(Debug, Clone, PartialEq)]
pub enum BSpec {
    Values(Vec<f64>),
    Random,
}

impl Default for BSpec {
    fn default() -> Self {
        BSpec::Values(vec![0.0])
    }
}

impl FromStr for BSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("random") {
            return Ok(BSpec::Random);
        }
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad b value `{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(BSpec::Values)
    }
}

impl BSpec {
    pub fn resolve(&self, m: usize, seed: u64) -> Result<Vec<f64>, CliError> {
        match self {
            BSpec::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let bound = DEFAULTS.random_b_bound;
                Ok((0..m).map(|_| rng.random_range(-bound..=bound)).collect())
            }
            BSpec::Values(v) if v.len() == 1 => Ok(vec![v[0]; m]),
            BSpec::Values(v) if v.len() == m => Ok(v.clone()),
            BSpec::Values(v) => Err(invalid(format!("expected 1 or {m} b values, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub k: u32,
    pub alpha: f64,
    pub m: usize,
    pub b: BSpec,
    pub seed: u64,
}

impl BlockParams {
    pub fn new(k: u32, alpha: f64) -> Self {
        Self {
            k,
            alpha,
            m: DEFAULTS.blocks,
            b: BSpec::default(),
            seed: DEFAULTS.seed,
        }
    }

    fn json(&self, b: &[f64]) -> Map<String, Value> {
        let spec = match self.b {
            BSpec::Random => json!("random"),
            BSpec::Values(_) => json!("list"),
        };
        object(json!({"k": self.k, "alpha": self.alpha, "m": self.m, "b": b, "b_spec": spec, "seed": self.seed}))
    }
}

/// Validated Hamiltonian/metric pair of one block configuration.
struct System {
    b: Vec<f64>,
    h: AssembledOperator,
    metric: AssembledMetric,
}

fn build_system(p: &BlockParams) -> Result<System, CliError> {
    require_finite("alpha", p.alpha)?;
    if p.alpha < 0.0 {
        return Err(invalid(format!("alpha must be non-negative, got {}", p.alpha)));
    }
    if p.m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let b = p.b.resolve(p.m, p.seed)?;
    let metric = assemble_metric(p.k, p.alpha, &b)?;
    let h = assemble_leading_order(p.k, p.alpha, p.m)?;
    Ok(System { b, h, metric })
}

fn symmetric_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    (eig.min(), eig.max())
}

/// Assembled metric `I_K ⊕ Θ_0 ⊕ …` with per-block entries and eigenvalues.
pub fn cmd_metric(p: &BlockParams) -> Result<Report, CliError> {
    let sys = build_system(p)?;
    let mut table = Table::new(&[
        "block", "energy", "eps", "b", "theta_11", "theta_12", "theta_22", "lambda_min", "lambda_max",
    ]);
    let energies = sys.h.block_energies();
    for (i, block) in sys.metric.blocks.iter().enumerate() {
        let m = block.matrix();
        let [lo, hi] = block.eigenvalues();
        table.push(vec![
            i.into(),
            energies[i].into(),
            block.eps().into(),
            block.b().into(),
            m[(0, 0)].into(),
            m[(0, 1)].into(),
            m[(1, 1)].into(),
            lo.into(),
            hi.into(),
        ]);
    }
    let (lo, hi) = symmetric_range(&sys.metric.matrix());
    let mut report = Report::new("metric", p.json(&sys.b), table);
    report.summary.insert("nd_dim".into(), json!(sys.metric.nd_dim));
    report.summary.insert("dim".into(), json!(sys.metric.dim()));
    report.summary.insert("lambda_min".into(), json!(lo));
    report.summary.insert("lambda_max".into(), json!(hi));
    report.summary.insert(
        "dieudonne_residual".into(),
        json!(dieudonne_residual(&sys.h.to_complex(), &sys.metric.to_complex())?),
    );
    Ok(report)
}

/// Cholesky and trigonometric factors of every metric block, side by side.
pub fn cmd_factor(p: &BlockParams) -> Result<Report, CliError> {
    let sys = build_system(p)?;
    let mut table = Table::new(&[
        "block",
        "eps",
        "b",
        "chol_11",
        "chol_21",
        "chol_22",
        "chol_error",
        "trig_p",
        "trig_a",
        "trig_q",
        "trig_mu",
        "trig_nu",
        "trig_error",
        "trig_status",
    ]);
    let mut any_infeasible = false;
    for (i, block) in sys.metric.blocks.iter().enumerate() {
        let theta = to_complex(&block.matrix());
        let chol = factor_cholesky(&theta)?;
        let chol_error = frobenius(&(chol.adjoint() * &chol - &theta)) / frobenius(&theta);
        let mut row: Vec<Cell> = vec![
            i.into(),
            block.eps().into(),
            block.b().into(),
            chol[(0, 0)].re.into(),
            chol[(1, 0)].re.into(),
            chol[(1, 1)].re.into(),
            chol_error.into(),
        ];
        match factor_trig(block.eps(), block.b()) {
            Ok(f) => {
                let om = to_complex(&f.matrix());
                let err = frobenius(&(om.transpose() * &om - &theta)) / frobenius(&theta);
                row.extend([f.p.into(), f.a.into(), f.q.into(), f.mu.into(), f.nu.into(), err.into(), "ok".into()]);
            }
            Err(MetricError::Infeasible { .. }) => {
                any_infeasible = true;
                row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), 6));
                row.push("infeasible".into());
            }
            Err(e) => return Err(e.into()),
        }
        table.push(row);
    }

    let h = sys.h.to_complex();
    let theta = sys.metric.to_complex();
    let chol = factor_cholesky(&theta)?;
    let mut report = Report::new("factor", p.json(&sys.b), table);
    report.summary.insert("l_space_cholesky".into(), json!(to_l_space(&h, &chol)?.hermiticity_residual));
    if !any_infeasible {
        let trig = sys.metric.trig_factor()?;
        report.summary.insert("l_space_trig".into(), json!(to_l_space(&h, &trig)?.hermiticity_residual));
    }
    Ok(report)
}

/// Seeded random state of unit norm, on a stream independent of the `b` draw.
fn random_state(dim: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let v = CVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveParams {
    pub block: BlockParams,
    pub t_final: f64,
    /// Defaults to the largest admissible step `0.01/‖H‖_F`.
    pub dt: Option<f64>,
    pub rows: usize,
}

impl EvolveParams {
    pub fn new(block: BlockParams) -> Self {
        Self {
            block,
            t_final: DEFAULTS.t_final,
            dt: None,
            rows: DEFAULTS.trace_rows,
        }
    }
}

fn default_step(h: &CMatrix) -> f64 {
    MAX_STEP_SCALE / frobenius(h)
}

/// RK4 evolution with a sampled trace of the Θ-norm and the plain norm.
///
/// Columns: `step, t, theta_norm, k_norm, theta_drift`.
pub fn cmd_evolve(p: &EvolveParams) -> Result<Report, CliError> {
    require_finite("t-final", p.t_final)?;
    if p.rows == 0 {
        return Err(invalid("rows must be at least 1"));
    }
    let sys = build_system(&p.block)?;
    let h = sys.h.to_complex();
    let theta = sys.metric.to_complex();
    let dt = p.dt.unwrap_or_else(|| default_step(&h));
    let psi0 = random_state(h.nrows(), p.block.seed);
    let tr = evolve(&h, &theta, &psi0, p.t_final, dt)?;

    let steps = tr.steps();
    let stride = steps.div_ceil(p.rows).max(1);
    let norm0 = tr.theta_norms[0];
    let mut table = Table::new(&["step", "t", "theta_norm", "k_norm", "theta_drift"]);
    let mut push = |i: usize| {
        table.push(vec![
            i.into(),
            tr.times[i].into(),
            tr.theta_norms[i].into(),
            tr.k_norms[i].into(),
            ((tr.theta_norms[i] - norm0).abs() / norm0).into(),
        ])
    };
    for i in (0..=steps).step_by(stride) {
        push(i);
    }
    if steps % stride != 0 {
        push(steps);
    }

    let mut params = p.block.json(&sys.b);
    params.extend(object(json!({"t_final": p.t_final, "dt": tr.times[1], "rows": p.rows})));
    let mut report = Report::new("evolve", params, table);
    report.summary.insert("steps".into(), json!(steps));
    report.summary.insert("max_norm_drift".into(), json!(tr.max_norm_drift));
    report.summary.insert("k_norm_variation".into(), json!(tr.k_norm_variation));
    report.summary.insert("dieudonne_residual".into(), json!(tr.dieudonne_residual));
    Ok(report)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyParams {
    pub block: BlockParams,
    pub tol: f64,
    pub t_final: f64,
}

impl VerifyParams {
    pub fn new(block: BlockParams) -> Self {
        Self {
            block,
            tol: DEFAULTS.tolerance,
            t_final: DEFAULTS.t_final,
        }
    }
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    /// `value > threshold` instead of `value <= threshold`.
    lower_bound: bool,
}

impl Check {
    fn passes(&self) -> bool {
        if self.lower_bound {
            self.value > self.threshold
        } else {
            self.value <= self.threshold
        }
    }

    fn describe(&self) -> String {
        let op = if self.lower_bound { "<=" } else { ">" };
        format!("{} = {:e} {op} {:e}", self.name, self.value, self.threshold)
    }
}

/// Full consistency report for one (K, α, m, b) configuration: Dieudonné
/// residual, metric positivity, L-space hermiticity through both
/// factorizations and Θ-norm conservation under evolution.
pub fn cmd_verify(p: &VerifyParams) -> Result<Report, CliError> {
    if !(p.tol > 0.0 && p.tol.is_finite()) {
        return Err(invalid(format!("tol must be positive, got {}", p.tol)));
    }
    if !(p.t_final > 0.0 && p.t_final.is_finite()) {
        return Err(invalid(format!("t-final must be positive, got {}", p.t_final)));
    }
    let sys = build_system(&p.block)?;
    let h = sys.h.to_complex();
    let theta = sys.metric.to_complex();

    let residual = dieudonne_residual(&h, &theta)?;
    let (lambda_min, lambda_max) = symmetric_range(&sys.metric.matrix());
    let chol = factor_cholesky(&theta)?;
    let l_chol = to_l_space(&h, &chol)?.hermiticity_residual;
    let (l_trig, trig_status) = match sys.metric.trig_factor() {
        Ok(omega) => (to_l_space(&h, &omega)?.hermiticity_residual, "ok"),
        Err(MetricError::Infeasible { eps, b }) => {
            log::warn!("trigonometric factorization infeasible at eps = {eps}, b = {b}; using the Cholesky factor");
            (l_chol, "cholesky-fallback")
        }
        Err(e) => return Err(e.into()),
    };
    let psi0 = random_state(h.nrows(), p.block.seed);
    let tr = evolve(&h, &theta, &psi0, p.t_final, default_step(&h))?;

    let checks = [
        Check { name: "dieudonne_residual", value: residual, threshold: p.tol, lower_bound: false },
        Check { name: "metric_min_eigenvalue", value: lambda_min, threshold: 0.0, lower_bound: true },
        Check { name: "l_space_cholesky", value: l_chol, threshold: p.tol, lower_bound: false },
        Check { name: "l_space_trig", value: l_trig, threshold: p.tol, lower_bound: false },
        Check {
            name: "evolution_drift",
            value: tr.max_norm_drift,
            threshold: DEFAULTS.drift_threshold,
            lower_bound: false,
        },
    ];

    let mut table = Table::new(&["check", "value", "threshold", "pass"]);
    let mut report_thresholds = Map::new();
    for c in &checks {
        table.push(vec![c.name.into(), c.value.into(), c.threshold.into(), c.passes().into()]);
        report_thresholds.insert(c.name.into(), json!(c.threshold));
    }
    let mut params = p.block.json(&sys.b);
    params.extend(object(json!({"tol": p.tol, "t_final": p.t_final})));
    let mut report = Report::new("verify", params, table);
    report.thresholds = report_thresholds;
    for c in &checks {
        report.summary.insert(c.name.into(), json!(c.value));
    }
    report.summary.insert("metric_max_eigenvalue".into(), json!(lambda_max));
    report.summary.insert("trig_factor".into(), json!(trig_status));
    report.summary.insert("k_norm_variation".into(), json!(tr.k_norm_variation));
    report.summary.insert("evolution_steps".into(), json!(tr.steps()));
    report.failure = checks.iter().find(|c| !c.passes()).map(Check::describe);
    report.pass = report.failure.is_none();
    Ok(report)
}
