//! Argument parsing; every default comes from [`crate::config::DEFAULTS`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::*;
use crate::config::{DEFAULTS, ENV_GRID_N, ENV_SEED, ENV_TOL};
use crate::error::CliError;
use crate::output::{OutputFormat, Report};

#[derive(Debug, Parser)]
#[command(name = "ptho", version, about = "Spectra, exceptional points and physical metrics of the PT-symmetric spiked oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// csv, json or pretty
    #[arg(long, global = true, default_value = "pretty")]
    pub output_format: OutputFormat,

    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Seed for randomized b-lists and initial states
    #[arg(long, global = true, env = ENV_SEED, default_value_t = DEFAULTS.seed)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact levels along a sweep of the coupling G
    Spectrum {
        #[arg(long, default_value_t = DEFAULTS.g_min, allow_hyphen_values = true)]
        g_min: f64,
        #[arg(long, default_value_t = DEFAULTS.g_max, allow_hyphen_values = true)]
        g_max: f64,
        #[arg(long, default_value_t = DEFAULTS.g_steps)]
        steps: usize,
        /// Levels per quasi-parity branch
        #[arg(long, default_value_t = DEFAULTS.sweep_levels as u32)]
        n_levels: u32,
    },
    /// Degeneracy table at the exceptional points alpha = K
    EpTable {
        /// Comma-separated exceptional-point indices
        #[arg(long, value_delimiter = ',', default_values_t = [0u32, 1, 2, 3, 4])]
        k: Vec<u32>,
        #[arg(long, default_value_t = DEFAULTS.e_max, allow_hyphen_values = true)]
        e_max: f64,
    },
    /// Finite-difference spectrum compared with the exact levels
    Discretize {
        #[arg(long, conflicts_with = "coupling", required_unless_present = "coupling", allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Coupling G instead of alpha
        #[arg(long, allow_hyphen_values = true)]
        coupling: Option<f64>,
        /// Contour shift
        #[arg(long = "c", default_value_t = DEFAULTS.shift, allow_hyphen_values = true)]
        shift: f64,
        /// Half-width L of the domain
        #[arg(long, short = 'L', default_value_t = DEFAULTS.half_width)]
        half_width: f64,
        /// Interior grid points N
        #[arg(long, short = 'N', env = ENV_GRID_N, default_value_t = DEFAULTS.grid_points)]
        points: usize,
        /// Stencil order, 2 or 4
        #[arg(long, default_value_t = DEFAULTS.stencil_order)]
        order: u32,
        #[arg(long, default_value_t = DEFAULTS.grid_levels)]
        n_levels: usize,
        /// Also solve with half the spacing and report error ratios
        #[arg(long)]
        refine: bool,
    },
    /// Dump the assembled metric
    Metric(BlockArgs),
    /// Compare the Cholesky and trigonometric factorizations
    Factor(BlockArgs),
    /// Integrate the leading-order Hamiltonian and trace the norms
    Evolve {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, default_value_t = DEFAULTS.t_final)]
        t_final: f64,
        /// Time step; defaults to 0.01/||H||_F
        #[arg(long)]
        dt: Option<f64>,
        /// Trace rows to emit
        #[arg(long, default_value_t = DEFAULTS.trace_rows)]
        rows: usize,
    },
    /// Check every metric property for one configuration; exit 4 on violation
    Verify {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, env = ENV_TOL, default_value_t = DEFAULTS.tolerance)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULTS.t_final)]
        t_final: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct BlockArgs {
    /// Exceptional-point index K
    #[arg(long)]
    pub k: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Number of 2x2 blocks
    #[arg(long, default_value_t = DEFAULTS.blocks)]
    pub m: usize,
    /// Comma-separated b values (one value is broadcast) or `random`
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub b: BSpec,
}

impl BlockArgs {
    fn params(&self, seed: u64) -> BlockParams {
        BlockParams {
            k: self.k,
            alpha: self.alpha,
            m: self.m,
            b: self.b.clone(),
            seed,
        }
    }
}

/// Runs the parsed command.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Spectrum { g_min, g_max, steps, n_levels } => cmd_spectrum(&SpectrumParams {
            g_min: *g_min,
            g_max: *g_max,
            steps: *steps,
            n_levels: *n_levels,
        }),
        Command::EpTable { k, e_max } => cmd_ep_table(&EpTableParams { ks: k.clone(), e_max: *e_max }),
        Command::Discretize { alpha, coupling, shift, half_width, points, order, n_levels, refine } => {
            let strength = match (alpha, coupling) {
                (Some(a), None) => Strength::Alpha(*a),
                (None, Some(g)) => Strength::Coupling(*g),
                _ => return Err(CliError::Validation("give exactly one of --alpha and --coupling".into())),
            };
            cmd_discretize(&DiscretizeParams {
                strength,
                shift: *shift,
                half_width: *half_width,
                points: *points,
                order: *order,
                n_levels: *n_levels,
                refine: *refine,
            })
        }
        Command::Metric(b) => cmd_metric(&b.params(cli.seed)),
        Command::Factor(b) => cmd_factor(&b.params(cli.seed)),
        Command::Evolve { block, t_final, dt, rows } => cmd_evolve(&EvolveParams {
            block: block.params(cli.seed),
            t_final: *t_final,
            dt: *dt,
            rows: *rows,
        }),
        Command::Verify { block, tol, t_final } => cmd_verify(&VerifyParams {
            block: block.params(cli.seed),
            tol: *tol,
            t_final: *t_final,
        }),
    }
}

/// Executes, writes the rendered report and maps the outcome to an exit status.
///
/// A failed `verify` still writes its report before returning the threshold error.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let report = execute(cli)?;
    let text = report.render(cli.output_format)?;
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    match report.failure {
        Some(f) => Err(CliError::Threshold(f)),
        None => Ok(()),
    }
}
