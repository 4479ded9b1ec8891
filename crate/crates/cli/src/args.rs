use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use minimax_core::problems::ProblemFile;
use minimax_core::spectral::{default_eps_grid, geometric_grid, CurveConfig, Tolerances};
use minimax_core::stability::default_tau_grid;
use minimax_core::{Builtin, Execution, MinimaxProblem};
use nalgebra::DVector;

#[derive(Debug, Parser)]
#[command(name = "minimax", version, about = "Two-timescale GDA/EG dynamics and stability classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a stationary point and write report.json.
    Classify(ClassifyArgs),
    /// Run an ensemble of trajectories from random initial points.
    Simulate(SimulateArgs),
    /// Count how many random starts converge to a point the method should avoid.
    Avoidance(AvoidanceArgs),
    /// Write eigencurves of H_tau and per-tau stability verdicts as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// JSON problem file.
    #[arg(long, conflicts_with = "builtin")]
    pub problem: Option<PathBuf>,
    /// Builtin problem: bilinear, scalar_degenerate, nondegenerate_quadratic,
    /// strict_nonminimax_demo.
    #[arg(long)]
    pub builtin: Option<String>,
    /// `a` for scalar_degenerate.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// `c` for scalar_degenerate.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
}

impl ProblemArgs {
    pub fn file(&self) -> Result<ProblemFile> {
        match (&self.problem, &self.builtin) {
            (Some(path), None) => {
                if self.a.is_some() || self.c.is_some() {
                    bail!("--a/--c only apply to --builtin scalar_degenerate");
                }
                ProblemFile::load(path).with_context(|| format!("loading {}", path.display()))
            }
            (None, Some(name)) => {
                // Validate the name early; parameters are merged by the loader.
                Builtin::parse(name)?;
                Ok(ProblemFile::Builtin { name: name.clone(), a: self.a, c: self.c })
            }
            _ => bail!("exactly one of --problem or --builtin is required"),
        }
    }

    pub fn load(&self) -> Result<(MinimaxProblem, ProblemFile)> {
        let file = self.file()?;
        let problem = file.to_problem()?;
        Ok((problem, file))
    }
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Relative rank cut-off for B.
    #[arg(long)]
    pub tol_rank: Option<f64>,
    /// Relative PSD tolerance.
    #[arg(long)]
    pub tol_psd: Option<f64>,
    /// Band around zero for marginal stability margins.
    #[arg(long)]
    pub tol_marginal: Option<f64>,
    /// Relative separation below which singular values count as repeated.
    #[arg(long)]
    pub tol_sep: Option<f64>,
    /// Residual |F(z)| accepted as stationary.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_stationary: f64,
}

impl TolArgs {
    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(x) = self.tol_rank {
            t.rank_tol = x;
        }
        if let Some(x) = self.tol_psd {
            t.psd_rel = x;
        }
        if let Some(x) = self.tol_marginal {
            t.marginal_tol = x;
        }
        if let Some(x) = self.tol_sep {
            t.sep_tol = x;
        }
        t
    }
}

#[derive(Debug, Args)]
pub struct ExecArgs {
    /// Run every loop on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

impl ExecArgs {
    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Candidate point, comma separated (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// Run Newton's method from z0 to locate a stationary point.
    #[arg(long)]
    pub search: bool,
    /// Geometric eps grid `hi:lo:n` for the eigencurves.
    #[arg(long)]
    pub eps_grid: Option<String>,
    /// Geometric tau grid `lo:hi:n` for the empirical verdicts.
    #[arg(long)]
    pub tau_grid: Option<String>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// gda_tt, eg_tt, ode_plain, ode_eg or ode_eg_tt.
    #[arg(long, default_value = "eg_tt")]
    pub method: String,
    /// Step size for discrete methods (default 0.5/L).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Resolvent parameter for ODE methods (default 0.5/L).
    #[arg(long)]
    pub s: Option<f64>,
    /// Integration step for ODE methods.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Ensemble size.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Half-width of the init box around its center.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Sample inits from a ball instead of a box.
    #[arg(long)]
    pub ball: bool,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Stop when |F(z)| falls below this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_conv: f64,
    #[arg(long, default_value_t = 1e8)]
    pub diverge_norm: f64,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// Center of the init region, comma separated (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Distance at which limits are merged into one equilibrium.
    #[arg(long, default_value_t = 1e-4)]
    pub tol_cluster: f64,
    /// Keep every k-th iterate in the trajectory CSVs.
    #[arg(long, default_value_t = 100)]
    pub record_every: usize,
    /// Skip the per-trajectory CSVs.
    #[arg(long)]
    pub no_trajectories: bool,
}

#[derive(Debug, Args)]
pub struct AvoidanceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// Target stationary point, comma separated (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Locate the target with Newton's method from --target.
    #[arg(long)]
    pub search: bool,
    /// Distance counted as convergence to the target.
    #[arg(long, default_value_t = 1e-4)]
    pub tol_target: f64,
    /// Geometric tau grid used to choose tau when --tau is absent.
    #[arg(long)]
    pub tau_grid: Option<String>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Point whose Hessian is swept (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// Geometric eps grid `hi:lo:n`.
    #[arg(long)]
    pub eps_grid: Option<String>,
    /// Geometric tau grid `lo:hi:n` for the verdict rows.
    #[arg(long)]
    pub tau_grid: Option<String>,
    /// Resolvent parameter for continuous EG (default 0.5/L).
    #[arg(long)]
    pub s: Option<f64>,
    /// Step size for discrete EG and GDA (default 0.5/L).
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Parses `lo:hi:n` into a geometric grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("grid must look like lo:hi:n, got `{text}`");
    };
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad grid start `{lo}`"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad grid end `{hi}`"))?;
    let n: usize = n.trim().parse().with_context(|| format!("bad grid size `{n}`"))?;
    if n > 0 && !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
        bail!("grid endpoints must be positive and finite");
    }
    Ok(geometric_grid(lo, hi, n))
}

pub fn eps_grid(arg: &Option<String>) -> Result<Vec<f64>> {
    arg.as_deref().map_or_else(|| Ok(default_eps_grid()), parse_grid)
}

pub fn tau_grid(arg: &Option<String>) -> Result<Vec<f64>> {
    arg.as_deref().map_or_else(|| Ok(default_tau_grid()), parse_grid)
}

pub fn curve_config(eps: Vec<f64>, tol: &TolArgs, exec: Execution) -> CurveConfig {
    CurveConfig { eps_grid: eps, tol: tol.tolerances(), exec, ..CurveConfig::default() }
}

/// Parses a comma-separated point, defaulting to the origin.
pub fn parse_point(text: &Option<String>, dim: usize) -> Result<DVector<f64>> {
    let Some(text) = text else {
        return Ok(DVector::zeros(dim));
    };
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad coordinate `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != dim {
        bail!("point has {} coordinates, the problem has dimension {dim}", values.len());
    }
    Ok(DVector::from_vec(values))
}
