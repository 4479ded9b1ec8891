//! Seeded multi-start experiments: ensembles of trajectories from random
//! initial points, clustering of their limits, and avoidance experiments
//! that count how often a trajectory ends at a given stationary point.
//!
//! Member `i` draws its initial point from a ChaCha8 stream keyed by
//! `(seed, i)`, so results do not depend on the execution strategy or on
//! the number of worker threads.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Method, MethodParams, RunOptions, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::problems::MinimaxProblem;
use crate::spectral::{self, CurveConfig};
use crate::stability;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitRegion {
    /// Uniform in `center + [−radius, radius]^d`.
    Box { center: Vec<f64>, radius: f64 },
    /// Uniform in the Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl InitRegion {
    pub fn unit_box(dim: usize) -> Self {
        InitRegion::Box { center: vec![0.0; dim], radius: 1.0 }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            InitRegion::Box { center, .. } | InitRegion::Ball { center, .. } => center,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            InitRegion::Box { radius, .. } | InitRegion::Ball { radius, .. } => *radius,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.center().len() != dim {
            return Err(Error::Dimension { expected: dim, got: self.center().len() });
        }
        let r = self.radius();
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParams(format!("init radius must be finite and >= 0, got {r}")));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let c = DVector::from_column_slice(self.center());
        let d = c.len();
        match self {
            InitRegion::Box { radius, .. } => {
                let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
                c + DVector::<f64>::from_fn(d, |_, _| u.sample(rng)) * *radius
            }
            InitRegion::Ball { radius, .. } => {
                let g: DVector<f64> = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
                let n = g.norm();
                if d == 0 || n == 0.0 {
                    return c;
                }
                let u: f64 = Uniform::new(0.0, 1.0).expect("valid bounds").sample(rng);
                c + g * (radius * u.powf(1.0 / d as f64) / n)
            }
        }
    }
}

/// RNG for ensemble member `index`.
pub fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn initial_points(region: &InitRegion, n: usize, seed: u64) -> Vec<DVector<f64>> {
    (0..n).map(|i| region.sample(&mut member_rng(seed, i))).collect()
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub n: usize,
    pub seed: u64,
    pub region: InitRegion,
    pub params: MethodParams,
    /// For ODE methods the horizon is `max_iters · dt`.
    pub run: RunOptions,
    pub tol_cluster: f64,
    pub keep_trajectories: bool,
    pub exec: Execution,
}

impl EnsembleConfig {
    pub fn new(params: MethodParams, region: InitRegion, n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            region,
            params,
            run: RunOptions::default(),
            tol_cluster: 1e-4,
            keep_trajectories: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    Converged,
    Diverged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub index: usize,
    pub z0: Vec<f64>,
    pub z_final: Vec<f64>,
    pub steps: usize,
    pub fate: Fate,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub point: Vec<f64>,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub seed: u64,
    pub params: MethodParams,
    pub converged_fraction: f64,
    pub diverged_fraction: f64,
    pub max_iters_fraction: f64,
    pub tol_cluster: f64,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub members: Vec<Member>,
    pub summary: EnsembleSummary,
}

fn run_member(problem: &MinimaxProblem, config: &EnsembleConfig, index: usize) -> Result<Member> {
    let z0 = config.region.sample(&mut member_rng(config.seed, index));
    let traj = if config.params.method.is_discrete() {
        dynamics::run_discrete(problem, &z0, &config.params, &config.run)?
    } else {
        let t_end = config.run.max_iters as f64 * config.params.dt;
        dynamics::integrate(problem, &z0, &config.params, t_end, &config.run)?
    };
    let fate = match traj.termination {
        Termination::Converged { .. } => Fate::Converged,
        Termination::Diverged { .. } => Fate::Diverged,
        Termination::MaxIters => Fate::MaxIters,
    };
    Ok(Member {
        index,
        z0: z0.iter().copied().collect(),
        z_final: traj.last().z.clone(),
        steps: traj.last().step,
        fate,
        trajectory: config.keep_trajectories.then_some(traj),
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Greedy clustering of points at distance `tol`; the input is sorted first,
/// so the result does not depend on the order of `points`.
pub fn cluster_points(points: &[Vec<f64>], tol: f64, total: usize) -> Vec<Cluster> {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| lexicographic(a, b));
    let mut clusters: Vec<(Vec<f64>, usize)> = Vec::new();
    for p in sorted {
        let near = clusters.iter_mut().find(|(c, _)| {
            c.iter().zip(p.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() <= tol
        });
        match near {
            Some((_, count)) => *count += 1,
            None => clusters.push((p.clone(), 1)),
        }
    }
    clusters.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| lexicographic(&a.0, &b.0)));
    clusters
        .into_iter()
        .map(|(point, count)| Cluster { point, count, fraction: count as f64 / total.max(1) as f64 })
        .collect()
}

pub fn simulate(problem: &MinimaxProblem, config: &EnsembleConfig) -> Result<EnsembleResult> {
    config.region.validate(problem.dim())?;
    config.params.validate(problem.lipschitz())?;
    let members: Vec<Member> = map_range(config.exec, config.n, |i| run_member(problem, config, i))
        .into_iter()
        .collect::<Result<_>>()?;

    let n = members.len();
    let frac = |fate: Fate| {
        if n == 0 {
            0.0
        } else {
            members.iter().filter(|m| m.fate == fate).count() as f64 / n as f64
        }
    };
    let limits: Vec<Vec<f64>> =
        members.iter().filter(|m| m.fate == Fate::Converged).map(|m| m.z_final.clone()).collect();
    let summary = EnsembleSummary {
        n,
        seed: config.seed,
        params: config.params,
        converged_fraction: frac(Fate::Converged),
        diverged_fraction: frac(Fate::Diverged),
        max_iters_fraction: frac(Fate::MaxIters),
        tol_cluster: config.tol_cluster,
        clusters: cluster_points(&limits, config.tol_cluster, n),
    };
    Ok(EnsembleResult { members, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvoidanceMode {
    /// Extragradient near a strict non-minimax point.
    StrictNonMinimax,
    /// GDA near a point with some hemicurvature `ι_j < η/2`.
    GdaDegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceSummary {
    pub mode: AvoidanceMode,
    pub target: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub params: MethodParams,
    pub hits: usize,
    pub fraction: f64,
    /// `1/N`: a fraction at or below this level is consistent with avoidance.
    pub threshold: f64,
    pub passed: bool,
    /// Distance cut-off for "converged to the target" and the step budget.
    pub target_tol: f64,
    pub max_iters: usize,
    pub diverged_fraction: f64,
    pub witness: String,
}

#[derive(Debug, Clone)]
pub struct AvoidanceConfig {
    pub ensemble: EnsembleConfig,
    pub target_tol: f64,
    pub stationary_tol: f64,
    pub curves: CurveConfig,
}

impl AvoidanceConfig {
    pub fn new(ensemble: EnsembleConfig) -> Self {
        Self { ensemble, target_tol: 1e-4, stationary_tol: 1e-8, curves: CurveConfig::default() }
    }
}

/// Checks that `target` belongs to the class the method is expected to
/// avoid, returning the mode and a human-readable witness.
pub fn avoidance_precondition(
    problem: &MinimaxProblem,
    target: &DVector<f64>,
    params: &MethodParams,
    config: &AvoidanceConfig,
) -> Result<(AvoidanceMode, String)> {
    let residual = problem.saddle_gradient(target)?.norm();
    if residual > config.stationary_tol {
        return Err(Error::NonStationary { residual, tol: config.stationary_tol });
    }
    let blocks = problem.hessian_blocks(target)?;
    match params.method {
        Method::EgTt => {
            params.validate_diffeomorphic(problem.lipschitz())?;
            let analysis = spectral::analyze(&blocks, &config.curves.tol);
            if !analysis.strict_non_minimax {
                return Err(Error::Precondition(format!(
                    "target is not a strict non-minimax point (lambda_max(B) = {}, lambda_min(S_res) = {})",
                    analysis.second_order.lambda_max_b, analysis.second_order.lambda_min_sres
                )));
            }
            Ok((
                AvoidanceMode::StrictNonMinimax,
                format!(
                    "strict non-minimax: lambda_max(B) = {}, lambda_min(S_res) = {}",
                    analysis.second_order.lambda_max_b, analysis.second_order.lambda_min_sres
                ),
            ))
        }
        Method::GdaTt => {
            let curves = spectral::eigencurves(&blocks, &config.curves)?;
            let iotas = spectral::iota_values(&curves);
            if !stability::gda_degenerate_witness(&iotas, params) {
                return Err(Error::Precondition(format!(
                    "no hemicurvature below eta/2 = {} (iota = {iotas:?})",
                    params.eta / 2.0
                )));
            }
            let worst = iotas.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((AvoidanceMode::GdaDegenerate, format!("min iota = {worst} < eta/2 = {}", params.eta / 2.0)))
        }
        other => Err(Error::InvalidParams(format!(
            "avoidance experiments need a discrete method, got {other:?}"
        ))),
    }
}

/// Runs the ensemble and counts members ending within `target_tol` of the
/// target.
pub fn avoidance(
    problem: &MinimaxProblem,
    target: &DVector<f64>,
    config: &AvoidanceConfig,
) -> Result<(AvoidanceSummary, EnsembleResult)> {
    let params = &config.ensemble.params;
    let (mode, witness) = avoidance_precondition(problem, target, params, config)?;
    let result = simulate(problem, &config.ensemble)?;
    let hits = result
        .members
        .iter()
        .filter(|m| {
            m.fate != Fate::Diverged
                && (DVector::from_column_slice(&m.z_final) - target).norm() <= config.target_tol
        })
        .count();
    let n = result.members.len();
    let fraction = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
    let threshold = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    let summary = AvoidanceSummary {
        mode,
        target: target.iter().copied().collect(),
        n,
        seed: config.ensemble.seed,
        params: *params,
        hits,
        fraction,
        threshold,
        passed: fraction <= threshold,
        target_tol: config.target_tol,
        max_iters: config.ensemble.run.max_iters,
        diverged_fraction: result.summary.diverged_fraction,
        witness,
    };
    Ok((summary, result))
}
