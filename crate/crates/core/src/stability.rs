//! Region tests in the complex plane, Jacobian spectral maps and strict
//! linear stability verdicts for τ-GDA and continuous/discrete τ-EG.
//!
//! Every verdict is computed twice: once from the Jacobian of the dynamics
//! (spectrum in the open left half plane, or spectral radius below one) and
//! once from the region criterion on `spec(H_τ)` (disk `D̄_s` avoided, or
//! spectrum inside the peanut `P_η`). The two must agree; a decisive
//! disagreement is reported as [`Error::CriteriaMismatch`].
//!
//! Margins are dimensionless. Near `τ → ∞` the relevant eigenvalues shrink
//! like `√ε` or `ε`, so absolute distances to a region boundary would all
//! fall below any fixed tolerance; each margin is therefore scaled by the
//! modulus of the eigenvalue it describes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assignment::match_points;
use crate::dynamics::MethodParams;
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::linalg;
use crate::problems::{HessianBlocks, MinimaxProblem};
use crate::report::Real;
use crate::spectral::{
    self, balanced_timescaled, geometric_grid, Analysis, CurveConfig, SecondOrder,
    SpectralSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GdaTt,
    EgTtContinuous,
    EgTtDiscrete,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::EgTtContinuous, Scheme::EgTtDiscrete, Scheme::GdaTt];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::GdaTt => "gda_tt",
            Scheme::EgTtContinuous => "eg_tt_continuous",
            Scheme::EgTtDiscrete => "eg_tt_discrete",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

pub fn classify_margin(margin: f64, tol: f64) -> Stability {
    if margin > tol {
        Stability::Stable
    } else if margin < -tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// `|z + 1/(2s)| ≤ 1/(2s)`.
pub fn in_disk(z: Complex64, s: f64) -> bool {
    let c = 0.5 / s;
    (z + c).norm() <= c
}

/// `Re(1/z) ≤ −s`; undefined at `z = 0`.
pub fn in_disk_inverse(z: Complex64, s: f64) -> Option<bool> {
    (z != Complex64::new(0.0, 0.0)).then(|| z.inv().re <= -s)
}

/// `(|z + c| − c)/|z|` with `c = 1/(2s)`; positive outside the disk.
pub fn disk_margin(z: Complex64, s: f64) -> f64 {
    let n = z.norm();
    if n == 0.0 {
        return 0.0;
    }
    let c = 0.5 / s;
    ((z + c).norm() - c) / n
}

fn peanut_gap(z: Complex64, eta: f64) -> f64 {
    let (x, y) = (z.re, z.im);
    (1.0 + 3.0 * eta * eta * y * y).sqrt() - (eta * x - 0.5).powi(2) - eta * eta * y * y - 0.75
}

/// `(ηx − ½)² + η²y² + ¾ < √(1 + 3η²y²)` for `z = x + iy`.
pub fn in_peanut(z: Complex64, eta: f64) -> bool {
    peanut_gap(z, eta) > 0.0
}

/// `Re(1/(z(1 − ηz))) > η/2`; undefined at `z ∈ {0, 1/η}`.
pub fn in_peanut_inverse(z: Complex64, eta: f64) -> Option<bool> {
    let w = z * (1.0 - eta * z);
    (w != Complex64::new(0.0, 0.0)).then(|| w.inv().re > eta / 2.0)
}

/// Peanut gap scaled by `η|z|`; positive inside.
pub fn peanut_margin(z: Complex64, eta: f64) -> f64 {
    let n = z.norm();
    if n == 0.0 {
        return 0.0;
    }
    peanut_gap(z, eta) / (eta * n)
}

/// `|λ|(Re(1/λ) − η/2)`; positive iff `|1 − ηλ| < 1`.
pub fn gda_margin(lambda: Complex64, eta: f64) -> f64 {
    let n = lambda.norm();
    if n == 0.0 {
        return 0.0;
    }
    n * (lambda.inv().re - eta / 2.0)
}

/// `μ = −λ/(1 + sλ)`, mapping `spec(H_τ)` onto `spec(J_τ)` for continuous EG.
pub fn mobius_map(lambda: Complex64, s: f64) -> Result<Complex64> {
    let denom = 1.0 + s * lambda;
    if denom.norm() <= 1e-14 * (1.0 + (s * lambda).norm()) {
        return Err(Error::Precondition(format!("mobius_map pole at lambda = {lambda}")));
    }
    Ok(-lambda / denom)
}

/// `J = −(I + sH_τ)⁻¹H_τ`.
pub fn eg_jacobian_continuous(h_tau: &DMatrix<f64>, s: f64) -> Result<DMatrix<f64>> {
    let n = h_tau.nrows();
    let inv = linalg::inverse_checked(&(DMatrix::identity(n, n) + h_tau * s))?;
    Ok(-(inv * h_tau))
}

/// `ηH_τ(I − ηH_τ)`, so that the discrete EG Jacobian is `I − K`.
fn eg_discrete_defect(h_tau: &DMatrix<f64>, eta: f64) -> DMatrix<f64> {
    let n = h_tau.nrows();
    let eh = h_tau * eta;
    &eh * (DMatrix::identity(n, n) - &eh)
}

/// `J = I − ηH_τ(I − ηH_τ)` with `H_τ = Λ_τH`.
pub fn eg_jacobian_discrete(h: &DMatrix<f64>, d1: usize, eta: f64, tau: f64) -> DMatrix<f64> {
    let h_tau = spectral::timescaled_hessian(h, d1, tau);
    let n = h.nrows();
    DMatrix::identity(n, n) - eg_discrete_defect(&h_tau, eta)
}

/// `I − ηH_τ`.
pub fn gda_jacobian(h: &DMatrix<f64>, d1: usize, eta: f64, tau: f64) -> DMatrix<f64> {
    let h_tau = spectral::timescaled_hessian(h, d1, tau);
    let n = h.nrows();
    DMatrix::identity(n, n) - h_tau * eta
}

/// One eigenvalue of `H_τ`, its image in the Jacobian spectrum, and both
/// margins (positive means the criterion is satisfied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenWitness {
    pub lambda: Complex64,
    pub image: Complex64,
    pub region_margin: f64,
    pub jacobian_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub method: Scheme,
    /// `s` for continuous EG, `η` otherwise.
    pub param: f64,
    pub tau: f64,
    pub stable: Stability,
    pub jacobian_side: Stability,
    pub region_side: Stability,
    pub jacobian_margin: f64,
    pub region_margin: f64,
    pub witness: Vec<EigenWitness>,
}

impl StabilityVerdict {
    pub fn spectral_radius(&self) -> f64 {
        self.witness.iter().map(|w| w.image.norm()).fold(0.0, f64::max)
    }
}

fn min_margin(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(f64::INFINITY, f64::min)
}

/// Evaluates both stability criteria for `scheme` on a matrix similar to
/// `H_τ`.
pub fn stability_from_matrix(
    scheme: Scheme,
    h_tau: &DMatrix<f64>,
    param: f64,
    tau: f64,
    marginal_tol: f64,
) -> Result<StabilityVerdict> {
    if !(param > 0.0 && param.is_finite()) {
        return Err(Error::InvalidParams(format!("step size must be positive, got {param}")));
    }
    let lambdas = linalg::eigenvalues(h_tau)?;
    // Jacobian-side spectrum, computed from the Jacobian matrix itself.
    let (images, predicted): (Vec<Complex64>, Vec<Complex64>) = match scheme {
        Scheme::EgTtContinuous => {
            let j = eg_jacobian_continuous(h_tau, param)?;
            let predicted = lambdas.iter().map(|&l| mobius_map(l, param)).collect::<Result<_>>()?;
            (linalg::eigenvalues(&j)?, predicted)
        }
        Scheme::EgTtDiscrete => {
            // Eigenvalues of K = I − J keep full relative accuracy near ν = 1.
            let k = eg_discrete_defect(h_tau, param);
            let predicted = lambdas.iter().map(|&l| param * l * (1.0 - param * l)).collect();
            (linalg::eigenvalues(&k)?, predicted)
        }
        Scheme::GdaTt => {
            let k = h_tau * param;
            let predicted = lambdas.iter().map(|&l| param * l).collect();
            (linalg::eigenvalues(&k)?, predicted)
        }
    };
    let perm = match_points(&predicted, &images);

    let witness: Vec<EigenWitness> = lambdas
        .iter()
        .zip(&perm)
        .map(|(&lambda, &idx)| {
            let image = images[idx];
            let (region_margin, jacobian_margin, image) = match scheme {
                Scheme::EgTtContinuous => {
                    let jm = if image.norm() == 0.0 { 0.0 } else { -image.re / image.norm() };
                    (disk_margin(lambda, param), jm, image)
                }
                Scheme::EgTtDiscrete => (peanut_margin(lambda, param), defect_margin(image), 1.0 - image),
                Scheme::GdaTt => (gda_margin(lambda, param), defect_margin(image), 1.0 - image),
            };
            EigenWitness { lambda, image, region_margin, jacobian_margin }
        })
        .collect();

    let region_margin = min_margin(witness.iter().map(|w| w.region_margin));
    let jacobian_margin = min_margin(witness.iter().map(|w| w.jacobian_margin));
    let region_side = classify_margin(region_margin, marginal_tol);
    let jacobian_side = classify_margin(jacobian_margin, marginal_tol);
    let stable = match (jacobian_side, region_side) {
        (a, b) if a == b => a,
        (Stability::Marginal, _) | (_, Stability::Marginal) => Stability::Marginal,
        (a, b) => {
            return Err(Error::CriteriaMismatch(format!(
                "{} at param {param}, tau {tau}: Jacobian side {a:?} (margin {jacobian_margin:.3e}) \
                 vs region side {b:?} (margin {region_margin:.3e})",
                scheme.as_str()
            )))
        }
    };
    Ok(StabilityVerdict {
        method: scheme,
        param,
        tau,
        stable,
        jacobian_side,
        region_side,
        jacobian_margin,
        region_margin,
        witness,
    })
}

/// `(1 − |1 − κ|)/|κ|` for `ν = 1 − κ`: positive iff `|ν| < 1`.
fn defect_margin(kappa: Complex64) -> f64 {
    let n = kappa.norm();
    if n == 0.0 {
        return 0.0;
    }
    // 1 − |1 − κ| = (2 Re κ − |κ|²)/(1 + |1 − κ|), free of cancellation.
    (2.0 * kappa.re - kappa.norm_sqr()) / (1.0 + (1.0 - kappa).norm()) / n
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 1.0) {
        return Err(Error::InvalidParams(format!("tau must be finite and >= 1, got {tau}")));
    }
    Ok(())
}

/// Continuous τ-EG: `spec(J_τ) ⊂ C₋°` against `spec(H_τ) ∩ D̄_s = ∅`.
pub fn stability_continuous(
    blocks: &HessianBlocks,
    s: f64,
    tau: f64,
    marginal_tol: f64,
) -> Result<StabilityVerdict> {
    check_tau(tau)?;
    stability_from_matrix(Scheme::EgTtContinuous, &balanced_timescaled(blocks, 1.0 / tau), s, tau, marginal_tol)
}

/// Discrete τ-EG: `ρ(J_τ) < 1` against `spec(H_τ) ⊂ P_η`.
pub fn stability_discrete(
    blocks: &HessianBlocks,
    eta: f64,
    tau: f64,
    marginal_tol: f64,
) -> Result<StabilityVerdict> {
    check_tau(tau)?;
    stability_from_matrix(Scheme::EgTtDiscrete, &balanced_timescaled(blocks, 1.0 / tau), eta, tau, marginal_tol)
}

/// τ-GDA: `ρ(I − ηH_τ) < 1` against `Re(1/λ) > η/2` for every eigenvalue.
pub fn gda_stability(
    blocks: &HessianBlocks,
    eta: f64,
    tau: f64,
    marginal_tol: f64,
) -> Result<StabilityVerdict> {
    check_tau(tau)?;
    stability_from_matrix(Scheme::GdaTt, &balanced_timescaled(blocks, 1.0 / tau), eta, tau, marginal_tol)
}

pub fn stability(
    scheme: Scheme,
    blocks: &HessianBlocks,
    param: f64,
    tau: f64,
    marginal_tol: f64,
) -> Result<StabilityVerdict> {
    match scheme {
        Scheme::EgTtContinuous => stability_continuous(blocks, param, tau, marginal_tol),
        Scheme::EgTtDiscrete => stability_discrete(blocks, param, tau, marginal_tol),
        Scheme::GdaTt => gda_stability(blocks, param, tau, marginal_tol),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Stable,
    Unstable,
    Inconclusive,
}

/// Empirical verdict for all sufficiently large `τ`: the tail of the grid
/// must agree on `k_tail` or more consecutive points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityVerdict {
    pub method: Scheme,
    pub param: f64,
    pub outcome: Outcome,
    /// First grid point of the terminal run.
    pub tau_star: Option<f64>,
    pub tau_grid: Vec<f64>,
    pub per_tau: Vec<Stability>,
}

/// Geometric, 33 points from 1 to 1e8.
pub fn default_tau_grid() -> Vec<f64> {
    geometric_grid(1.0, 1e8, 33)
}

pub const DEFAULT_K_TAIL: usize = 5;

pub fn infinity_eg_verdict(
    blocks: &HessianBlocks,
    scheme: Scheme,
    param: f64,
    tau_grid: &[f64],
    k_tail: usize,
    marginal_tol: f64,
    exec: Execution,
) -> Result<InfinityVerdict> {
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("tau grid must be strictly increasing".into()));
    }
    let per_tau: Vec<Stability> = map_slice(exec, tau_grid, |&tau| {
        stability(scheme, blocks, param, tau, marginal_tol).map(|v| v.stable)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let (outcome, tau_star) = match per_tau.last() {
        Some(&last) if last != Stability::Marginal => {
            let run = per_tau.iter().rev().take_while(|&&v| v == last).count();
            if run >= k_tail.max(1) {
                let outcome = if last == Stability::Stable { Outcome::Stable } else { Outcome::Unstable };
                (outcome, Some(tau_grid[tau_grid.len() - run]))
            } else {
                (Outcome::Inconclusive, None)
            }
        }
        _ => (Outcome::Inconclusive, None),
    };
    Ok(InfinityVerdict { method: scheme, param, outcome, tau_star, tau_grid: tau_grid.to_vec(), per_tau })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Stable,
    Unstable,
    Undetermined,
}

/// Large-`τ` prediction from second-order data: the `Θ(1)` and `Θ(ε)`
/// eigenvalues need `B ⪯ 0` and `S_res ⪰ 0`, and each square-root curve
/// needs `ι_j > −s` (continuous), `ι_j > −η/2` (discrete EG) or
/// `ι_j > η/2` (GDA).
pub fn predict(
    second_order: &SecondOrder,
    iotas: &[f64],
    scheme: Scheme,
    param: f64,
    iota_tol: f64,
) -> Prediction {
    let b_max = second_order.lambda_max_b.0;
    let s_min = second_order.lambda_min_sres.0;
    if !second_order.b_nsd || !second_order.sres_psd {
        return Prediction::Unstable;
    }
    if second_order.b_marginal && b_max > 0.0 || second_order.sres_marginal && s_min < 0.0 {
        return Prediction::Undetermined;
    }
    let shift = match scheme {
        Scheme::EgTtContinuous => param,
        Scheme::EgTtDiscrete => param / 2.0,
        Scheme::GdaTt => -param / 2.0,
    };
    let worst = iotas.iter().map(|i| i + shift).fold(f64::INFINITY, f64::min);
    if worst > iota_tol {
        Prediction::Stable
    } else if worst < -iota_tol {
        Prediction::Unstable
    } else {
        Prediction::Undetermined
    }
}

#[derive(Debug, Clone)]
pub struct CharacterizeConfig {
    pub curves: CurveConfig,
    pub tau_grid: Vec<f64>,
    pub k_tail: usize,
    /// Step sizes tested, as fractions of `1/L`.
    pub step_fractions: Vec<f64>,
    pub stationary_tol: f64,
    /// Band around zero within which `ι_j + shift` counts as undetermined.
    pub iota_tol: f64,
}

impl Default for CharacterizeConfig {
    fn default() -> Self {
        Self {
            curves: CurveConfig::default(),
            tau_grid: default_tau_grid(),
            k_tail: DEFAULT_K_TAIL,
            step_fractions: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            stationary_tol: 1e-8,
            iota_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedCriterion {
    /// `u_jᵀSu_j` for the left singular vectors of `C₂`.
    pub u_s_u: Vec<f64>,
    pub all_nonnegative: bool,
    /// `S_res ⪰ 0`, `B ⪯ 0` and every `u_jᵀSu_j ≥ 0`: stable for every
    /// step size below `1/L`.
    pub stable_for_all_steps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    /// `S_res ⪰ 0`, `B ⪯ 0` and `s₀ < 1/L`: stable for `s` in some `(s*, 1/L)`.
    pub continuous_interval: bool,
    /// `S_res ⪰ 0`, `B ⪯ 0` and `s₀ < 1/(2L)`: stable for `η` in some `(η*, 1/L)`.
    pub discrete_interval: bool,
    /// `S ⪰ 0` and `B ⪯ 0`: stable for every step size.
    pub sufficient_condition: bool,
    /// Only present when the singular values of `C₂` are distinct.
    pub refined: Option<RefinedCriterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub method: Scheme,
    pub param: f64,
    pub step_fraction: f64,
    pub tau_star: Option<f64>,
    pub stable: Outcome,
    pub predicted: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub point: Vec<f64>,
    #[serde(rename = "F_norm")]
    pub f_norm: f64,
    pub lipschitz: f64,
    pub second_order: SecondOrder,
    pub strict_non_minimax: bool,
    pub s0: Real,
    pub sigma: Vec<f64>,
    pub iota: Vec<Real>,
    pub spectral: SpectralSummary,
    pub predictions: Predictions,
    pub verdicts: Vec<VerdictEntry>,
    /// Smallest tested `s` (resp. `η`) with an empirically stable verdict.
    pub s_star_empirical: Option<f64>,
    pub eta_star_empirical: Option<f64>,
    pub tau_grid: Vec<f64>,
    pub k_tail: usize,
    pub mismatches: Vec<String>,
    pub notes: Vec<String>,
}

impl EquilibriumReport {
    pub fn verdict(&self, method: Scheme) -> impl Iterator<Item = &VerdictEntry> {
        self.verdicts.iter().filter(move |v| v.method == method)
    }

    /// Whether every tested step size of `method` was observed stable.
    pub fn all_stable(&self, method: Scheme) -> bool {
        self.verdict(method).all(|v| v.stable == Outcome::Stable)
    }

    pub fn all_unstable(&self, method: Scheme) -> bool {
        self.verdict(method).all(|v| v.stable == Outcome::Unstable)
    }

    /// Largest τ* among the empirically decided verdicts of `method` at `param`.
    pub fn tau_star(&self, method: Scheme, param: f64) -> Option<f64> {
        self.verdict(method).find(|v| v.param == param).and_then(|v| v.tau_star)
    }
}

/// Full second-order characterization of a stationary point: structural
/// verdicts, eigencurve data, theory predictions for each scheme and step
/// size, empirical `∞`-EG/GDA verdicts, and any disagreement between them.
pub fn characterize_equilibrium(
    problem: &MinimaxProblem,
    z_star: &nalgebra::DVector<f64>,
    config: &CharacterizeConfig,
) -> Result<EquilibriumReport> {
    let f_norm = problem.saddle_gradient(z_star)?.norm();
    if f_norm > config.stationary_tol {
        return Err(Error::NonStationary { residual: f_norm, tol: config.stationary_tol });
    }
    let blocks = problem.hessian_blocks(z_star)?;
    let (analysis, curves, summary) = spectral::classify(&blocks, &config.curves)?;
    characterize_blocks(&blocks, &analysis, &curves, summary, problem.lipschitz(), z_star, f_norm, config)
}

#[allow(clippy::too_many_arguments)]
fn characterize_blocks(
    blocks: &HessianBlocks,
    analysis: &Analysis,
    curves: &spectral::EigenCurves,
    summary: SpectralSummary,
    lipschitz: f64,
    z_star: &nalgebra::DVector<f64>,
    f_norm: f64,
    config: &CharacterizeConfig,
) -> Result<EquilibriumReport> {
    let tol = &config.curves.tol;
    let iotas = spectral::iota_values(curves);
    let s0 = curves.s0;
    let so = analysis.second_order;
    let necessary = so.b_nsd && so.sres_psd;

    let s_psd = linalg::sym_eigenvalues(&analysis.schur.s)
        .first()
        .is_none_or(|&m| m >= -tol.psd_tol(&analysis.schur.s));
    let refined = spectral::hemicurvatures_closed_form(&analysis.canon, &analysis.schur, tol.sep_tol)
        .ok()
        .map(|pairs| {
            let u_s_u: Vec<f64> = pairs.iter().map(|(sigma, iota)| 2.0 * iota * sigma * sigma).collect();
            let all_nonnegative = u_s_u.iter().all(|&x| x >= -tol.psd_abs);
            RefinedCriterion { stable_for_all_steps: necessary && all_nonnegative, all_nonnegative, u_s_u }
        });
    let predictions = Predictions {
        continuous_interval: necessary && s0 < 1.0 / lipschitz,
        discrete_interval: necessary && s0 < 0.5 / lipschitz,
        sufficient_condition: s_psd && so.b_nsd,
        refined,
    };

    let jobs: Vec<(Scheme, f64)> = Scheme::ALL
        .iter()
        .flat_map(|&scheme| config.step_fractions.iter().map(move |&f| (scheme, f)))
        .collect();
    let mut verdicts = Vec::with_capacity(jobs.len());
    for (scheme, fraction) in jobs {
        let param = fraction / lipschitz;
        let observed = infinity_eg_verdict(
            blocks,
            scheme,
            param,
            &config.tau_grid,
            config.k_tail,
            tol.marginal_tol,
            config.curves.exec,
        )?;
        verdicts.push(VerdictEntry {
            method: scheme,
            param,
            step_fraction: fraction,
            tau_star: observed.tau_star,
            stable: observed.outcome,
            predicted: predict(&so, &iotas, scheme, param, config.iota_tol),
        });
    }

    let mut mismatches = Vec::new();
    let mut notes = Vec::new();
    for v in &verdicts {
        let label = format!("{} at step {:.6} ({}/L)", v.method.as_str(), v.param, v.step_fraction);
        match (v.predicted, v.stable) {
            (Prediction::Stable, Outcome::Unstable) | (Prediction::Unstable, Outcome::Stable) => {
                mismatches.push(format!("{label}: predicted {:?}, observed {:?}", v.predicted, v.stable))
            }
            (Prediction::Undetermined, _) => notes.push(format!("{label}: prediction on the boundary")),
            (_, Outcome::Inconclusive) => notes.push(format!("{label}: empirical verdict inconclusive")),
            _ => {}
        }
        let eg = matches!(v.method, Scheme::EgTtContinuous | Scheme::EgTtDiscrete);
        if eg && predictions.sufficient_condition && v.stable == Outcome::Unstable {
            mismatches.push(format!("{label}: S and -B are PSD but observed unstable"));
        }
        if eg
            && v.stable == Outcome::Unstable
            && predictions.refined.as_ref().is_some_and(|r| r.stable_for_all_steps)
        {
            mismatches.push(format!("{label}: refined criterion holds but observed unstable"));
        }
    }

    let smallest_stable = |scheme: Scheme| {
        verdicts
            .iter()
            .filter(|v| v.method == scheme && v.stable == Outcome::Stable)
            .map(|v| v.param)
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))))
    };

    Ok(EquilibriumReport {
        point: z_star.iter().copied().collect(),
        f_norm,
        lipschitz,
        second_order: so,
        strict_non_minimax: analysis.strict_non_minimax,
        s0: Real(s0),
        sigma: summary.sigma.clone(),
        iota: summary.iota.clone(),
        spectral: summary,
        predictions,
        s_star_empirical: smallest_stable(Scheme::EgTtContinuous),
        eta_star_empirical: smallest_stable(Scheme::EgTtDiscrete),
        verdicts,
        tau_grid: config.tau_grid.clone(),
        k_tail: config.k_tail,
        mismatches,
        notes,
    })
}

/// Whether `params` (GDA) places a stationary point with the given
/// hemicurvatures in the degenerate set avoided by τ-GDA: some `ι_j < η/2`.
pub fn gda_degenerate_witness(iotas: &[f64], params: &MethodParams) -> bool {
    iotas.iter().any(|&i| i < params.eta / 2.0)
}
