//! Discrete steppers (τ-GDA, τ-EG), the resolvent ODE fields, a fixed-step
//! RK4 integrator, trajectory drivers and a Newton stationary-point finder.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::MinimaxProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GdaTt,
    EgTt,
    OdePlain,
    OdeEg,
    OdeEgTt,
}

impl Method {
    pub fn is_discrete(self) -> bool {
        matches!(self, Method::GdaTt | Method::EgTt)
    }

    pub fn field_kind(self) -> Option<FieldKind> {
        match self {
            Method::OdePlain => Some(FieldKind::Plain),
            Method::OdeEg => Some(FieldKind::Eg),
            Method::OdeEgTt => Some(FieldKind::EgTt),
            _ => None,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gda_tt" => Ok(Method::GdaTt),
            "eg_tt" => Ok(Method::EgTt),
            "ode_plain" => Ok(Method::OdePlain),
            "ode_eg" => Ok(Method::OdeEg),
            "ode_eg_tt" => Ok(Method::OdeEgTt),
            other => Err(Error::InvalidParams(format!("unknown method `{other}`"))),
        }
    }
}

/// Vector fields: `−F`, `−(I + sDF)⁻¹F` and `−(I + sΛ_τDF)⁻¹Λ_τF`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Plain,
    Eg,
    EgTt,
}

/// Step sizes and timescale. Discrete methods read `eta` and `tau`; ODE
/// methods read `s`, `tau` and `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    pub method: Method,
    pub eta: f64,
    pub s: f64,
    pub tau: f64,
    pub dt: f64,
}

/// `(√5 − 1)/2`; below `η < φ/L` the EG map is a local diffeomorphism.
pub const EG_DIFFEO_FACTOR: f64 = 0.618_033_988_749_894_9;

impl MethodParams {
    pub fn gda(eta: f64, tau: f64) -> Self {
        Self { method: Method::GdaTt, eta, s: eta / 2.0, tau, dt: eta }
    }

    pub fn eg(eta: f64, tau: f64) -> Self {
        Self { method: Method::EgTt, eta, s: eta / 2.0, tau, dt: eta }
    }

    pub fn ode(kind: FieldKind, s: f64, tau: f64, dt: f64) -> Self {
        let method = match kind {
            FieldKind::Plain => Method::OdePlain,
            FieldKind::Eg => Method::OdeEg,
            FieldKind::EgTt => Method::OdeEgTt,
        };
        Self { method, eta: 2.0 * s, s, tau, dt }
    }

    /// Checks the step-size hypotheses for a problem with Lipschitz bound `l`.
    pub fn validate(&self, l: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.tau.is_finite() && self.tau >= 1.0) {
            return bad(format!("tau must be a finite real >= 1, got {}", self.tau));
        }
        match self.method {
            Method::GdaTt | Method::EgTt => {
                if !(self.eta > 0.0 && self.eta * l < 1.0) {
                    return bad(format!("need 0 < eta < 1/L = {:.6}, got {}", 1.0 / l, self.eta));
                }
            }
            Method::OdePlain | Method::OdeEg | Method::OdeEgTt => {
                if !(self.dt.is_finite() && self.dt > 0.0) {
                    return bad(format!("dt must be positive, got {}", self.dt));
                }
                if self.method != Method::OdePlain && !(self.s > 0.0 && self.s * l < 1.0) {
                    return bad(format!("need 0 < s < 1/L = {:.6}, got {}", 1.0 / l, self.s));
                }
            }
        }
        Ok(())
    }

    /// The stricter EG bound under which the update is a diffeomorphism.
    pub fn validate_diffeomorphic(&self, l: f64) -> Result<()> {
        self.validate(l)?;
        if self.method == Method::EgTt && self.eta * l >= EG_DIFFEO_FACTOR {
            return Err(Error::InvalidParams(format!(
                "avoidance needs eta < (sqrt5-1)/(2L) = {:.6}, got {}",
                EG_DIFFEO_FACTOR / l,
                self.eta
            )));
        }
        Ok(())
    }

    /// Time elapsed per step.
    pub fn time_step(&self) -> f64 {
        if self.method.is_discrete() {
            self.eta
        } else {
            self.dt
        }
    }
}

/// `Λ_τ v`: scales the first `d1` entries by `1/τ`.
pub fn apply_lambda(v: &DVector<f64>, d1: usize, tau: f64) -> DVector<f64> {
    let mut out = v.clone();
    out.rows_mut(0, d1).scale_mut(1.0 / tau);
    out
}

/// `Λ_τ M`: scales the first `d1` rows by `1/τ`.
pub fn apply_lambda_rows(m: &DMatrix<f64>, d1: usize, tau: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    out.rows_mut(0, d1).scale_mut(1.0 / tau);
    out
}

/// `z − ηΛ_τF(z)`.
pub fn step_gda_tt(
    problem: &MinimaxProblem,
    z: &DVector<f64>,
    eta: f64,
    tau: f64,
) -> Result<DVector<f64>> {
    let f = problem.saddle_gradient(z)?;
    Ok(z - apply_lambda(&f, problem.d1(), tau) * eta)
}

/// `z − ηΛ_τF(z − ηΛ_τF(z))`.
pub fn step_eg_tt(
    problem: &MinimaxProblem,
    z: &DVector<f64>,
    eta: f64,
    tau: f64,
) -> Result<DVector<f64>> {
    let mid = step_gda_tt(problem, z, eta, tau)?;
    let f_mid = problem.saddle_gradient(&mid)?;
    Ok(z - apply_lambda(&f_mid, problem.d1(), tau) * eta)
}

pub fn ode_field(
    problem: &MinimaxProblem,
    kind: FieldKind,
    z: &DVector<f64>,
    s: f64,
    tau: f64,
) -> Result<DVector<f64>> {
    let f = problem.saddle_gradient(z)?;
    match kind {
        FieldKind::Plain => Ok(-f),
        FieldKind::Eg => {
            let n = problem.dim();
            let m = DMatrix::identity(n, n) + problem.jacobian(z)? * s;
            Ok(-linalg::solve_checked(&m, &f)?)
        }
        FieldKind::EgTt => {
            let n = problem.dim();
            let d1 = problem.d1();
            let m = DMatrix::identity(n, n) + apply_lambda_rows(&problem.jacobian(z)?, d1, tau) * s;
            Ok(-linalg::solve_checked(&m, &apply_lambda(&f, d1, tau))?)
        }
    }
}

/// One classical RK4 step of size `dt`.
pub fn rk4_step(
    problem: &MinimaxProblem,
    kind: FieldKind,
    z: &DVector<f64>,
    s: f64,
    tau: f64,
    dt: f64,
) -> Result<DVector<f64>> {
    let field = |p: &DVector<f64>| ode_field(problem, kind, p, s, tau);
    let k1 = field(z)?;
    let k2 = field(&(z + &k1 * (dt / 2.0)))?;
    let k3 = field(&(z + &k2 * (dt / 2.0)))?;
    let k4 = field(&(z + &k3 * dt))?;
    Ok(z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Advances one step of whichever method `params` names.
pub fn advance(
    problem: &MinimaxProblem,
    params: &MethodParams,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    match params.method {
        Method::GdaTt => step_gda_tt(problem, z, params.eta, params.tau),
        Method::EgTt => step_eg_tt(problem, z, params.eta, params.tau),
        m => {
            let kind = m.field_kind().expect("continuous method");
            rk4_step(problem, kind, z, params.s, params.tau, params.dt)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub tol_conv: f64,
    pub max_iters: usize,
    pub diverge_norm: f64,
    /// Keep every `record_every`-th iterate (the final one is always kept).
    pub record_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tol_conv: 1e-10, max_iters: 100_000, diverge_norm: 1e8, record_every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Converged { point: Vec<f64>, residual: f64 },
    MaxIters,
    Diverged { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub z: Vec<f64>,
    pub f_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Sample>,
    pub termination: Termination,
    pub params: MethodParams,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.points.last().expect("a trajectory always holds z0")
    }

    pub fn final_point(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.last().z)
    }

    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Converged { .. })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.points.first().map_or(0, |p| p.z.len());
        let mut header = vec!["step".to_string(), "t".to_string()];
        header.extend((0..d).map(|i| format!("z_{i}")));
        header.push("F_norm".into());
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            write!(out, "{},{}", p.step, p.t)?;
            for x in &p.z {
                write!(out, ",{x}")?;
            }
            writeln!(out, ",{}", p.f_norm)?;
        }
        Ok(())
    }

    /// Re-applies the update between consecutive recorded samples and
    /// returns the largest deviation (zero for a faithful record).
    pub fn replay_error(&self, problem: &MinimaxProblem) -> Result<f64> {
        let mut worst = 0.0_f64;
        for pair in self.points.windows(2) {
            let mut z = DVector::from_column_slice(&pair[0].z);
            for _ in pair[0].step..pair[1].step {
                z = advance(problem, &self.params, &z)?;
            }
            let target = DVector::from_column_slice(&pair[1].z);
            worst = worst.max((z - target).amax());
        }
        Ok(worst)
    }
}

fn drive(
    problem: &MinimaxProblem,
    z0: &DVector<f64>,
    params: &MethodParams,
    opts: &RunOptions,
    max_steps: usize,
) -> Result<Trajectory> {
    let record_every = opts.record_every.max(1);
    let dt = params.time_step();
    let sample = |step: usize, z: &DVector<f64>, f_norm: f64| Sample {
        step,
        t: step as f64 * dt,
        z: z.iter().copied().collect(),
        f_norm,
    };

    let mut z = z0.clone();
    let mut points = Vec::new();
    let mut step = 0;
    let termination = loop {
        let f_norm = problem.saddle_gradient(&z).map(|f| f.norm()).unwrap_or(f64::NAN);
        let norm = z.norm();
        let stop = if f_norm <= opts.tol_conv {
            Some(Termination::Converged { point: z.iter().copied().collect(), residual: f_norm })
        } else if !norm.is_finite() || norm >= opts.diverge_norm || !f_norm.is_finite() {
            Some(Termination::Diverged { threshold: opts.diverge_norm })
        } else if step >= max_steps {
            Some(Termination::MaxIters)
        } else {
            None
        };
        if let Some(t) = stop {
            points.push(sample(step, &z, f_norm));
            break t;
        }
        if step % record_every == 0 {
            points.push(sample(step, &z, f_norm));
        }
        z = advance(problem, params, &z)?;
        step += 1;
    };
    Ok(Trajectory { points, termination, params: *params })
}

/// Iterates a discrete method until convergence, divergence or `max_iters`.
pub fn run_discrete(
    problem: &MinimaxProblem,
    z0: &DVector<f64>,
    params: &MethodParams,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if !params.method.is_discrete() {
        return Err(Error::InvalidParams(format!("{:?} is not a discrete method", params.method)));
    }
    check_len(problem, z0)?;
    params.validate(problem.lipschitz())?;
    drive(problem, z0, params, opts, opts.max_iters)
}

/// Fixed-step RK4 on the method's field up to `t_end` (`opts.max_iters` is
/// ignored).
pub fn integrate(
    problem: &MinimaxProblem,
    z0: &DVector<f64>,
    params: &MethodParams,
    t_end: f64,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if params.method.is_discrete() {
        return Err(Error::InvalidParams(format!("{:?} is not an ODE method", params.method)));
    }
    check_len(problem, z0)?;
    params.validate(problem.lipschitz())?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParams(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    let steps = (t_end / params.dt + 1e-9).floor() as usize;
    drive(problem, z0, params, opts, steps)
}

fn check_len(problem: &MinimaxProblem, z: &DVector<f64>) -> Result<()> {
    if z.len() != problem.dim() {
        return Err(Error::Dimension { expected: problem.dim(), got: z.len() });
    }
    Ok(())
}

/// Newton's method on `F(z) = 0`.
pub fn find_stationary(
    problem: &MinimaxProblem,
    z0: &DVector<f64>,
    newton_tol: f64,
    newton_max: usize,
) -> Result<DVector<f64>> {
    let mut z = z0.clone();
    for _ in 0..=newton_max {
        let f = problem.saddle_gradient(&z)?;
        if f.norm() <= newton_tol {
            return Ok(z);
        }
        let h = problem.jacobian(&z)?;
        let delta = linalg::solve_checked(&h, &f).map_err(|e| match e {
            Error::SingularSolve { condition } => {
                Error::Newton(format!("singular Jacobian (condition {condition:.3e})"))
            }
            other => other,
        })?;
        z -= delta;
    }
    let residual = problem.saddle_gradient(&z)?.norm();
    Err(Error::Newton(format!(
        "no convergence in {newton_max} iterations (|F| = {residual:.3e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin_problem, QuadraticSpec};
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    fn bilinear() -> MinimaxProblem {
        builtin_problem("bilinear").unwrap()
    }

    #[test]
    fn gda_step_examples() {
        let p = bilinear();
        assert!(close(&step_gda_tt(&p, &v(&[1.0, 0.0]), 0.1, 1.0).unwrap(), &v(&[1.0, 0.1]), 1e-15));
        assert!(close(&step_gda_tt(&p, &v(&[0.0, 1.0]), 0.1, 10.0).unwrap(), &v(&[-0.01, 1.0]), 1e-15));
        assert_eq!(step_gda_tt(&p, &v(&[0.0, 0.0]), 0.1, 3.0).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn eg_step_examples() {
        let p = bilinear();
        let z1 = step_eg_tt(&p, &v(&[1.0, 0.0]), 0.5, 1.0).unwrap();
        assert!(close(&z1, &v(&[0.75, 0.5]), 1e-15));
        assert!(z1.norm() < 1.0);
        assert_eq!(step_eg_tt(&p, &v(&[0.0, 0.0]), 0.5, 7.0).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn ode_field_examples() {
        let p = bilinear();
        let plain = ode_field(&p, FieldKind::Plain, &v(&[1.0, 1.0]), 0.5, 1.0).unwrap();
        assert_eq!(plain, v(&[-1.0, 1.0]));
        let eg = ode_field(&p, FieldKind::Eg, &v(&[1.0, 0.0]), 0.5, 1.0).unwrap();
        assert!(close(&eg, &v(&[-0.4, 0.8]), 1e-14));
        let tt = ode_field(&p, FieldKind::EgTt, &v(&[1.0, 0.0]), 0.5, 1.0).unwrap();
        assert!(close(&eg, &tt, 1e-15));
        let zero = ode_field(&p, FieldKind::EgTt, &v(&[0.0, 0.0]), 0.4, 4.0).unwrap();
        assert_eq!(zero, v(&[0.0, 0.0]));
    }

    #[test]
    fn singular_field_solve_is_reported() {
        // I + sH is singular when s = 1 and H = [-1].
        let p = MinimaxProblem::quadratic(QuadraticSpec::scalar(-1.0, 0.0, 0.0));
        let err = ode_field(&p, FieldKind::Eg, &v(&[1.0, 0.0]), 1.0, 1.0);
        assert!(matches!(err, Err(Error::SingularSolve { .. })));
    }

    #[test]
    fn plain_flow_conserves_norm_on_bilinear() {
        let p = bilinear();
        let params = MethodParams::ode(FieldKind::Plain, 0.1, 1.0, 1e-3);
        let opts = RunOptions { record_every: 1000, ..RunOptions::default() };
        let traj = integrate(&p, &v(&[1.0, 0.0]), &params, 10.0, &opts).unwrap();
        assert_eq!(traj.last().step, 10_000);
        assert!((traj.last().t - 10.0).abs() < 1e-9);
        let drift = traj.points.iter().map(|s| (v(&s.z).norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-8, "drift {drift}");
    }

    #[test]
    fn timescaled_eg_flow_contracts_on_bilinear() {
        let p = bilinear();
        let params = MethodParams::ode(FieldKind::EgTt, 0.4, 4.0, 1e-2);
        let traj = integrate(&p, &v(&[1.0, 0.0]), &params, 20.0, &RunOptions::default()).unwrap();
        assert!(traj.final_point().norm() < 1.0);
    }

    #[test]
    fn zero_horizon_keeps_only_start() {
        let p = bilinear();
        let params = MethodParams::ode(FieldKind::Plain, 0.1, 1.0, 1e-2);
        let traj = integrate(&p, &v(&[1.0, 0.0]), &params, 0.0, &RunOptions::default()).unwrap();
        assert_eq!(traj.points.len(), 1);
        assert_eq!(traj.termination, Termination::MaxIters);
    }

    #[test]
    fn eg_converges_and_gda_diverges_on_bilinear() {
        let p = bilinear();
        let opts = RunOptions { tol_conv: 1e-8, ..RunOptions::default() };
        let eg = run_discrete(&p, &v(&[1.0, 1.0]), &MethodParams::eg(0.5, 10.0), &opts).unwrap();
        assert!(eg.converged());
        assert!(eg.final_point().norm() <= 1e-6);

        for tau in [1.0, 10.0, 100.0] {
            let gda = run_discrete(&p, &v(&[1.0, 1.0]), &MethodParams::gda(0.5, tau), &opts).unwrap();
            assert!(matches!(gda.termination, Termination::Diverged { .. }), "tau {tau}");
        }
    }

    #[test]
    fn stationary_start_converges_immediately() {
        let p = bilinear();
        let t = run_discrete(&p, &v(&[0.0, 0.0]), &MethodParams::eg(0.5, 1.0), &RunOptions::default())
            .unwrap();
        assert_eq!(t.points.len(), 1);
        assert!(t.converged());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = bilinear();
        let opts = RunOptions::default();
        let z = v(&[1.0, 0.0]);
        assert!(run_discrete(&p, &z, &MethodParams::eg(1.0, 1.0), &opts).is_err());
        assert!(run_discrete(&p, &z, &MethodParams::eg(0.5, 0.5), &opts).is_err());
        assert!(MethodParams::eg(0.7, 1.0).validate_diffeomorphic(1.0).is_err());
        assert!(MethodParams::eg(0.6, 1.0).validate_diffeomorphic(1.0).is_ok());
    }

    #[test]
    fn replay_reproduces_recorded_trajectory() {
        let p = builtin_problem("strict_nonminimax_demo").unwrap();
        let opts = RunOptions { max_iters: 500, record_every: 7, ..RunOptions::default() };
        let eta = 0.3 / p.lipschitz();
        let t = run_discrete(&p, &v(&[0.3, -0.2, 0.1, 0.5]), &MethodParams::eg(eta, 5.0), &opts)
            .unwrap();
        assert_eq!(t.replay_error(&p).unwrap(), 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let p = bilinear();
        let opts = RunOptions { max_iters: 3, ..RunOptions::default() };
        let t = run_discrete(&p, &v(&[1.0, 0.0]), &MethodParams::gda(0.1, 1.0), &opts).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "step,t,z_0,z_1,F_norm");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1,0.1,1,0.1,"));
    }

    #[test]
    fn newton_examples() {
        let p = bilinear();
        let z = find_stationary(&p, &v(&[0.3, -0.2]), 1e-12, 5).unwrap();
        assert!(z.amax() <= 1e-12);

        let q = MinimaxProblem::quadratic(QuadraticSpec::scalar(2.0, -1.0, 1.0));
        assert!(find_stationary(&q, &v(&[5.0, -3.0]), 1e-12, 1).unwrap().amax() < 1e-12);

        let stationary = v(&[0.0, 0.0]);
        assert_eq!(find_stationary(&q, &stationary, 1e-12, 0).unwrap(), stationary);

        let singular = MinimaxProblem::quadratic(QuadraticSpec::scalar(1.0, 0.0, 0.0));
        assert!(matches!(
            find_stationary(&singular, &v(&[1.0, 1.0]), 1e-12, 5),
            Err(Error::Newton(_))
        ));
    }

    fn one_step_error(p: &MinimaxProblem, z: &DVector<f64>, eta: f64, tau: f64) -> f64 {
        let step = step_eg_tt(p, z, eta, tau).unwrap();
        let field = ode_field(p, FieldKind::EgTt, z, eta / 2.0, tau).unwrap();
        (step - (z + field * eta)).norm()
    }

    #[test]
    fn eg_step_matches_resolvent_field_to_second_order() {
        let p = builtin_problem("strict_nonminimax_demo").unwrap();
        let z = v(&[0.4, -0.7, 1.1, 0.2]);
        let e1 = one_step_error(&p, &z, 0.02, 3.0);
        let e2 = one_step_error(&p, &z, 0.01, 3.0);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gda_and_eg_differ_at_second_order() {
        let p = builtin_problem("nondegenerate_quadratic").unwrap();
        let z = v(&[0.8, -0.5]);
        let diff = |eta: f64| {
            (step_gda_tt(&p, &z, eta, 2.0).unwrap() - step_eg_tt(&p, &z, eta, 2.0).unwrap()).norm()
        };
        let ratio = diff(0.02) / diff(0.01);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    proptest! {
        // The EG displacement is ηΛ_τF(mid) with F(mid) = (I − ηHΛ_τ)F(z) on a
        // quadratic, so |F(z)| ≤ τ|step(z) − z| / (η(1 − ηL)).
        #[test]
        fn eg_fixed_points_are_stationary(
            entries in proptest::collection::vec(-2.0f64..2.0, 6),
            z in proptest::collection::vec(-1.0f64..1.0, 3),
            log_scale in -12.0f64..0.0,
            tau in 1.0f64..50.0,
            frac in 0.05f64..0.9,
        ) {
            let a = DMatrix::from_row_slice(2, 2, &[entries[0], entries[1], entries[1], entries[2]]);
            let b = DMatrix::from_element(1, 1, entries[3]);
            let c = DMatrix::from_row_slice(2, 1, &entries[4..6]);
            let p = MinimaxProblem::quadratic(QuadraticSpec::new(a, b, c).unwrap());
            let eta = frac / p.lipschitz().max(1e-3);
            let z = DVector::from_vec(z) * 10f64.powf(log_scale);
            let moved = (step_eg_tt(&p, &z, eta, tau).unwrap() - &z).norm();
            let residual = p.saddle_gradient(&z).unwrap().norm();
            prop_assert!(residual <= 10.0 * tau * moved / eta * (1.0 + 1e-9) + 1e-300);

            let origin = DVector::zeros(3);
            prop_assert_eq!(step_eg_tt(&p, &origin, eta, tau).unwrap(), origin);
        }
    }
}
