use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use minimax_core::dynamics::{find_stationary, FieldKind, Method, MethodParams, RunOptions};
use minimax_core::ensemble::{self, AvoidanceConfig, AvoidanceSummary, EnsembleConfig, EnsembleSummary, InitRegion, Member};
use minimax_core::exec::map_slice;
use minimax_core::problems::ProblemFile;
use minimax_core::spectral::{eigencurves, track_curves};
use minimax_core::stability::{
    characterize_equilibrium, infinity_eg_verdict, stability, CharacterizeConfig, EquilibriumReport, Scheme,
    DEFAULT_K_TAIL,
};
use minimax_core::MinimaxProblem;
use nalgebra::DVector;
use serde::Serialize;

use crate::args::{
    curve_config, eps_grid, parse_point, tau_grid, AvoidanceArgs, ClassifyArgs, DynamicsArgs, SimulateArgs,
    SweepArgs,
};
use crate::Mismatch;

const NEWTON_MAX_ITERS: usize = 100;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn locate(problem: &MinimaxProblem, z: DVector<f64>, search: bool, tol: f64) -> Result<DVector<f64>> {
    if search {
        Ok(find_stationary(problem, &z, tol / 10.0, NEWTON_MAX_ITERS)?)
    } else {
        Ok(z)
    }
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    problem: &'a str,
    #[serde(flatten)]
    report: &'a EquilibriumReport,
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    let (problem, _) = args.problem.load()?;
    let z0 = parse_point(&args.z0, problem.dim())?;
    let z = locate(&problem, z0, args.search, args.tol.tol_stationary)?;
    let config = CharacterizeConfig {
        curves: curve_config(eps_grid(&args.eps_grid)?, &args.tol, args.exec.exec()),
        tau_grid: tau_grid(&args.tau_grid)?,
        stationary_tol: args.tol.tol_stationary,
        ..CharacterizeConfig::default()
    };
    let report = characterize_equilibrium(&problem, &z, &config)?;

    ensure_dir(&args.out)?;
    write_json(&args.out.join("report.json"), &ClassifyOutput { problem: problem.name(), report: &report })?;
    if let Some(spec) = problem.as_quadratic() {
        ProblemFile::from_quadratic(spec).save(args.out.join("problem.json"))?;
    }

    println!("problem: {}", problem.name());
    println!(
        "B_nsd: {}  Sres_psd: {}  strict_non_minimax: {}  s0: {}",
        report.second_order.b_nsd, report.second_order.sres_psd, report.strict_non_minimax, report.s0
    );
    for scheme in Scheme::ALL {
        let outcomes: Vec<String> =
            report.verdict(scheme).map(|v| format!("{}/L:{:?}", v.step_fraction, v.stable)).collect();
        println!("{}: {}", scheme.as_str(), outcomes.join(" "));
    }
    println!("wrote {}", args.out.join("report.json").display());
    if !report.mismatches.is_empty() {
        return Err(Mismatch(report.mismatches.clone()).into());
    }
    Ok(())
}

fn method_params(d: &DynamicsArgs, problem: &MinimaxProblem, tau: f64) -> Result<MethodParams> {
    let l = problem.lipschitz();
    let eta = d.eta.unwrap_or(0.5 / l);
    let s = d.s.unwrap_or(0.5 / l);
    let params = match Method::parse(&d.method)? {
        Method::GdaTt => MethodParams::gda(eta, tau),
        Method::EgTt => MethodParams::eg(eta, tau),
        Method::OdePlain => MethodParams::ode(FieldKind::Plain, s, tau, d.dt),
        Method::OdeEg => MethodParams::ode(FieldKind::Eg, s, tau, d.dt),
        Method::OdeEgTt => MethodParams::ode(FieldKind::EgTt, s, tau, d.dt),
    };
    params.validate(l)?;
    Ok(params)
}

fn region(d: &DynamicsArgs, center: DVector<f64>) -> InitRegion {
    let center = center.iter().copied().collect();
    if d.ball {
        InitRegion::Ball { center, radius: d.radius }
    } else {
        InitRegion::Box { center, radius: d.radius }
    }
}

fn ensemble_config(d: &DynamicsArgs, params: MethodParams, region: InitRegion) -> EnsembleConfig {
    let mut config = EnsembleConfig::new(params, region, d.n, d.seed);
    config.run = RunOptions {
        tol_conv: d.tol_conv,
        max_iters: d.max_iters,
        diverge_norm: d.diverge_norm,
        ..RunOptions::default()
    };
    config.exec = d.exec.exec();
    config
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    problem: &'a str,
    region: &'a InitRegion,
    summary: &'a EnsembleSummary,
    members: &'a [Member],
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let d = &args.dynamics;
    let (problem, _) = args.problem.load()?;
    let params = method_params(d, &problem, d.tau.unwrap_or(1.0))?;
    let region = region(d, parse_point(&args.center, problem.dim())?);
    let mut config = ensemble_config(d, params, region.clone());
    config.tol_cluster = args.tol_cluster;
    config.run.record_every = args.record_every.max(1);
    config.keep_trajectories = !args.no_trajectories;
    let result = ensemble::simulate(&problem, &config)?;

    ensure_dir(&d.out)?;
    if config.keep_trajectories {
        let dir = d.out.join("trajectories");
        ensure_dir(&dir)?;
        for m in &result.members {
            if let Some(traj) = &m.trajectory {
                let mut w = create(&dir.join(format!("traj_{:05}.csv", m.index)))?;
                traj.write_csv(&mut w)?;
                w.flush()?;
            }
        }
    }
    let summary_path = d.out.join("summary.json");
    write_json(
        &summary_path,
        &SimulateOutput { problem: problem.name(), region: &region, summary: &result.summary, members: &result.members },
    )?;

    let s = &result.summary;
    println!(
        "n = {}: converged {:.4}, diverged {:.4}, max_iters {:.4}, {} equilibria",
        s.n,
        s.converged_fraction,
        s.diverged_fraction,
        s.max_iters_fraction,
        s.clusters.len()
    );
    println!("wrote {}", summary_path.display());
    Ok(())
}

#[derive(Serialize)]
struct AvoidanceOutput<'a> {
    problem: &'a str,
    tau_source: &'a str,
    #[serde(flatten)]
    summary: &'a AvoidanceSummary,
    clusters: &'a [ensemble::Cluster],
}

pub fn avoidance(args: &AvoidanceArgs) -> Result<()> {
    let d = &args.dynamics;
    let (problem, _) = args.problem.load()?;
    let target = locate(&problem, parse_point(&args.target, problem.dim())?, args.search, args.tol.tol_stationary)?;

    let (tau, tau_source) = match d.tau {
        Some(tau) => (tau, "argument"),
        None => {
            let scheme = match Method::parse(&d.method)? {
                Method::EgTt => Scheme::EgTtDiscrete,
                Method::GdaTt => Scheme::GdaTt,
                other => bail!("avoidance experiments need gda_tt or eg_tt, got {other:?}"),
            };
            let eta = d.eta.unwrap_or(0.5 / problem.lipschitz());
            let grid = tau_grid(&args.tau_grid)?;
            let blocks = problem.hessian_blocks(&target)?;
            let verdict = infinity_eg_verdict(
                &blocks,
                scheme,
                eta,
                &grid,
                DEFAULT_K_TAIL,
                args.tol.tolerances().marginal_tol,
                d.exec.exec(),
            )?;
            match verdict.tau_star {
                Some(t) => (t, "tau_star"),
                None => (*grid.last().context("empty tau grid")?, "grid_end"),
            }
        }
    };
    let params = method_params(d, &problem, tau)?;
    let ensemble = ensemble_config(d, params, region(d, target.clone()));
    let mut config = AvoidanceConfig::new(ensemble);
    config.target_tol = args.tol_target;
    config.stationary_tol = args.tol.tol_stationary;
    config.curves = curve_config(eps_grid(&None)?, &args.tol, d.exec.exec());

    let (summary, result) = ensemble::avoidance(&problem, &target, &config)?;
    ensure_dir(&d.out)?;
    let path = d.out.join("avoidance.json");
    write_json(
        &path,
        &AvoidanceOutput { problem: problem.name(), tau_source, summary: &summary, clusters: &result.summary.clusters },
    )?;
    println!(
        "{:?}: {}/{} converged to the target (fraction {:.4}, threshold {:.4}), tau = {tau}",
        summary.mode, summary.hits, summary.n, summary.fraction, summary.threshold
    );
    println!("wrote {}", path.display());
    if !summary.passed {
        return Err(Mismatch(vec![format!(
            "{} of {} starts converged to a point the method should avoid",
            summary.hits, summary.n
        )])
        .into());
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let (problem, _) = args.problem.load()?;
    let z = parse_point(&args.z0, problem.dim())?;
    let blocks = problem.hessian_blocks(&z)?;
    let l = problem.lipschitz();
    let exec = args.exec.exec();
    let eps = eps_grid(&args.eps_grid)?;
    let taus = tau_grid(&args.tau_grid)?;
    ensure_dir(&args.out)?;

    let curves_path = args.out.join("eigencurves.csv");
    let mut w = create(&curves_path)?;
    writeln!(w, "eps,j,re,im,label,abs_over_sqrt_eps,re_over_eps")?;
    let (lambda, labels): (Vec<Vec<_>>, Vec<&str>) = if eps.len() >= 3 {
        let curves = eigencurves(&blocks, &curve_config(eps.clone(), &args.tol, exec))?;
        let labels = curves.labels.iter().map(|l| l.as_str()).collect();
        (curves.lambda, labels)
    } else if eps.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let lambda = track_curves(&blocks, &eps, exec)?;
        let labels = vec!["unclassified"; lambda.len()];
        (lambda, labels)
    };
    for (k, &e) in eps.iter().enumerate() {
        for (j, curve) in lambda.iter().enumerate() {
            let z = curve[k];
            writeln!(w, "{e},{j},{},{},{},{},{}", z.re, z.im, labels[j], z.norm() / e.sqrt(), z.re / e)?;
        }
    }
    w.flush()?;

    let s = args.s.unwrap_or(0.5 / l);
    let eta = args.eta.unwrap_or(0.5 / l);
    let marginal = args.tol.tolerances().marginal_tol;
    let jobs: Vec<(f64, Scheme, f64)> = taus
        .iter()
        .flat_map(|&tau| {
            Scheme::ALL.into_iter().map(move |scheme| {
                (tau, scheme, if scheme == Scheme::EgTtContinuous { s } else { eta })
            })
        })
        .collect();
    let verdicts = map_slice(exec, &jobs, |&(tau, scheme, param)| stability(scheme, &blocks, param, tau, marginal))
        .into_iter()
        .collect::<minimax_core::Result<Vec<_>>>()?;

    let verdict_path = args.out.join("verdicts.csv");
    let mut w = create(&verdict_path)?;
    writeln!(w, "tau,method,param,stable,jacobian_side,region_side,jacobian_margin,region_margin,jacobian_extreme")?;
    for v in &verdicts {
        // Spectral abscissa for the flow, spectral radius for the maps.
        let extreme = match v.method {
            Scheme::EgTtContinuous => v.witness.iter().map(|w| w.image.re).fold(f64::NEG_INFINITY, f64::max),
            _ => v.spectral_radius(),
        };
        writeln!(
            w,
            "{},{},{},{:?},{:?},{:?},{},{},{}",
            v.tau,
            v.method.as_str(),
            v.param,
            v.stable,
            v.jacobian_side,
            v.region_side,
            v.jacobian_margin,
            v.region_margin,
            extreme
        )?;
    }
    w.flush()?;
    println!("wrote {} and {}", curves_path.display(), verdict_path.display());
    Ok(())
}
