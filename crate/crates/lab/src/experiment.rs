//! Mode dispatch: solves, sweeps and checks, producing named tables.

use crate::config::{Coupling, ExperimentConfig, Mode, ReferenceSpec};
use crate::error::{LabError, Result};
use crate::table::{emit_table, trajectory_table, Cell, Table};
use rayon::prelude::*;
use std::path::Path;
use wide_core::causal::{self, assemble_sweep, distances, FitOutcome, Norm, SweepPoint};
use wide_core::diagnostics::{energetic_checks, standard_checks, DiagnosticReport, EnergeticOptions};
use wide_core::minimize::{self, brute_force_seeded, MAX_DIM};
use wide_core::{make_weights, DiscreteTrajectory, DissipationModel, MinimizeReport, WideProblem};

/// Environment variable holding the worker count for parallel sweeps.
pub const WORKERS_VAR: &str = "WIDE_WORKERS";

/// Tables produced by one experiment, in write order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Artifacts {
    pub tables: Vec<(String, Table)>,
}

impl Artifacts {
    fn add(&mut self, name: &str, table: Table) {
        self.tables.push((name.to_string(), table));
    }

    pub fn get(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Writes every table as `<dir>/<name>.csv`, one file at a time.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| LabError::Io { path: dir.to_path_buf(), source })?;
        for (name, table) in &self.tables {
            emit_table(table, &dir.join(format!("{name}.csv")))?;
        }
        Ok(())
    }
}

/// Outcome of an experiment: the artifacts, plus the failure that decides
/// the exit status, if any. Artifacts are kept on failure for inspection.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Artifacts,
    pub failure: Option<LabError>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, LabError::exit_code)
    }
}

/// Runs the configured mode.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let mut artifacts = Artifacts::default();
    let failure = match config.mode {
        Mode::Run | Mode::Pde => solve_mode(config, &mut artifacts)?,
        Mode::Check => check_mode(config, &mut artifacts)?,
        Mode::Sweep => sweep_mode(config, &mut artifacts)?,
        Mode::Oracle => oracle_mode(config, &mut artifacts)?,
    };
    Ok(Outcome { artifacts, failure })
}

fn solve(config: &ExperimentConfig) -> Result<(f64, DiscreteTrajectory, MinimizeReport)> {
    let eps = config.eps.expect("validated config carries eps");
    let w = make_weights(eps, config.problem.grid()).map_err(LabError::Problem)?;
    let (u, report) = minimize::minimize(&config.problem, &w, None).map_err(LabError::Solve)?;
    Ok((eps, u, report))
}

fn report_table(eps: f64, tau: f64, r: &MinimizeReport) -> Table {
    let mut t = Table::new(&[
        "eps",
        "tau",
        "solver",
        "objective",
        "iterations",
        "residual",
        "tolerance",
        "converged",
        "inclusion",
    ]);
    t.push(vec![
        eps.into(),
        tau.into(),
        r.solver.name().into(),
        r.objective.into(),
        r.iterations.into(),
        r.residual.into(),
        r.tolerance.into(),
        r.converged.into(),
        r.inclusion.map_or(Cell::Text(String::new()), Cell::Num),
    ]);
    t
}

fn convergence(r: &MinimizeReport) -> Option<LabError> {
    (!r.converged).then_some(LabError::NotConverged { residual: r.residual, tolerance: r.tolerance })
}

fn solve_mode(config: &ExperimentConfig, out: &mut Artifacts) -> Result<Option<LabError>> {
    let (eps, u, report) = solve(config)?;
    out.add("trajectory", trajectory_table(&u));
    out.add("report", report_table(eps, config.grid.tau(), &report));
    if let Some(spec) = &config.reference {
        let reference = spec.build(&config.problem).map_err(LabError::Solve)?;
        let target = reference.sample(config.problem.grid());
        let (sup, l2) = distances(&u, &target);
        let mut t = Table::new(&["reference", "sup_distance", "l2_distance", "space_time_distance"]);
        let space_time = config.pde.map_or(f64::NAN, |p| p.mesh.space_time_distance(&u, &target));
        t.push(vec![reference.name().into(), sup.into(), l2.into(), space_time.into()]);
        out.add("compare", t);
    }
    Ok(convergence(&report))
}

/// Diagnostics of a computed trajectory, seeded where sampling is involved.
pub fn diagnose(
    problem: &WideProblem,
    u: &DiscreteTrajectory,
    eps: f64,
    el_tol: f64,
    seed: u64,
) -> wide_core::Result<DiagnosticReport> {
    let w = make_weights(eps, problem.grid())?;
    let mut report = standard_checks(u, problem, &w, el_tol)?;
    if let DissipationModel::OneHomogeneous { .. } = problem.dissipation() {
        let opts = EnergeticOptions { seed, ..EnergeticOptions::default() };
        report.checks.extend(energetic_checks(u, problem, &opts)?.checks);
    }
    Ok(report)
}

/// Table with one row per check.
pub fn checks_table(report: &DiagnosticReport) -> Table {
    let mut t = Table::new(&["name", "value", "threshold", "pass"]);
    for c in &report.checks {
        t.push(vec![c.name.as_str().into(), c.value.into(), c.threshold.into(), c.pass.into()]);
    }
    t
}

fn check_mode(config: &ExperimentConfig, out: &mut Artifacts) -> Result<Option<LabError>> {
    let (eps, u, report) = solve(config)?;
    out.add("trajectory", trajectory_table(&u));
    out.add("report", report_table(eps, config.grid.tau(), &report));
    let checks = diagnose(&config.problem, &u, eps, config.el_tol, config.seed).map_err(LabError::Solve)?;
    out.add("checks", checks_table(&checks));
    let failed = checks.checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Ok(Some(LabError::CheckFailed { failed }));
    }
    Ok(convergence(&report))
}

/// Thread pool sized by [`WORKERS_VAR`], or rayon's default when unset.
pub fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_VAR) {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| LabError::BadValue {
            key: WORKERS_VAR.into(),
            msg: format!("`{v}` is not a positive count"),
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| LabError::BadValue { key: WORKERS_VAR.into(), msg: e.to_string() })
}

fn sweep_mode(config: &ExperimentConfig, out: &mut Artifacts) -> Result<Option<LabError>> {
    let spec = config.reference.as_ref().expect("validated config carries a reference");
    // discrete references follow the grid, which moves with eps under squared coupling
    let fixed = if !spec.is_discrete() || config.coupling == Coupling::Fixed {
        Some(spec.build(&config.problem).map_err(LabError::Solve)?)
    } else {
        None
    };
    let point = |eps: f64| -> Result<(f64, SweepPoint)> {
        let grid = config.coupling.grid(&config.grid, eps).map_err(LabError::Problem)?;
        let problem = config.problem.with_grid(grid).map_err(LabError::Problem)?;
        let reference = match &fixed {
            Some(r) => r.clone(),
            None => spec.build(&problem).map_err(LabError::Solve)?,
        };
        let p = causal::sweep_point(&problem, eps, &reference).map_err(LabError::Solve)?;
        Ok((grid.tau(), p))
    };
    let results: Vec<(f64, SweepPoint)> =
        pool()?.install(|| config.eps_list.par_iter().map(|&e| point(e)).collect::<Result<Vec<_>>>())?;

    let mut t =
        Table::new(&["eps", "tau", "sup_error", "l2_error", "objective", "iterations", "residual", "converged"]);
    for (tau, p) in &results {
        let r = &p.report;
        t.push(vec![
            p.eps.into(),
            (*tau).into(),
            p.sup_error.into(),
            p.l2_error.into(),
            r.objective.into(),
            r.iterations.into(),
            r.residual.into(),
            r.converged.into(),
        ]);
    }
    out.add("sweep", t);
    let name = fixed.as_ref().map_or_else(|| reference_label(spec), |r| r.name().to_string());
    let unconverged = results.iter().find_map(|(_, p)| convergence(&p.report));
    let points = results.into_iter().map(|(_, p)| p).collect();
    let sweep = assemble_sweep(&name, config.norm, points).map_err(LabError::Problem)?;
    let mut fit = Table::new(&["reference", "norm", "exponent", "intercept", "rms"]);
    let norm = match sweep.norm {
        Norm::Sup => "sup",
        Norm::L2 => "l2",
    };
    match sweep.fit {
        FitOutcome::Exact => fit.push(vec![name.as_str().into(), norm.into(), "exact".into(), "".into(), "".into()]),
        FitOutcome::Fitted { exponent, intercept, rms } => {
            fit.push(vec![name.as_str().into(), norm.into(), exponent.into(), intercept.into(), rms.into()])
        }
    }
    out.add("fit", fit);
    Ok(unconverged)
}

fn reference_label(spec: &ReferenceSpec) -> String {
    match spec {
        ReferenceSpec::ImplicitEuler => "implicit_euler".into(),
        ReferenceSpec::Incremental => "incremental".into(),
        ReferenceSpec::Leapfrog => "leapfrog".into(),
        ReferenceSpec::Quasistatic => "quasistatic".into(),
        ReferenceSpec::Catalogue { name, .. } => name.clone(),
    }
}

fn oracle_mode(config: &ExperimentConfig, out: &mut Artifacts) -> Result<Option<LabError>> {
    let spec = config.reference.as_ref().expect("validated config carries a reference");
    let reference = spec.build(&config.problem).map_err(LabError::Solve)?;
    let target = reference.sample(config.problem.grid());
    out.add("reference", trajectory_table(&target));
    let (eps, u, report) = solve(config)?;
    let (sup, l2) = distances(&u, &target);
    let mut t = Table::new(&["reference", "step_residual", "sup_distance", "l2_distance"]);
    t.push(vec![reference.name().into(), reference.step_residual().into(), sup.into(), l2.into()]);
    out.add("oracle", t);

    // exhaustive cross-check of the main solver where the dimension allows it
    if config.problem.free_dim() <= MAX_DIM {
        let w = make_weights(eps, config.problem.grid()).map_err(LabError::Problem)?;
        let (_, brute) = brute_force_seeded(&config.problem, &w, 1e-10, config.seed).map_err(LabError::Solve)?;
        let gap = (report.objective - brute.objective).abs() / (1.0 + brute.objective.abs());
        let mut b = Table::new(&["main_objective", "brute_objective", "relative_gap"]);
        b.push(vec![report.objective.into(), brute.objective.into(), gap.into()]);
        out.add("brute_force", b);
    }
    Ok(convergence(&report))
}
