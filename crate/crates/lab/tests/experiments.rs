use wide_lab::config::{Coupling, PdeKind, ReferenceSpec};
use wide_lab::experiment::{checks_table, diagnose, execute};
use wide_lab::{read_trajectory, trajectory_table, Cell, ExperimentConfig, Mode, Table};

const LINEAR: &str = "
mode = run
grid.horizon = 1
grid.steps = 200
problem.energy = quadratic
problem.energy_params = 1
problem.dissipation = quadratic
problem.dissipation_params = 1
problem.u0 = 1
solver.eps = 1e-2
";

fn num(t: &Table, row: usize, col: &str) -> f64 {
    let k = t.header.iter().position(|h| h == col).unwrap();
    match &t.rows[row][k] {
        Cell::Num(x) => *x,
        other => panic!("{other:?}"),
    }
}

#[test]
fn parses_inline_problem() {
    let c = ExperimentConfig::parse(LINEAR).unwrap();
    assert_eq!(c.mode, Mode::Run);
    assert_eq!(c.seed, 0);
    assert_eq!(c.grid.steps(), 200);
    assert_eq!(c.eps, Some(1e-2));
    assert_eq!(c.problem.u0(), &[1.0]);
    assert_eq!(c.coupling, Coupling::Fixed);
    assert!(c.reference.is_none());
}

#[test]
fn rejects_bad_configs() {
    let cases = [
        (format!("{LINEAR}extra.key = 1"), "unknown"),
        (format!("{LINEAR}seed = 1\nseed = 2"), "twice"),
        (LINEAR.replace("mode = run", "mode = walk"), "mode"),
        (LINEAR.replace("problem.energy = quadratic", "problem.energy = cubic"), "energy"),
        (LINEAR.replace("mode = run", "mode = sweep"), "eps_list"),
        (format!("{LINEAR}problem.forcing = linear"), "forcing_params"),
        (format!("{LINEAR}problem.forcing = linear\nproblem.forcing_params = 1, 2"), "expected 1"),
        (LINEAR.replace("dissipation_params = 1", "dissipation_params = 1, 2"), "expected 1"),
        (format!("{LINEAR}reference.kind = catalogue\nreference.name = nowhere"), "nowhere"),
    ];
    for (text, needle) in cases {
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains(needle), "{err}");
    }
}

#[test]
fn pde_profiles_and_defaults() {
    let text = "mode = pde\ngrid.horizon = 0.1\ngrid.steps = 20\npde.kind = heat\npde.points = 9\n\
                pde.profile = parabola\nsolver.eps = 1e-2\n";
    let c = ExperimentConfig::parse(text).unwrap();
    let spec = c.pde.unwrap();
    assert_eq!(spec.kind, PdeKind::Heat);
    assert_eq!(spec.nu, 1.0);
    assert_eq!(c.problem.dim(), 9);
    assert_eq!(c.problem.u0()[4], 1.0);
    let wave = text.replace("heat", "wave").replace("parabola", "mode") + "pde.gamma = power\npde.gamma_param = 2\n";
    let c = ExperimentConfig::parse(&wave).unwrap();
    assert_eq!(c.problem.rho(), c.pde.unwrap().mesh.spacing());
    assert!(ExperimentConfig::parse(&(text.to_string() + "pde.damping_p = 3\n")).is_err());
    assert!(ExperimentConfig::parse(&text.replace("parabola", "mode\npde.profile_param = 10")).is_err());
}

#[test]
fn run_matches_the_direct_solve() {
    let c = ExperimentConfig::parse(LINEAR).unwrap();
    let out = execute(&c).unwrap();
    assert_eq!(out.exit_code(), 0);
    let traj = out.artifacts.get("trajectory").unwrap();
    assert_eq!(traj.rows.len(), 201);
    let w = wide_core::make_weights(1e-2, c.problem.grid()).unwrap();
    let (u, _) = wide_core::minimize::minimize(&c.problem, &w, None).unwrap();
    for i in 0..=200 {
        assert_eq!(num(traj, i, "u_1"), u.node(i)[0]);
    }
}

#[test]
fn sweep_with_squared_coupling_regrids() {
    let text = LINEAR.replace("mode = run", "mode = sweep")
        + "solver.eps_list = 1e-1, 3e-2, 1e-2\nsolver.tau_coupling = squared\n\
           reference.kind = catalogue\nreference.name = exp_decay\nreference.params = 1\n";
    let c = ExperimentConfig::parse(&text).unwrap();
    assert_eq!(c.reference, Some(ReferenceSpec::Catalogue { name: "exp_decay".into(), params: vec![1.0] }));
    let out = execute(&c).unwrap();
    let sweep = out.artifacts.get("sweep").unwrap();
    for (row, eps) in [1e-1, 3e-2, 1e-2].into_iter().enumerate() {
        assert!((num(sweep, row, "tau") - eps * eps).abs() <= 1e-3 * eps * eps);
    }
    let fit = out.artifacts.get("fit").unwrap();
    assert!(num(fit, 0, "exponent") > 0.4);
}

#[test]
fn stored_trajectory_reproduces_the_diagnostics() {
    let c = ExperimentConfig::parse(&LINEAR.replace("mode = run", "mode = check")).unwrap();
    let out = execute(&c).unwrap();
    assert_eq!(out.exit_code(), 0);
    let dir = tempfile::tempdir().unwrap();
    out.artifacts.write(dir.path()).unwrap();
    let u = read_trajectory(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(u.grid(), c.problem.grid());
    let again = checks_table(&diagnose(&c.problem, &u, 1e-2, c.el_tol, c.seed).unwrap());
    assert_eq!(&again, out.artifacts.get("checks").unwrap());
    assert_eq!(trajectory_table(&u), *out.artifacts.get("trajectory").unwrap());
}

#[test]
fn oracle_mode_cross_checks_brute_force() {
    let text = "mode = oracle\nseed = 5\ngrid.horizon = 1\ngrid.steps = 5\nproblem.energy = power\n\
                problem.energy_params = 4, 2\nproblem.dissipation = power_law\nproblem.dissipation_params = 3, 1\n\
                problem.u0 = 0.8, -0.4\nsolver.eps = 0.1\nreference.kind = incremental\n";
    let out = execute(&ExperimentConfig::parse(text).unwrap()).unwrap();
    assert_eq!(out.exit_code(), 0);
    let b = out.artifacts.get("brute_force").unwrap();
    assert!(num(b, 0, "relative_gap") <= 1e-5);
    assert_eq!(out.artifacts.get("reference").unwrap().rows.len(), 6);
}
