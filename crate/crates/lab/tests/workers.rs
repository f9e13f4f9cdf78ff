use wide_lab::experiment::{execute, WORKERS_VAR};
use wide_lab::{ExperimentConfig, LabError};

const SWEEP: &str = "
mode = sweep
grid.horizon = 1
grid.steps = 200
problem.energy = quadratic
problem.energy_params = 1
problem.dissipation = quadratic
problem.dissipation_params = 1
problem.u0 = 1
solver.eps_list = 1e-1, 1e-2, 1e-3, 1e-4
reference.kind = implicit_euler
";

#[test]
fn worker_count_does_not_change_results() {
    let c = ExperimentConfig::parse(SWEEP).unwrap();
    std::env::set_var(WORKERS_VAR, "1");
    let serial = execute(&c).unwrap().artifacts;
    std::env::set_var(WORKERS_VAR, "3");
    let parallel = execute(&c).unwrap().artifacts;
    std::env::set_var(WORKERS_VAR, "zero");
    assert!(matches!(execute(&c), Err(LabError::BadValue { .. })));
    std::env::remove_var(WORKERS_VAR);
    assert_eq!(serial, parallel);
}
