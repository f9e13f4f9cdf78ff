mod common;

use common::*;
use wide_core::minimize::*;
use wide_core::*;

#[test]
fn banded_solve_small_epsilon_is_euler() {
    let p = linear(1.0, 1.0, 1.0, 10, 1.0);
    let w = weights(&p, 1e-8);
    let (u, rep) = solve_quadratic(&p, &w).unwrap();
    assert!(rep.converged);
    // the last node repeats its neighbour (natural final condition)
    for i in 0..10 {
        assert!((u.node(i)[0] - 1.1f64.powi(-(i as i32))).abs() < 1e-6);
    }
    assert_eq!(u.node(10)[0], u.node(9)[0]);
}

#[test]
fn banded_solve_flat_energy_is_constant() {
    let p = linear(0.0, 1.0, 1.0, 10, 0.7);
    for eps in [1e-3, 0.1, 10.0] {
        let (u, _) = solve_quadratic(&p, &weights(&p, eps)).unwrap();
        assert!(u.values().iter().all(|&x| (x - 0.7).abs() < 1e-14));
    }
}

#[test]
fn banded_solve_final_nodes_equal() {
    let p = linear(1.0, 1.0, 0.3, 3, 1.0);
    let (u, rep) = solve_quadratic(&p, &weights(&p, 0.1)).unwrap();
    assert_eq!(u.node(3)[0], u.node(2)[0]);
    let g = eval_gradient(&p, &weights(&p, 0.1), &u).unwrap();
    assert!(g.iter().all(|x| x.abs() < 1e-10 * 1.2));
    assert_eq!(rep.solver, SolverKind::BandedDirect);
}

#[test]
fn newton_matches_direct_on_quadratics() {
    let p = oscillator(0.5, 0.8, 2.0, 1.0, 30, 1.0, 0.3);
    let w = weights(&p, 0.05);
    let (a, _) = solve_quadratic(&p, &w).unwrap();
    let mut init = p.rest_trajectory();
    for x in init.values_mut().iter_mut().skip(2) {
        *x = 3.0;
    }
    let (b, rep) = solve_newton(&p, &w, &init, None).unwrap();
    assert!(rep.iterations <= 2, "{rep:?}");
    assert!(a.sup_distance(&b) < 1e-8);
}

#[test]
fn newton_harmonic_oscillator_tracks_cosine() {
    let p = oscillator(1.0, 0.0, 1.0, 2.0 * std::f64::consts::PI, 2000, 1.0, 0.0);
    let w = weights(&p, 1e-3);
    let (u, rep) = solve_newton(&p, &w, &p.rest_trajectory(), None).unwrap();
    assert!(rep.converged);
    let mut err: f64 = 0.0;
    for i in 0..=2000 {
        err = err.max((u.node(i)[0] - p.grid().t(i).cos()).abs());
    }
    assert!(err <= 0.05, "{err}");
}

#[test]
fn selection_energy_leaves_zero() {
    let p = WideProblem::new(
        grid(1.0, 1000),
        builtin_energy(EnergySpec::SqrtSelection).unwrap(),
        DissipationModel::quadratic(1.0).unwrap(),
        0.0,
        vec![0.0],
        None,
    )
    .unwrap();
    let w = weights(&p, 1e-2);
    let (u, rep) = minimize(&p, &w, None).unwrap();
    assert!(rep.converged);
    assert!((1..=1000).all(|i| u.node(i)[0] > 0.0));
    let end = u.node(1000)[0];
    assert!(end > 0.5, "{end}");
}

#[test]
fn prox_play_operator() {
    let p = play(1.0, 2.0, 2000);
    let w = weights(&p, 1e-4);
    let (u, rep) = solve_prox(&p, &w, &p.rest_trajectory(), None).unwrap();
    assert!(rep.converged, "{rep:?}");
    let mut err: f64 = 0.0;
    for i in 0..=2000 {
        let t = p.grid().t(i);
        err = err.max((u.node(i)[0] - (t - 1.0).max(0.0)).abs());
    }
    assert!(err <= 0.02, "{err} {rep:?}");
}

#[test]
fn prox_frozen_when_threshold_dominates() {
    let p = play(5.0, 2.0, 200);
    let w = weights(&p, 1e-2);
    let (u, _) = solve_prox(&p, &w, &p.rest_trajectory(), None).unwrap();
    assert!(u.values().iter().all(|&x| x == 0.0));
}

#[test]
fn brute_force_reproduces_three_step_case() {
    let p = linear(1.0, 1.0, 0.3, 3, 1.0);
    let w = weights(&p, 0.1);
    let (a, ra) = solve_quadratic(&p, &w).unwrap();
    let (b, rb) = brute_force(&p, &w, 1e-10).unwrap();
    assert!(a.sup_distance(&b) < 1e-6, "{:?} {:?}", a.values(), b.values());
    assert!((ra.objective - rb.objective).abs() < 1e-10);
}

#[test]
fn brute_force_power_law_prox() {
    let p = WideProblem::new(
        grid(1.0, 4),
        EnergyModel::isotropic(2.0, 1),
        DissipationModel::power_law(1.5, 1.0).unwrap(),
        0.0,
        vec![1.0],
        None,
    )
    .unwrap();
    let w = weights(&p, 0.3);
    let (_, a) = solve_prox(&p, &w, &p.rest_trajectory(), None).unwrap();
    let (_, b) = brute_force(&p, &w, 1e-10).unwrap();
    assert!((a.objective - b.objective).abs() < 1e-6, "{} {}", a.objective, b.objective);
}
