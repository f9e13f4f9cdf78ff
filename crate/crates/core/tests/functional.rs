#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use wide_core::functional::scaled_residual;
use wide_core::*;

#[test]
fn three_step_matrix() {
    let p = linear(1.0, 1.0, 0.3, 3, 1.0);
    let w = weights(&p, 0.1);
    let sys = assemble_linear_system(&p, &w).unwrap();
    let (eps, tau, lam) = (0.1, p.grid().tau(), 1.0);
    let dg = 2.0 * eps + tau + lam * tau * tau;
    let expect = [[dg, -eps, 0.0], [-eps - tau, dg, -eps], [0.0, -eps, eps]];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(sys.matrix.get(i, j).to_bits(), expect[i][j].to_bits(), "({i},{j})");
        }
    }
    assert_eq!(sys.rhs[0].to_bits(), (eps * 1.0 + tau * 1.0).to_bits());
    assert_eq!(&sys.rhs[1..], &[0.0, 0.0]);
    // numeric values as printed
    assert!((sys.matrix.get(0, 0) - 0.31).abs() < 1e-15);
    assert!((sys.matrix.get(1, 0) + 0.2).abs() < 1e-15);
    assert!((sys.rhs[0] - 0.2).abs() < 1e-15);
}

#[test]
fn nonsingular_for_nonnegative_lambda_and_guarded_otherwise() {
    let p = linear(0.0, 1.0, 1.0, 5, 1.0);
    assert!(assemble_linear_system(&p, &weights(&p, 0.3)).is_ok());
    let p = linear(-1.0, 1.0, 4.0, 2, 1.0);
    let w = weights(&p, 0.1);
    assert!(matches!(assemble_linear_system(&p, &w), Err(WideError::SingularityRisk { .. })));
}

#[test]
fn constant_trajectory_keeps_only_energy() {
    let p = linear(1.0, 1.0, 0.2, 2, 1.0);
    let w = weights(&p, 0.1);
    let u = DiscreteTrajectory::constant(*p.grid(), &[1.0]);
    let v = eval_functional(&p, &w, &u).unwrap();
    // energy at nodes 0 and 1: tau (1 + 1/2) * 1/2
    assert!((v - 0.1 * 1.5 * 0.5).abs() < 1e-15);
}

#[test]
fn hand_summed_four_node_value() {
    let p = linear(1.0, 1.0, 0.3, 3, 1.0);
    let w = weights(&p, 0.1);
    let u = DiscreteTrajectory::new(*p.grid(), 1, vec![1.0, 0.9, 0.85, 0.85]).unwrap();
    let tau: f64 = 0.3 / 3.0;
    let eps: f64 = 0.1;
    let q = eps / (eps + tau);
    let vals = [1.0, 0.9, 0.85, 0.85];
    let mut expect = 0.0;
    for i in 1..=3 {
        let v = (vals[i] - vals[i - 1]) / tau;
        expect += tau * q.powi(i as i32 - 1) * eps * 0.5 * v * v;
    }
    for j in 0..3 {
        expect += tau * q.powi(j as i32) * 0.5 * vals[j] * vals[j];
    }
    let got = eval_functional(&p, &w, &u).unwrap();
    assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
}

#[test]
fn wrong_initial_value_rejected() {
    let p = linear(1.0, 1.0, 0.3, 3, 1.0);
    let w = weights(&p, 0.1);
    let u = DiscreteTrajectory::constant(*p.grid(), &[2.0]);
    assert_eq!(eval_functional(&p, &w, &u), Err(WideError::ConstraintViolated { node: 0 }));
}

fn wiggle(p: &WideProblem, seed: f64) -> DiscreteTrajectory {
    let mut u = p.rest_trajectory();
    let d = p.dim();
    for i in p.first_free()..p.grid().nodes() {
        for k in 0..d {
            u.node_mut(i)[k] += 0.3 * ((seed + i as f64 * 1.7 + k as f64).sin());
        }
    }
    u
}

#[test]
fn gradient_matches_finite_differences() {
    let probs = vec![
        linear(1.3, 0.7, 1.0, 6, 1.0),
        oscillator(1.0, 0.5, 2.0, 1.0, 7, 1.0, -0.5),
        WideProblem::new(
            grid(1.0, 6),
            builtin_energy(EnergySpec::DoubleWell { dim: 2 }).unwrap().with_forcing(Forcing::linear(vec![0.5, -1.0])),
            DissipationModel::power_law(3.0, 0.8).unwrap(),
            0.4,
            vec![0.2, -0.1],
            Some(vec![0.5, 0.0]),
        )
        .unwrap(),
    ];
    for p in &probs {
        for (s, eps) in [(0.1, 0.05), (1.0, 0.4), (2.0, 1.0), (3.0, 0.01), (4.0, 2.0)] {
            let w = weights(p, eps);
            let u = wiggle(p, s);
            let g = eval_gradient(p, &w, &u).unwrap();
            let fd = fd_gradient(p, &w, &u);
            assert!(rel_err(&g, &fd) < 1e-6, "{} {:?} {:?}", rel_err(&g, &fd), g, fd);
        }
    }
}

#[test]
fn gradient_is_affine_system_for_quadratics() {
    let p = linear(1.0, 1.0, 0.6, 6, 1.0);
    let w = weights(&p, 0.2);
    let sys = assemble_linear_system(&p, &w).unwrap();
    let u = wiggle(&p, 0.3);
    let r = scaled_residual(&p, &w, &u).unwrap();
    let x = &u.values()[1..];
    let mut ax = vec![0.0; x.len()];
    sys.matrix.matvec(x, &mut ax);
    let tau = p.grid().tau();
    let eps = 0.2;
    for j in 0..x.len() {
        let row_norm = if j + 1 == x.len() { tau * tau * eps / (eps + tau) } else { tau * tau };
        assert!((r[j] * row_norm - (ax[j] - sys.rhs[j])).abs() < 1e-14, "row {j}");
    }
}

#[test]
fn hessian_matches_scaled_matrix_and_fd() {
    let p = linear(1.0, 1.0, 0.5, 5, 1.0);
    let eps = 0.1;
    let w = weights(&p, eps);
    let u = wiggle(&p, 1.0);
    let h = hessian_operator(&p, &w, &u).unwrap();
    let sys = assemble_linear_system(&p, &w).unwrap();
    let tau = p.grid().tau();
    let x: Vec<f64> = (0..5).map(|i| (i as f64 * 0.9).cos()).collect();
    let mut hx = vec![0.0; 5];
    h.apply(&x, &mut hx);
    let mut ax = vec![0.0; 5];
    sys.matrix.matvec(&x, &mut ax);
    let q: f64 = eps / (eps + tau);
    for j in 0..5 {
        let e = q.powi(j as i32 + 1);
        let expect = if j == 4 { ax[j] * e * (eps + tau) / (eps * tau) } else { ax[j] * e / tau };
        assert!((hx[j] - expect).abs() < 1e-12 * (1.0 + expect.abs()), "{j}: {} {}", hx[j], expect);
    }
    assert_eq!(h.block_bandwidth(), 1);

    let p = oscillator(1.0, 0.3, 1.0, 1.0, 8, 1.0, 0.0);
    let w = weights(&p, 0.05);
    let u = wiggle(&p, 2.0);
    let h = hessian_operator(&p, &w, &u).unwrap();
    assert!(h.entry(0, 2) != 0.0);
    assert_eq!(h.scaled().get(0, 3), 0.0);
    assert_eq!(h.block_bandwidth(), 2);
    // directional derivative of the gradient
    let z: Vec<f64> = (0..h.dim()).map(|i| (i as f64).sin() + 0.5).collect();
    let mut hz = vec![0.0; z.len()];
    h.apply(&z, &mut hz);
    let step = 1e-5;
    let shift = |sgn: f64| {
        let mut v = u.clone();
        for (s, zz) in z.iter().enumerate() {
            v.values_mut()[2 + s] += sgn * step * zz;
        }
        eval_gradient(&p, &w, &v).unwrap()
    };
    let (gp, gm) = (shift(1.0), shift(-1.0));
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * step)).collect();
    assert!(rel_err(&hz, &fd) < 1e-5);
}

#[test]
fn nonsmooth_gradient_refused() {
    let p = play(1.0, 1.0, 4);
    let w = weights(&p, 0.1);
    let u = p.rest_trajectory();
    assert_eq!(eval_gradient(&p, &w, &u), Err(WideError::NonSmoothDissipation));
    assert!(matches!(hessian_operator(&p, &w, &u), Err(WideError::NonSmoothDissipation)));
}

#[test]
fn hessian_positive_for_mildly_nonconvex_energy() {
    // double well has lambda = -1; 4 eps lambda^- <= 1
    let p = WideProblem::new(
        grid(1.0, 40),
        builtin_energy(EnergySpec::DoubleWell { dim: 1 }).unwrap(),
        DissipationModel::quadratic(1.0).unwrap(),
        0.0,
        vec![0.0],
        None,
    )
    .unwrap();
    let w = weights(&p, 0.2);
    let u = p.rest_trajectory();
    let h = hessian_operator(&p, &w, &u).unwrap();
    let lu = h.scaled().clone().factor().unwrap();
    assert!(lu.pivots().iter().all(|&x| x > 0.0));
}
