#![allow(dead_code)]

use wide_core::*;

pub fn grid(t: f64, n: usize) -> TimeGrid {
    TimeGrid::new(t, n).unwrap()
}

/// Scalar gradient flow `nu u' + lambda u = f`.
pub fn linear(lambda: f64, nu: f64, t: f64, n: usize, u0: f64) -> WideProblem {
    WideProblem::new(
        grid(t, n),
        EnergyModel::isotropic(lambda, 1),
        DissipationModel::quadratic(nu).unwrap(),
        0.0,
        vec![u0],
        None,
    )
    .unwrap()
}

/// `rho u'' + nu u' + lambda u = 0`.
pub fn oscillator(rho: f64, nu: f64, lambda: f64, t: f64, n: usize, u0: f64, u1: f64) -> WideProblem {
    WideProblem::new(
        grid(t, n),
        EnergyModel::isotropic(lambda, 1),
        DissipationModel::quadratic(nu).unwrap(),
        rho,
        vec![u0],
        Some(vec![u1]),
    )
    .unwrap()
}

/// Play problem: `alpha |u'|` dissipation, `E = u^2/2 - t u`.
pub fn play(alpha: f64, t: f64, n: usize) -> WideProblem {
    WideProblem::new(
        grid(t, n),
        EnergyModel::isotropic(1.0, 1).with_forcing(Forcing::linear(vec![1.0])),
        DissipationModel::one_homogeneous(alpha).unwrap(),
        0.0,
        vec![0.0],
        None,
    )
    .unwrap()
}

pub fn weights(p: &WideProblem, eps: f64) -> WeightScheme {
    make_weights(eps, p.grid()).unwrap()
}

/// Central-difference gradient of the functional over the free nodes.
pub fn fd_gradient(p: &WideProblem, w: &WeightScheme, u: &DiscreteTrajectory) -> Vec<f64> {
    let off = p.first_free() * p.dim();
    let mut out = Vec::new();
    for s in off..u.values().len() {
        let h = 1e-6 * (1.0 + u.values()[s].abs());
        let mut a = u.clone();
        a.values_mut()[s] += h;
        let mut b = u.clone();
        b.values_mut()[s] -= h;
        out.push((eval_functional(p, w, &a).unwrap() - eval_functional(p, w, &b).unwrap()) / (2.0 * h));
    }
    out
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let den = b.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    num / den.max(1e-300)
}
