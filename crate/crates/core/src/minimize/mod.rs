//! Minimizers of the discrete functional.

mod brute;
mod newton;
mod prox;

pub use brute::{brute_force, brute_force_seeded, MAX_DIM};
pub use newton::solve_newton;
pub use prox::solve_prox;

use crate::band::BandMatrix;
use crate::dissipation::DissipationModel;
use crate::error::{Result, WideError};
use crate::functional::{affine_system, assemble_linear_system, Ctx};
use crate::math;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::WeightScheme;
use alloc::vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    BandedDirect,
    Newton,
    ProxSplit,
    BruteForce,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::BandedDirect => "banded_direct",
            SolverKind::Newton => "newton",
            SolverKind::ProxSplit => "prox_split",
            SolverKind::BruteForce => "brute_force",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport {
    pub objective: f64,
    pub iterations: usize,
    /// Scaled stationarity residual (smooth solvers) or proximal fixed-point
    /// residual (splitting), sup norm.
    pub residual: f64,
    pub tolerance: f64,
    pub solver: SolverKind,
    pub converged: bool,
    /// Largest distance of the smooth force to the dissipation
    /// subdifferential, checked after a splitting solve.
    pub inclusion: Option<f64>,
}

/// Solves the problem with the solver its structure calls for.
pub fn minimize(
    problem: &WideProblem,
    w: &WeightScheme,
    init: Option<&DiscreteTrajectory>,
) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    let quadratic = problem.energy().quadratic_matrix().is_some();
    match *problem.dissipation() {
        DissipationModel::Quadratic { .. } if quadratic => solve_quadratic(problem, w),
        d if d.is_smooth() => {
            let start = init.cloned().unwrap_or_else(|| default_init(problem));
            solve_newton(problem, w, &start, None)
        }
        _ => {
            let start = init.cloned().unwrap_or_else(|| default_init(problem));
            solve_prox(problem, w, &start, None)
        }
    }
}

/// Size of the rounding error in evaluating the scaled residual, which for
/// small `tau` carries coefficients up to `eps^2 rho / tau^4`.
pub(crate) fn roundoff_floor(jacobian: &BandMatrix, u: &[f64]) -> f64 {
    f64::EPSILON * jacobian.max_row_sum() * (1.0 + math::max_abs(u))
}

/// Rest trajectory, or the ramp `u0 + delta t^2` for the selection energy,
/// whose zero trajectory is a critical point to escape.
pub fn default_init(problem: &WideProblem) -> DiscreteTrajectory {
    let mut u = problem.rest_trajectory();
    if problem.energy().name() == "sqrt_selection" {
        let grid = *problem.grid();
        for i in problem.first_free()..grid.nodes() {
            let t = grid.t(i);
            for x in u.node_mut(i) {
                *x += 1e-3 * t * t;
            }
        }
    }
    u
}

/// Direct banded solve for quadratic dissipation and quadratic energy.
pub fn solve_quadratic(problem: &WideProblem, w: &WeightScheme) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    if !matches!(problem.dissipation(), DissipationModel::Quadratic { .. }) {
        return Err(WideError::WrongRegime("quadratic dissipation"));
    }
    if problem.energy().quadratic_matrix().is_none() {
        return Err(WideError::WrongRegime("quadratic energy"));
    }
    let scalar_first_order = problem.rho() == 0.0 && problem.dim() == 1;
    let system = if scalar_first_order { assemble_linear_system(problem, w)? } else { affine_system(problem, w)? };
    let x = system.solve()?;
    let ctx = Ctx::new(problem, w)?;
    let mut u = problem.rest_trajectory();
    u.values_mut()[ctx.i0 * ctx.d..].copy_from_slice(&x);
    let mut r = vec![0.0; ctx.free_len()];
    ctx.residual(u.values(), &mut r);
    let mut residual = math::max_abs(&r);
    // Refinement against the difference-form residual, which stays accurate
    // when eps / tau^2 makes the assembled matrix badly conditioned.
    let lu = ctx.jacobian(u.values()).factor()?;
    let off = ctx.i0 * ctx.d;
    for _ in 0..3 {
        if residual == 0.0 {
            break;
        }
        let before = u.values().to_vec();
        r.iter_mut().for_each(|x| *x = -*x);
        lu.solve_in_place(&mut r);
        u.values_mut()[off..].iter_mut().zip(&r).for_each(|(x, dx)| *x += dx);
        ctx.residual(u.values(), &mut r);
        let next = math::max_abs(&r);
        if !(next < 0.5 * residual) {
            u.values_mut().copy_from_slice(&before);
            ctx.residual(u.values(), &mut r);
            break;
        }
        residual = next;
    }
    let mut r0 = vec![0.0; ctx.free_len()];
    ctx.residual(problem.rest_trajectory().values(), &mut r0);
    let tolerance = (1e-10 * (1.0 + math::max_abs(&r0) + math::max_abs(&u.values()[off..])))
        .max(roundoff_floor(&ctx.jacobian(u.values()), u.values()));
    let objective = ctx.objective(u.values()).0;
    let report = MinimizeReport {
        objective,
        iterations: 1,
        residual,
        tolerance,
        solver: SolverKind::BandedDirect,
        converged: residual <= tolerance,
        inclusion: None,
    };
    Ok((u, report))
}
