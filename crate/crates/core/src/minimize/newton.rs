use super::{MinimizeReport, SolverKind};
use crate::error::{Result, WideError};
use crate::functional::Ctx;
use crate::math;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::WeightScheme;
use alloc::vec;
use alloc::vec::Vec;

const MAX_ITER: usize = 200;

/// Damped Newton on the scaled stationarity system with a banded LU.
///
/// A nonpositive pivot signals an indefinite Hessian; the Jacobian is then
/// shifted by a multiple of the identity until the factorization is
/// positive. Steps are accepted by an Armijo test on the objective, with the
/// residual norm deciding where the objective is flat to roundoff.
pub fn solve_newton(
    problem: &WideProblem,
    w: &WeightScheme,
    init: &DiscreteTrajectory,
    tol: Option<f64>,
) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    if !problem.dissipation().is_smooth() {
        return Err(WideError::NonSmoothDissipation);
    }
    let ctx = Ctx::new(problem, w)?;
    let run = newton_core(&ctx, init, tol, MAX_ITER)?;
    if let Some(e) = run.failure {
        return Err(e);
    }
    let report = MinimizeReport {
        objective: run.objective,
        iterations: run.iterations,
        residual: run.residual,
        tolerance: run.tolerance,
        solver: SolverKind::Newton,
        converged: run.residual <= run.tolerance,
        inclusion: None,
    };
    Ok((run.u, report))
}

pub(crate) struct NewtonRun {
    pub u: DiscreteTrajectory,
    pub objective: f64,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    /// Set when the iteration stopped early; `u` is the last accepted iterate.
    pub failure: Option<WideError>,
}

pub(crate) fn newton_core(
    ctx: &Ctx<'_>,
    init: &DiscreteTrajectory,
    tol: Option<f64>,
    max_iter: usize,
) -> Result<NewtonRun> {
    let problem = ctx.p;
    let mut u = init.clone();
    if u.dim() != ctx.d || u.len() != problem.grid().nodes() {
        return Err(WideError::ShapeMismatch("initial trajectory does not match the problem".into()));
    }
    problem.impose_prefix(&mut u);
    let off = ctx.i0 * ctx.d;
    let m = ctx.free_len();
    let scales: Vec<f64> = (0..m).map(|s| ctx.row_scale(ctx.i0 + s / ctx.d)).collect();

    let mut r = vec![0.0; m];
    ctx.residual(u.values(), &mut r);
    let tol = tol.unwrap_or_else(|| {
        let floor = super::roundoff_floor(&ctx.jacobian(u.values()), u.values());
        (1e-8 * (1.0 + math::max_abs(&r))).max(floor)
    });
    let (mut obj, mut mag) = ctx.objective(u.values());
    let mut trial = u.clone();
    let mut r_trial = vec![0.0; m];
    let mut mu_prev = 0.0_f64;
    let done = |u: DiscreteTrajectory, obj: f64, it: usize, rn: f64, failure: Option<WideError>| NewtonRun {
        u,
        objective: obj,
        iterations: it,
        residual: rn,
        tolerance: tol,
        failure,
    };

    for it in 0..max_iter {
        let rn = math::max_abs(&r);
        if !rn.is_finite() {
            return Ok(done(u, obj, it, rn, Some(WideError::NonFiniteValue)));
        }
        if rn <= tol {
            return Ok(done(u, obj, it, rn, None));
        }
        let jac = ctx.jacobian(u.values());
        let diag_scale = jac.diagonal().iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-300);
        let mut mu = if mu_prev > 0.0 { mu_prev * 0.1 } else { 0.0 };
        if mu < 1e-14 * diag_scale {
            mu = 0.0;
        }
        let mut dir = vec![0.0; m];
        let mut factored = false;
        for _ in 0..80 {
            let mut shifted = jac.clone();
            if mu > 0.0 {
                shifted.add_diagonal(mu);
            }
            match shifted.factor() {
                Ok(lu) => {
                    let min = lu.pivots().iter().cloned().fold(f64::INFINITY, f64::min);
                    if min > 1e-13 * diag_scale {
                        dir.iter_mut().zip(&r).for_each(|(d, x)| *d = -x);
                        lu.solve_in_place(&mut dir);
                        factored = dir.iter().all(|x| x.is_finite());
                        if factored {
                            break;
                        }
                    }
                    mu = (2.0 * mu).max(min.abs() + 1e-8 * diag_scale);
                }
                Err(_) => mu = (2.0 * mu).max(1e-8 * diag_scale),
            }
        }
        if !factored {
            return Ok(done(u, obj, it, rn, Some(WideError::LineSearchFailure { iteration: it })));
        }
        mu_prev = mu;

        let slope: f64 = (0..m).map(|s| scales[s] * r[s] * dir[s]).sum();
        let slack = 1e-12 * mag.max(obj.abs());
        let r2 = math::norm2(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            {
                let (cur, tv) = (u.values(), trial.values_mut());
                for s in 0..m {
                    tv[off + s] = cur[off + s] + alpha * dir[s];
                }
            }
            let (o, mg) = ctx.objective(trial.values());
            if o.is_finite() {
                ctx.residual(trial.values(), &mut r_trial);
                let r2t = math::norm2(&r_trial);
                let armijo = o <= obj + 1e-4 * alpha * slope.min(0.0) + slack;
                let progress = r2t < (1.0 - 1e-4 * alpha) * r2 || o < obj - slack;
                // Smoothed nonsmooth potentials are convex in the velocities, so
                // the residual norm is a valid merit there.
                let ok = if ctx.smoothing > 0.0 { r2t < (1.0 - 1e-4 * alpha) * r2 } else { armijo && progress };
                if ok && r2t.is_finite() {
                    core::mem::swap(&mut u, &mut trial);
                    core::mem::swap(&mut r, &mut r_trial);
                    obj = o;
                    mag = mg;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            let failure = (rn > 10.0 * tol).then_some(WideError::LineSearchFailure { iteration: it });
            return Ok(done(u, obj, it, rn, failure));
        }
    }
    let rn = math::max_abs(&r);
    let failure = (rn > tol).then_some(WideError::MaxIterations { iterations: max_iter, residual: rn });
    Ok(done(u, obj, max_iter, rn, failure))
}
