//! The causal limit `eps -> 0`: sweeps over `eps`, distances to reference
//! solutions and fitted convergence exponents.
//!
//! Distances skip the final node, which carries the natural condition
//! `u_N = u_{N-1}` rather than the evolution equation.

use crate::energy::Forcing;
use crate::error::{Result, WideError};
use crate::grid::TimeGrid;
use crate::math;
use crate::minimize::{minimize, MinimizeReport};
use crate::oracles::ReferenceSolution;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::make_weights;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// Errors below this are treated as exact agreement.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Sup,
    L2,
}

/// Least-squares fit of `ln error = exponent ln eps + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitOutcome {
    Fitted {
        exponent: f64,
        intercept: f64,
        rms: f64,
    },
    /// Every error is below [`EXACT_FLOOR`]; there is nothing to fit.
    Exact,
}

impl FitOutcome {
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            FitOutcome::Fitted { exponent, .. } => Some(exponent),
            FitOutcome::Exact => None,
        }
    }
}

/// Fits the log-log slope of `errors` against `epsilons`.
pub fn fit_exponent(epsilons: &[f64], errors: &[f64]) -> Result<FitOutcome> {
    if epsilons.len() != errors.len() {
        return Err(WideError::ShapeMismatch("one error per epsilon".into()));
    }
    if errors.iter().all(|&e| e < EXACT_FLOOR) {
        return Ok(FitOutcome::Exact);
    }
    let (x, y): (Vec<f64>, Vec<f64>) =
        epsilons.iter().zip(errors).filter(|(_, &e)| e > 0.0).map(|(&s, &e)| (math::ln(s), math::ln(e))).unzip();
    if x.len() < 2 {
        return Err(WideError::InsufficientSweep { need: 2, got: x.len() });
    }
    let (exponent, intercept, rms) = math::linear_fit(&x, &y);
    Ok(FitOutcome::Fitted { exponent, intercept, rms })
}

/// Sup and discrete `L^2` distance over nodes `0..N-1`.
pub fn distances(u: &DiscreteTrajectory, reference: &DiscreteTrajectory) -> (f64, f64) {
    let grid = u.grid();
    let nodes = grid.steps();
    let sup = u.sup_distance_upto(reference, nodes);
    let d = u.dim();
    let mut s = 0.0;
    for i in 1..nodes {
        for k in 0..d {
            let x = u.node(i)[k] - reference.node(i)[k];
            s += grid.tau() * x * x;
        }
    }
    (sup, math::sqrt(s))
}

/// Outcome of one `eps` in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    pub sup_error: f64,
    pub l2_error: f64,
    pub report: MinimizeReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub reference: String,
    pub norm: Norm,
    pub points: Vec<SweepPoint>,
    pub fit: FitOutcome,
}

impl SweepResult {
    pub fn epsilons(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eps).collect()
    }
    /// Errors in the sweep's norm.
    pub fn errors(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| match self.norm {
                Norm::Sup => p.sup_error,
                Norm::L2 => p.l2_error,
            })
            .collect()
    }
}

/// Solves at one `eps` and measures the distance to `reference`.
pub fn sweep_point(problem: &WideProblem, eps: f64, reference: &ReferenceSolution) -> Result<SweepPoint> {
    let solved = solve_at(problem, eps)?;
    let target = reference.sample(problem.grid());
    if target.dim() != solved.0.dim() {
        return Err(WideError::ShapeMismatch("reference dimension differs from the problem".into()));
    }
    let (sup_error, l2_error) = distances(&solved.0, &target);
    Ok(SweepPoint { eps, sup_error, l2_error, report: solved.1 })
}

/// Minimizer at `eps`, with failures reported as [`WideError::SolveFailed`].
pub fn solve_at(problem: &WideProblem, eps: f64) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    let fail = |e: WideError| WideError::SolveFailed { eps, reason: e.to_string() };
    let w = make_weights(eps, problem.grid()).map_err(fail)?;
    minimize(problem, &w, None).map_err(fail)
}

/// Checks the schedule and fits the sweep's errors.
pub fn assemble_sweep(reference: &str, norm: Norm, points: Vec<SweepPoint>) -> Result<SweepResult> {
    if points.len() < 3 {
        return Err(WideError::InsufficientSweep { need: 3, got: points.len() });
    }
    if points.windows(2).any(|p| !(p[1].eps < p[0].eps)) {
        return Err(WideError::InvalidParams("epsilons must be strictly decreasing".into()));
    }
    let mut r = SweepResult { reference: reference.to_string(), norm, points, fit: FitOutcome::Exact };
    r.fit = fit_exponent(&r.epsilons(), &r.errors())?;
    Ok(r)
}

/// Sequential sweep over a strictly decreasing `eps` schedule.
pub fn sweep(
    problem: &WideProblem,
    epsilons: &[f64],
    reference: &ReferenceSolution,
    norm: Norm,
) -> Result<SweepResult> {
    if epsilons.len() < 3 {
        return Err(WideError::InsufficientSweep { need: 3, got: epsilons.len() });
    }
    let points = epsilons.iter().map(|&e| sweep_point(problem, e, reference)).collect::<Result<Vec<_>>>()?;
    assemble_sweep(reference.name(), norm, points)
}

/// Exact minimizer of the scalar first-order quadratic problem
/// `E = lambda u^2 / 2`, `D = nu v^2 / 2` with unit energy factor.
///
/// The interior stationarity rows have solutions `z^j` with `z = 1 + delta`
/// and `nu eps delta^2 - (nu tau + lambda tau^2) delta - lambda tau^2 = 0`;
/// the solution is `u_j = A z1^j + B z2^(j-N)` with `u_0 = u0` and
/// `u_N = u_{N-1}`. Evaluation is `O(1)` per node, so grids far beyond the
/// reach of a banded solve are accessible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLinearMinimizer {
    steps: usize,
    log_z1: f64,
    log_z2: f64,
    a: f64,
    b: f64,
}

impl ScalarLinearMinimizer {
    pub fn new(lambda: f64, nu: f64, eps: f64, grid: &TimeGrid, u0: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(WideError::NonPositiveEpsilon(eps));
        }
        if !(nu > 0.0) || !(lambda >= 0.0) {
            return Err(WideError::InvalidParams(format!("need nu > 0 and lambda >= 0, got {nu}, {lambda}")));
        }
        let tau = grid.tau();
        let n = grid.steps();
        let b = nu * tau + lambda * tau * tau;
        let root = math::sqrt(b * b + 4.0 * nu * eps * lambda * tau * tau);
        let d_minus = -2.0 * lambda * tau * tau / (b + root);
        let d_plus = (b + root) / (2.0 * nu * eps);
        let log_z1 = math::ln_1p(d_minus);
        let log_z2 = math::ln_1p(d_plus);
        // u_N = u_{N-1}: B = -A z1^(N-1) d- (1 + d+) / d+
        let c = -math::exp((n - 1) as f64 * log_z1) * d_minus * (1.0 + d_plus) / d_plus;
        let a = u0 / (1.0 + c * math::exp(-(n as f64) * log_z2));
        Ok(ScalarLinearMinimizer { steps: n, log_z1, log_z2, a, b: a * c })
    }

    /// Nodes before `N` on which the final layer `B z2^(j-N)` exceeds roundoff.
    pub fn layer_width(&self) -> usize {
        let w = 40.0 / self.log_z2;
        if w >= self.steps as f64 {
            self.steps
        } else {
            w as usize + 1
        }
    }

    pub fn value(&self, j: usize) -> f64 {
        let back = j as f64 - self.steps as f64;
        self.a * math::exp(j as f64 * self.log_z1) + self.b * math::exp(back * self.log_z2)
    }
}

/// How `tau` follows `eps` in a rate study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauCoupling {
    Fixed(f64),
    /// `tau = eps^2`, so the time discretization error is subdominant.
    Squared,
}

impl TauCoupling {
    pub fn tau(&self, eps: f64) -> f64 {
        match *self {
            TauCoupling::Fixed(t) => t,
            TauCoupling::Squared => eps * eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub eps: f64,
    pub tau: f64,
    pub steps: usize,
    pub sup_error: f64,
}

/// Sup-norm convergence of `u^eps` to the causal solution against the
/// theoretical rate `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub fit: FitOutcome,
    pub target: f64,
}

impl RateReport {
    /// Exact agreement, or a fitted rate of at least `floor`.
    pub fn meets(&self, floor: f64) -> bool {
        match self.fit {
            FitOutcome::Exact => true,
            FitOutcome::Fitted { exponent, .. } => exponent >= floor,
        }
    }
}

/// Rate study for the scalar family `nu u_t + lambda u = 0`, `u(0) = u0`,
/// whose causal solution is `u0 exp(-lambda t / nu)`.
///
/// Every node of the final layer is visited; on very fine grids the smooth
/// bulk is sampled at about `2^20` evenly spaced nodes.
pub fn rate_report(
    lambda: f64,
    nu: f64,
    horizon: f64,
    u0: f64,
    epsilons: &[f64],
    coupling: TauCoupling,
) -> Result<RateReport> {
    if epsilons.len() < 3 {
        return Err(WideError::InsufficientSweep { need: 3, got: epsilons.len() });
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let grid = TimeGrid::with_step(horizon, coupling.tau(eps))?;
        let sol = ScalarLinearMinimizer::new(lambda, nu, eps, &grid, u0)
            .map_err(|e| WideError::SolveFailed { eps, reason: e.to_string() })?;
        let err_at = |j: usize| (sol.value(j) - u0 * math::exp(-lambda * grid.t(j) / nu)).abs();
        let n = grid.steps();
        let layer = sol.layer_width().min(n);
        let bulk = n - layer;
        let stride = (bulk >> 20).max(1);
        let mut err: f64 = 0.0;
        for j in (0..bulk).step_by(stride).chain(bulk.saturating_sub(1)..n) {
            err = err.max(err_at(j));
        }
        rows.push(RateRow { eps, tau: grid.tau(), steps: grid.steps(), sup_error: err });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    Ok(RateReport { rows, fit: fit_exponent(&eps, &errs)?, target: 0.5 })
}

/// Time profile of a load perturbation supported in `(split, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationShape {
    /// Jumps to full amplitude right after `split`.
    Step,
    /// Grows linearly from zero at `split` to full amplitude at `T`.
    Ramp,
}

/// Largest change of `u^eps` on `[0, split]` per unit of a load perturbation
/// of size `amplitude` supported in `(split, T]`.
///
/// A step in the load kinks the causal solution, and the minimizer sees the
/// kink `eps`-early, so a step gives sensitivity of order `eps`; a ramp gives
/// order `eps^2`.
pub fn forcing_sensitivity(
    problem: &WideProblem,
    eps: f64,
    split: f64,
    amplitude: f64,
    shape: PerturbationShape,
) -> Result<f64> {
    let base = solve_at(problem, eps)?.0;
    let energy = problem.energy().clone();
    let original = energy.forcing().cloned();
    let d = problem.dim();
    let horizon = problem.grid().horizon();
    let perturbed = energy.with_forcing(Forcing::new(move |t, out| {
        match &original {
            Some(f) => f.eval(t, out),
            None => out.iter_mut().for_each(|x| *x = 0.0),
        }
        if t > split {
            let size = match shape {
                PerturbationShape::Step => amplitude,
                PerturbationShape::Ramp => amplitude * (t - split) / (horizon - split),
            };
            out.iter_mut().for_each(|x| *x += size);
        }
    }));
    let moved = solve_at(&problem.with_energy(perturbed)?, eps)?.0;
    let grid = problem.grid();
    let mut worst: f64 = 0.0;
    let mut a = vec![0.0; d];
    for i in 0..grid.nodes() {
        if grid.t(i) > split {
            break;
        }
        a.copy_from_slice(moved.node(i));
        for k in 0..d {
            worst = worst.max((a[k] - base.node(i)[k]).abs());
        }
    }
    Ok(worst / amplitude.abs())
}
