//! Causal reference solvers and closed-form solutions.

use crate::dissipation::DissipationModel;
use crate::energy::EnergyModel;
use crate::error::{Result, WideError};
use crate::grid::TimeGrid;
use crate::math;
use crate::pde::SpatialMesh;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Where a reference solution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    ImplicitEuler,
    Incremental,
    Leapfrog,
    Quasistatic,
}

type Evaluator = dyn Fn(f64, &mut [f64]) + Send + Sync;

#[derive(Clone)]
enum Repr {
    Discrete(DiscreteTrajectory),
    Analytic(Arc<Evaluator>),
}

/// A trajectory or closed-form evaluator used as ground truth.
#[derive(Clone)]
pub struct ReferenceSolution {
    name: String,
    provenance: Provenance,
    dim: usize,
    repr: Repr,
    step_residual: f64,
}

impl core::fmt::Debug for ReferenceSolution {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ReferenceSolution")
            .field("name", &self.name)
            .field("provenance", &self.provenance)
            .field("dim", &self.dim)
            .field("step_residual", &self.step_residual)
            .finish()
    }
}

impl ReferenceSolution {
    pub fn analytic(name: &str, dim: usize, f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        ReferenceSolution {
            name: name.to_string(),
            provenance: Provenance::Analytic,
            dim,
            repr: Repr::Analytic(Arc::new(f)),
            step_residual: 0.0,
        }
    }

    pub fn discrete(name: &str, provenance: Provenance, trajectory: DiscreteTrajectory, step_residual: f64) -> Self {
        ReferenceSolution {
            name: name.to_string(),
            provenance,
            dim: trajectory.dim(),
            repr: Repr::Discrete(trajectory),
            step_residual,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn trajectory(&self) -> Option<&DiscreteTrajectory> {
        match &self.repr {
            Repr::Discrete(u) => Some(u),
            Repr::Analytic(_) => None,
        }
    }
    /// Largest per-step optimality residual reached by a stepping oracle.
    pub fn step_residual(&self) -> f64 {
        self.step_residual
    }

    /// Value at `t`; discrete references interpolate linearly and clamp to
    /// their horizon.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        match &self.repr {
            Repr::Analytic(f) => f(t, out),
            Repr::Discrete(u) => {
                let g = u.grid();
                let s = (t / g.tau()).clamp(0.0, g.steps() as f64);
                let i = (math::floor(s) as usize).min(g.steps() - 1);
                let th = s - i as f64;
                let (a, b) = (u.node(i), u.node(i + 1));
                for k in 0..out.len() {
                    out[k] = (1.0 - th) * a[k] + th * b[k];
                }
            }
        }
    }

    /// Values on `grid`; a discrete reference on the same grid is returned
    /// unchanged.
    pub fn sample(&self, grid: &TimeGrid) -> DiscreteTrajectory {
        if let Repr::Discrete(u) = &self.repr {
            if u.grid() == grid {
                return u.clone();
            }
        }
        DiscreteTrajectory::sample(*grid, self.dim, |t, out| self.eval(t, out))
    }
}

/// Damped Newton for a small smooth minimization in `R^d`.
fn minimize_dense(
    x: &mut [f64],
    value: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64], &mut [f64]),
    hess: &dyn Fn(&[f64]) -> Vec<f64>,
    tol: f64,
) -> Option<f64> {
    let d = x.len();
    let mut g = vec![0.0; d];
    let mut gt = vec![0.0; d];
    let mut trial = vec![0.0; d];
    for _ in 0..200 {
        grad(x, &mut g);
        let gn = math::max_abs(&g);
        if !gn.is_finite() {
            return None;
        }
        if gn <= tol {
            return Some(gn);
        }
        let h = hess(x);
        let hmax = math::max_abs(&h).max(1e-300);
        let mut mu = 0.0;
        let mut dir = vec![0.0; d];
        let mut ok = false;
        for _ in 0..60 {
            let mut a = h.clone();
            (0..d).for_each(|i| a[i * d + i] += mu);
            dir.iter_mut().zip(&g).for_each(|(p, q)| *p = -q);
            if math::dense_solve(&mut a, &mut dir, d) && math::dot(&dir, &g) < 0.0 {
                ok = true;
                break;
            }
            mu = (10.0 * mu).max(1e-8 * (hmax + gn));
        }
        if !ok {
            return None;
        }
        let f0 = value(x);
        let slope = math::dot(&dir, &g);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            for i in 0..d {
                trial[i] = x[i] + alpha * dir[i];
            }
            let ft = value(&trial);
            if ft.is_finite() {
                let armijo = ft <= f0 + 1e-4 * alpha * slope;
                grad(&trial, &mut gt);
                if armijo || (ft <= f0 + 1e-13 * f0.abs() && math::max_abs(&gt) < gn) {
                    x.copy_from_slice(&trial);
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            return (gn <= 1e3 * tol).then_some(gn);
        }
    }
    grad(x, &mut g);
    let gn = math::max_abs(&g);
    (gn <= tol).then_some(gn)
}

/// Scalar root of an increasing function, by bracketing from `x0` towards
/// `dir` and bisection to full precision.
fn increasing_root(f: &dyn Fn(f64) -> f64, x0: f64, dir: f64, scale: f64) -> Option<f64> {
    let mut step = scale.max(1e-300);
    let (mut lo, mut hi);
    let mut inner = x0;
    loop {
        let outer = x0 + dir * step;
        let v = f(outer);
        if !v.is_finite() {
            return None;
        }
        if (dir > 0.0 && v >= 0.0) || (dir < 0.0 && v <= 0.0) {
            if dir > 0.0 {
                lo = inner;
                hi = outer;
            } else {
                lo = outer;
                hi = inner;
            }
            break;
        }
        inner = outer;
        step *= 2.0;
        if step > 1e300 {
            return None;
        }
    }
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(if f(hi).abs() < f(lo).abs() { hi } else { lo })
}

fn require_first_order_quadratic(problem: &WideProblem) -> Result<f64> {
    if problem.rho() != 0.0 {
        return Err(WideError::WrongRegime("first-order problem (rho = 0)"));
    }
    match *problem.dissipation() {
        DissipationModel::Quadratic { nu } if nu > 0.0 => Ok(nu),
        _ => Err(WideError::WrongRegime("quadratic dissipation with nu > 0")),
    }
}

/// Implicit Euler `nu (u_i - u_{i-1})/tau + grad E(u_i) = f_i`, each step
/// solved by damped Newton.
pub fn implicit_euler(problem: &WideProblem) -> Result<ReferenceSolution> {
    let nu = require_first_order_quadratic(problem)?;
    let grid = *problem.grid();
    let tau = grid.tau();
    let d = problem.dim();
    let energy = problem.energy();
    let mut values = vec![0.0; grid.nodes() * d];
    values[..d].copy_from_slice(problem.u0());
    let mut f = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for i in 1..grid.nodes() {
        energy.load(grid.t(i), &mut f);
        let prev = values[(i - 1) * d..i * d].to_vec();
        let c = nu / tau;
        let value = |u: &[f64]| {
            let mut s = energy.value(u) - math::dot(&f, u);
            for k in 0..d {
                s += 0.5 * c * (u[k] - prev[k]) * (u[k] - prev[k]);
            }
            s
        };
        let grad = |u: &[f64], out: &mut [f64]| {
            energy.gradient(u, out);
            for k in 0..d {
                out[k] += c * (u[k] - prev[k]) - f[k];
            }
        };
        let hess = |u: &[f64]| {
            let mut h = energy.hessian_dense(u);
            (0..d).for_each(|k| h[k * d + k] += c);
            h
        };
        let mut g0 = vec![0.0; d];
        energy.gradient(&prev, &mut g0);
        let tol = 1e-13 * (1.0 + c * math::max_abs(&prev) + math::max_abs(&f) + math::max_abs(&g0));
        let mut x = prev.clone();
        let res = minimize_dense(&mut x, &value, &grad, &hess, tol).ok_or(WideError::StepNewtonFailure { step: i })?;
        worst = worst.max(res);
        values[i * d..(i + 1) * d].copy_from_slice(&x);
    }
    let u = DiscreteTrajectory::new(grid, d, values)?;
    Ok(ReferenceSolution::discrete("implicit_euler", Provenance::ImplicitEuler, u, worst))
}

/// Sequential minimization of the one-step functional
///
/// ```text
/// F_n(u) = rho/(2 tau^2) |u - 2u_{n-1} + u_{n-2}|^2 + tau D((u - u_{n-1})/tau) + E(u) - f_n.u
/// ```
///
/// whose stationarity is the multistep scheme. Nonsmooth scalar steps are
/// solved by monotone root finding on the two branches of the
/// subdifferential, vector steps by accelerated proximal gradient.
pub fn incremental_minimization(problem: &WideProblem) -> Result<ReferenceSolution> {
    let grid = *problem.grid();
    let (tau, d, rho) = (grid.tau(), problem.dim(), problem.rho());
    let energy = problem.energy();
    let diss = *problem.dissipation();
    let mut values = vec![0.0; grid.nodes() * d];
    let prefix = problem.prefix();
    values[..prefix.len()].copy_from_slice(&prefix);
    let mut f = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for n in problem.first_free()..grid.nodes() {
        energy.load(grid.t(n), &mut f);
        let a = values[(n - 1) * d..n * d].to_vec();
        let b = if rho > 0.0 { values[(n - 2) * d..(n - 1) * d].to_vec() } else { vec![0.0; d] };
        let step = Step { energy, diss, rho, tau, a: &a, b: &b, f: &f };
        let (x, res) = step.solve().ok_or(WideError::StepMinimizationFailure { step: n })?;
        worst = worst.max(res);
        values[n * d..(n + 1) * d].copy_from_slice(&x);
    }
    let u = DiscreteTrajectory::new(grid, d, values)?;
    Ok(ReferenceSolution::discrete("incremental", Provenance::Incremental, u, worst))
}

struct Step<'a> {
    energy: &'a EnergyModel,
    diss: DissipationModel,
    rho: f64,
    tau: f64,
    a: &'a [f64],
    b: &'a [f64],
    f: &'a [f64],
}

impl Step<'_> {
    fn inertia(&self, u: &[f64], k: usize) -> f64 {
        self.rho * (u[k] - 2.0 * self.a[k] + self.b[k]) / (self.tau * self.tau)
    }

    /// Gradient of the smooth part (inertia, energy, load).
    fn smooth_gradient(&self, u: &[f64], out: &mut [f64]) {
        self.energy.gradient(u, out);
        for k in 0..u.len() {
            out[k] += self.inertia(u, k) - self.f[k];
        }
    }

    fn smooth_value(&self, u: &[f64]) -> f64 {
        let mut s = self.energy.value(u) - math::dot(self.f, u);
        for k in 0..u.len() {
            let x = u[k] - 2.0 * self.a[k] + self.b[k];
            s += 0.5 * self.rho * x * x / (self.tau * self.tau);
        }
        s
    }

    fn scale(&self) -> f64 {
        let d = self.a.len();
        let mut g = vec![0.0; d];
        self.smooth_gradient(self.a, &mut g);
        1.0 + math::max_abs(&g) + self.rho * math::max_abs(self.a) / (self.tau * self.tau)
    }

    /// Distance of `-grad S(u)` from `partial D(du)`, sup over components.
    fn inclusion(&self, u: &[f64]) -> f64 {
        let mut g = vec![0.0; u.len()];
        self.smooth_gradient(u, &mut g);
        (0..u.len()).map(|k| self.diss.subgradient((u[k] - self.a[k]) / self.tau).distance(-g[k])).fold(0.0, f64::max)
    }

    fn solve(&self) -> Option<(Vec<f64>, f64)> {
        let d = self.a.len();
        let tol = 1e-12 * self.scale();
        let mut x = self.a.to_vec();
        if self.diss.is_smooth() {
            let tau = self.tau;
            let value = |u: &[f64]| {
                let mut s = self.smooth_value(u);
                for k in 0..d {
                    s += tau * self.diss.phi((u[k] - self.a[k]) / tau);
                }
                s
            };
            let grad = |u: &[f64], out: &mut [f64]| {
                self.smooth_gradient(u, out);
                for k in 0..d {
                    out[k] += self.diss.dphi((u[k] - self.a[k]) / tau);
                }
            };
            let hess = |u: &[f64]| {
                let mut h = self.energy.hessian_dense(u);
                for k in 0..d {
                    h[k * d + k] += self.rho / (tau * tau) + self.diss.d2phi((u[k] - self.a[k]) / tau) / tau;
                }
                h
            };
            let res = minimize_dense(&mut x, &value, &grad, &hess, tol)?;
            return Some((x, res));
        }
        if d == 1 {
            self.solve_scalar()
        } else {
            self.solve_split(x, tol)
        }
    }

    fn solve_scalar(&self) -> Option<(Vec<f64>, f64)> {
        let a = self.a[0];
        let tau = self.tau;
        let h = |u: f64| {
            let mut g = [0.0];
            self.smooth_gradient(&[u], &mut g);
            g[0]
        };
        let scale = tau * (1.0 + a.abs());
        let u = match self.diss {
            DissipationModel::OneHomogeneous { alpha } => {
                let h0 = h(a);
                if h0.abs() <= alpha {
                    a
                } else if h0 > alpha {
                    increasing_root(&|u| h(u) - alpha, a, -1.0, scale)?
                } else {
                    increasing_root(&|u| h(u) + alpha, a, 1.0, scale)?
                }
            }
            diss => {
                let g = |u: f64| h(u) + diss.dphi((u - a) / tau);
                let g0 = g(a);
                if g0 == 0.0 {
                    a
                } else {
                    increasing_root(&g, a, -g0.signum(), scale)?
                }
            }
        };
        let x = vec![u];
        let res = self.inclusion(&x);
        Some((x, res))
    }

    /// Accelerated proximal gradient with backtracking and adaptive restart.
    fn solve_split(&self, mut x: Vec<f64>, tol: f64) -> Option<(Vec<f64>, f64)> {
        let d = x.len();
        let tau = self.tau;
        let prox = |z: &mut [f64], s: f64| {
            for k in 0..d {
                z[k] = self.a[k] + tau * self.diss.prox_scalar((z[k] - self.a[k]) / tau, s / tau);
            }
        };
        let h0 = self.energy.hessian_dense(self.a);
        let gersh = (0..d).map(|i| h0[i * d..(i + 1) * d].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut lip = (self.rho / (tau * tau) + gersh).max(1e-12);
        let mut y = x.clone();
        let mut t = 1.0_f64;
        let mut gy = vec![0.0; d];
        let mut z = vec![0.0; d];
        for _ in 0..200_000 {
            self.smooth_gradient(&y, &mut gy);
            let fy = self.smooth_value(&y);
            loop {
                for k in 0..d {
                    z[k] = y[k] - gy[k] / lip;
                }
                prox(&mut z, 1.0 / lip);
                let mut q = fy;
                for k in 0..d {
                    q += gy[k] * (z[k] - y[k]) + 0.5 * lip * (z[k] - y[k]) * (z[k] - y[k]);
                }
                if self.smooth_value(&z) <= q + 1e-14 * fy.abs() || lip > 1e300 {
                    break;
                }
                lip *= 2.0;
            }
            let moved: f64 = (0..d).map(|k| (z[k] - y[k]).abs()).fold(0.0, f64::max);
            if lip * moved <= tol {
                let res = self.inclusion(&z).min(lip * moved);
                return Some((z, res));
            }
            let t_next = 0.5 * (1.0 + math::sqrt(1.0 + 4.0 * t * t));
            let restart = (0..d).map(|k| (y[k] - z[k]) * (z[k] - x[k])).sum::<f64>() > 0.0;
            let beta = if restart { 0.0 } else { (t - 1.0) / t_next };
            for k in 0..d {
                y[k] = z[k] + beta * (z[k] - x[k]);
            }
            x.copy_from_slice(&z);
            t = if restart { 1.0 } else { t_next };
        }
        None
    }
}

/// Central-difference stepping of `rho u_tt + nu u_t + grad E(u) = f`,
/// started by a second-order Taylor step.
pub fn leapfrog_wave(problem: &WideProblem) -> Result<ReferenceSolution> {
    let rho = problem.rho();
    if rho <= 0.0 {
        return Err(WideError::WrongRegime("second-order problem (rho > 0)"));
    }
    let nu = match *problem.dissipation() {
        DissipationModel::Quadratic { nu } => nu,
        _ => return Err(WideError::WrongRegime("linear or no damping")),
    };
    let grid = *problem.grid();
    let (tau, d) = (grid.tau(), problem.dim());
    let energy = problem.energy();
    let u0 = problem.u0();
    let u1 = problem.u1().expect("validated: rho > 0 carries u1");
    let h = energy.hessian_dense(u0);
    let gersh = (0..d).map(|i| h[i * d..(i + 1) * d].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let omega = math::sqrt(gersh / rho);
    if tau * omega > 1.0 {
        return Err(WideError::StabilityViolation { tau, limit: 1.0 / omega });
    }
    let mut values = vec![0.0; grid.nodes() * d];
    let mut g = vec![0.0; d];
    let mut f = vec![0.0; d];
    energy.gradient(u0, &mut g);
    energy.load(0.0, &mut f);
    values[..d].copy_from_slice(u0);
    for k in 0..d {
        let acc = (f[k] - g[k] - nu * u1[k]) / rho;
        values[d + k] = u0[k] + tau * u1[k] + 0.5 * tau * tau * acc;
    }
    let lhs = rho / (tau * tau) + nu / (2.0 * tau);
    for n in 1..grid.steps() {
        let (done, rest) = values.split_at_mut((n + 1) * d);
        let cur = &done[n * d..];
        let prev = &done[(n - 1) * d..n * d];
        energy.gradient(cur, &mut g);
        energy.load(grid.t(n), &mut f);
        for k in 0..d {
            let rhs = f[k] - g[k] + rho * (2.0 * cur[k] - prev[k]) / (tau * tau) + nu * prev[k] / (2.0 * tau);
            rest[k] = rhs / lhs;
        }
    }
    let u = DiscreteTrajectory::new(grid, d, values)?;
    Ok(ReferenceSolution::discrete("leapfrog", Provenance::Leapfrog, u, 0.0))
}

/// Nodewise minimization of `E(u) - f_i.u`, warm started from the previous
/// node.
pub fn solve_quasistatic(energy: &EnergyModel, grid: &TimeGrid) -> Result<ReferenceSolution> {
    let d = energy.dim();
    let mut values = vec![0.0; grid.nodes() * d];
    let mut x = vec![0.0; d];
    let mut f = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for i in 0..grid.nodes() {
        energy.load(grid.t(i), &mut f);
        let value = |u: &[f64]| energy.value(u) - math::dot(&f, u);
        let grad = |u: &[f64], out: &mut [f64]| {
            energy.gradient(u, out);
            out.iter_mut().zip(&f).for_each(|(o, fk)| *o -= fk);
        };
        let hess = |u: &[f64]| energy.hessian_dense(u);
        let tol = 1e-10 * (1.0 + math::max_abs(&f));
        let res =
            minimize_dense(&mut x, &value, &grad, &hess, tol).ok_or(WideError::NodeMinimizationFailure { node: i })?;
        worst = worst.max(res);
        values[i * d..(i + 1) * d].copy_from_slice(&x);
    }
    let u = DiscreteTrajectory::new(*grid, d, values)?;
    Ok(ReferenceSolution::discrete("quasistatic", Provenance::Quasistatic, u, worst))
}

/// Exact minimizer of the continuous first-order linear problem
/// `-eps nu u'' + nu u' + lambda u = 0`, `u(0) = u0`, `u'(T) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WideLinearBvp {
    pub lambda: f64,
    pub nu: f64,
    pub eps: f64,
    pub horizon: f64,
    pub u0: f64,
    r_minus: f64,
    r_plus: f64,
    a: f64,
    b: f64,
}

impl WideLinearBvp {
    pub fn new(lambda: f64, nu: f64, eps: f64, horizon: f64, u0: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(WideError::NonPositiveEpsilon(eps));
        }
        if !(nu > 0.0) || !(horizon > 0.0) {
            return Err(WideError::InvalidParams(format!("need nu > 0 and T > 0, got nu = {nu}, T = {horizon}")));
        }
        let disc = 1.0 + 4.0 * eps * lambda / nu;
        if !(disc > 0.0) {
            return Err(WideError::InvalidParams(format!(
                "4 eps lambda / nu = {} < -1 gives oscillatory roots",
                disc - 1.0
            )));
        }
        let s = math::sqrt(disc);
        let r_minus = -2.0 * lambda / (nu * (1.0 + s));
        let r_plus = (1.0 + s) / (2.0 * eps);
        // u = a e^{r- t} + b e^{r+ (t - T)}, u(0) = u0, u'(T) = 0
        let ratio = r_minus / r_plus * math::exp(r_minus * horizon);
        let a = u0 / (1.0 - ratio * math::exp(-r_plus * horizon));
        let b = -a * ratio;
        Ok(WideLinearBvp { lambda, nu, eps, horizon, u0, r_minus, r_plus, a, b })
    }

    /// Characteristic roots `(r-, r+)`.
    pub fn roots(&self) -> (f64, f64) {
        (self.r_minus, self.r_plus)
    }
    pub fn value(&self, t: f64) -> f64 {
        self.a * math::exp(self.r_minus * t) + self.b * math::exp(self.r_plus * (t - self.horizon))
    }
    pub fn derivative(&self, t: f64) -> f64 {
        self.a * self.r_minus * math::exp(self.r_minus * t)
            + self.b * self.r_plus * math::exp(self.r_plus * (t - self.horizon))
    }
    pub fn second_derivative(&self, t: f64) -> f64 {
        self.a * self.r_minus * self.r_minus * math::exp(self.r_minus * t)
            + self.b * self.r_plus * self.r_plus * math::exp(self.r_plus * (t - self.horizon))
    }
}

/// Named closed-form solutions.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogueEntry {
    /// `u0 e^{-lambda t}` for `u_t + lambda u = 0`.
    ExpDecay {
        lambda: f64,
        u0: f64,
    },
    /// `rho u_tt + lambda u = 0` with data `(u0, u1)`.
    Harmonic {
        rho: f64,
        lambda: f64,
        u0: f64,
        u1: f64,
    },
    /// Semidiscrete heat mode `e^{-mu_k t} sin(k pi x/L)` on the mesh.
    HeatMode {
        k: usize,
        mesh: SpatialMesh,
    },
    /// Semidiscrete standing wave `cos(sqrt(mu_k) t) sin(k pi x/L)`.
    WaveMode {
        k: usize,
        mesh: SpatialMesh,
    },
    /// `t^2`, the causal limit of the selection example.
    SelectionT2,
    /// `(t - alpha)^+`, the play operator for `E = u^2/2 - t u`, `u0 = 0`.
    Play {
        alpha: f64,
    },
    WideLinearBvp(WideLinearBvp),
}

impl CatalogueEntry {
    /// Parses `name` with positional parameters:
    /// `exp_decay [lambda, u0=1]`, `harmonic [rho, lambda, u0, u1]`,
    /// `heat_mode [k, L, M]`, `wave_mode [k, L, M]`, `selection_t2 []`,
    /// `play [alpha]`, `wide_linear_bvp [lambda, nu, eps, T, u0=1]`.
    pub fn parse(name: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if params.len() < n {
                Err(WideError::InvalidParams(format!("{name} needs {n} parameters, got {}", params.len())))
            } else {
                Ok(())
            }
        };
        let index = |x: f64| -> Result<usize> {
            if x >= 1.0 && x == math::floor(x) {
                Ok(x as usize)
            } else {
                Err(WideError::InvalidParams(format!("{x} is not a positive integer")))
            }
        };
        Ok(match name {
            "exp_decay" => {
                need(1)?;
                CatalogueEntry::ExpDecay { lambda: params[0], u0: params.get(1).copied().unwrap_or(1.0) }
            }
            "harmonic" => {
                need(4)?;
                if !(params[0] > 0.0) || !(params[1] > 0.0) {
                    return Err(WideError::InvalidParams("harmonic needs rho > 0 and lambda > 0".into()));
                }
                CatalogueEntry::Harmonic { rho: params[0], lambda: params[1], u0: params[2], u1: params[3] }
            }
            "heat_mode" | "wave_mode" => {
                need(3)?;
                let k = index(params[0])?;
                let mesh = SpatialMesh::new(params[1], index(params[2])?)?;
                if k > mesh.points() {
                    return Err(WideError::ModeOutOfRange { k, m: mesh.points() });
                }
                if name == "heat_mode" {
                    CatalogueEntry::HeatMode { k, mesh }
                } else {
                    CatalogueEntry::WaveMode { k, mesh }
                }
            }
            "selection_t2" => CatalogueEntry::SelectionT2,
            "play" => {
                need(1)?;
                CatalogueEntry::Play { alpha: params[0] }
            }
            "wide_linear_bvp" => {
                need(4)?;
                let u0 = params.get(4).copied().unwrap_or(1.0);
                CatalogueEntry::WideLinearBvp(WideLinearBvp::new(params[0], params[1], params[2], params[3], u0)?)
            }
            other => return Err(WideError::UnknownEntry(other.to_string())),
        })
    }

    pub fn reference(&self) -> ReferenceSolution {
        match *self {
            CatalogueEntry::ExpDecay { lambda, u0 } => {
                ReferenceSolution::analytic("exp_decay", 1, move |t, o| o[0] = u0 * math::exp(-lambda * t))
            }
            CatalogueEntry::Harmonic { rho, lambda, u0, u1 } => {
                let w = math::sqrt(lambda / rho);
                ReferenceSolution::analytic("harmonic", 1, move |t, o| {
                    o[0] = u0 * math::cos(w * t) + u1 / w * math::sin(w * t)
                })
            }
            CatalogueEntry::HeatMode { k, mesh } => {
                let mu = mesh.eigenvalue(k);
                let shape = mode_shape(&mesh, k);
                ReferenceSolution::analytic("heat_mode", mesh.points(), move |t, o| {
                    let a = math::exp(-mu * t);
                    o.iter_mut().zip(&shape).for_each(|(x, s)| *x = a * s);
                })
            }
            CatalogueEntry::WaveMode { k, mesh } => {
                let w = math::sqrt(mesh.eigenvalue(k));
                let shape = mode_shape(&mesh, k);
                ReferenceSolution::analytic("wave_mode", mesh.points(), move |t, o| {
                    let a = math::cos(w * t);
                    o.iter_mut().zip(&shape).for_each(|(x, s)| *x = a * s);
                })
            }
            CatalogueEntry::SelectionT2 => ReferenceSolution::analytic("selection_t2", 1, |t, o| o[0] = t * t),
            CatalogueEntry::Play { alpha } => {
                ReferenceSolution::analytic("play", 1, move |t, o| o[0] = (t - alpha).max(0.0))
            }
            CatalogueEntry::WideLinearBvp(bvp) => {
                ReferenceSolution::analytic("wide_linear_bvp", 1, move |t, o| o[0] = bvp.value(t))
            }
        }
    }
}

fn mode_shape(mesh: &SpatialMesh, k: usize) -> Vec<f64> {
    (0..mesh.points()).map(|j| math::sin(k as f64 * PI * mesh.x(j) / mesh.length())).collect()
}

/// Looks up a closed-form solution by name.
pub fn analytic_catalogue(name: &str, params: &[f64]) -> Result<ReferenceSolution> {
    Ok(CatalogueEntry::parse(name, params)?.reference())
}
