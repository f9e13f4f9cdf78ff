use super::newton::newton_core;
use super::{MinimizeReport, SolverKind};
use crate::error::{Result, WideError};
use crate::functional::Ctx;
use crate::math;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::WeightScheme;
use alloc::vec;
use alloc::vec::Vec;

const STAGE_ITER: usize = 40;
const MAX_NEWTON: usize = 5000;

/// Minimizer for nonsmooth dissipations (1-homogeneous or power law with
/// `p < 2`).
///
/// The potential is smoothed with width `delta`, and the smoothed problems
/// are solved by banded Newton while `delta` decreases geometrically. The
/// result then takes one proximal-gradient step in the velocities
/// `v_i = du_i`, which sets the sticking increments to exactly zero. It is
/// accepted once the proximal fixed-point residual
/// `L |v - prox_{D/L}(v - G(v)/L)|` is below `tol`.
/// `G` is the smooth force in the metric `diag(tau eps e_{i-1})`, and `L` is
/// its Lipschitz constant.
///
/// Plain proximal-gradient iterations in that metric do not converge
/// reliably: once the weights underflow, the late intervals are invisible to
/// any objective-based safeguard. Newton on the scaled residual treats every
/// node alike.
pub fn solve_prox(
    problem: &WideProblem,
    w: &WeightScheme,
    init: &DiscreteTrajectory,
    tol: Option<f64>,
) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    let s = Split::new(problem, w)?;
    if init.dim() != s.ctx.d || init.len() != problem.grid().nodes() {
        return Err(WideError::ShapeMismatch("initial trajectory does not match the problem".into()));
    }
    let mut u = init.clone();
    problem.impose_prefix(&mut u);
    let nodes = problem.grid().nodes() * s.ctx.d;
    let mut work = vec![0.0; nodes];
    let rest = s.velocities(problem.rest_trajectory().values());
    let mut g0 = vec![0.0; rest.len()];
    s.gradient(&rest, &mut work, &mut g0);
    let tol = tol.unwrap_or(1e-7 * (1.0 + math::max_abs(&g0)));

    let vscale = 1.0 + math::max_abs(&s.velocities(u.values()));
    let mut ctx = Ctx::new(problem, w)?;
    let mut iterations = 0;
    let mut delta = 0.1 * vscale;
    let mut factor: f64 = 0.5;
    let floor = 1e-10 * vscale;
    let (best, residual) = loop {
        ctx.smoothing = delta;
        let run = newton_core(&ctx, &u, None, STAGE_ITER)?;
        iterations += run.iterations;
        if delta <= 1e-3 * vscale && run.residual.is_finite() {
            let (v, r) = s.certify(run.u.values(), &mut work);
            if r <= tol {
                break (v, r);
            }
        }
        if run.residual <= 1e3 * run.tolerance {
            u = run.u;
            if delta <= floor {
                let (_, r) = s.certify(u.values(), &mut work);
                return Err(WideError::MaxIterations { iterations, residual: r });
            }
            factor = math::powf(factor, 1.25).max(0.1);
        } else {
            if factor > 0.95 || iterations > MAX_NEWTON {
                return Err(WideError::MaxIterations { iterations, residual: run.residual });
            }
            delta /= factor;
            factor = math::sqrt(factor);
        }
        delta = (delta * factor).max(floor);
    };
    let mut g = vec![0.0; best.len()];
    let u = s.trajectory(&best);
    let inclusion = s.inclusion(&best, &mut work, &mut g);
    let report = MinimizeReport {
        objective: s.ctx.objective(u.values()).0,
        iterations,
        residual,
        tolerance: tol,
        solver: SolverKind::ProxSplit,
        converged: true,
        inclusion: Some(inclusion),
    };
    Ok((u, report))
}

struct Split<'a> {
    ctx: Ctx<'a>,
    prefix: Vec<f64>,
    /// Fixed velocity before the first free interval (inertia only).
    v_fixed: Vec<f64>,
}

impl<'a> Split<'a> {
    fn new(p: &'a WideProblem, w: &'a WeightScheme) -> Result<Self> {
        let ctx = Ctx::new(p, w)?;
        let tau = ctx.tau;
        let prefix = p.prefix();
        let d = ctx.d;
        let v_fixed =
            if ctx.i0 == 2 { (0..d).map(|k| (prefix[d + k] - prefix[k]) / tau).collect() } else { vec![0.0; d] };
        Ok(Split { ctx, prefix, v_fixed })
    }

    fn velocities(&self, u: &[f64]) -> Vec<f64> {
        let (d, tau) = (self.ctx.d, self.ctx.tau);
        let mut v = Vec::with_capacity(self.ctx.free_len());
        for i in self.ctx.i0..=self.ctx.n {
            for k in 0..d {
                v.push((u[i * d + k] - u[(i - 1) * d + k]) / tau);
            }
        }
        v
    }

    fn fill(&self, v: &[f64], u: &mut [f64]) {
        let (d, tau, i0) = (self.ctx.d, self.ctx.tau, self.ctx.i0);
        u[..self.prefix.len()].copy_from_slice(&self.prefix);
        for i in i0..=self.ctx.n {
            for k in 0..d {
                u[i * d + k] = u[(i - 1) * d + k] + tau * v[(i - i0) * d + k];
            }
        }
    }

    fn trajectory(&self, v: &[f64]) -> DiscreteTrajectory {
        let mut u = self.ctx.p.rest_trajectory();
        self.fill(v, u.values_mut());
        u
    }

    /// Smooth-part gradient divided by the metric weights.
    fn gradient(&self, v: &[f64], u: &mut [f64], out: &mut [f64]) {
        self.fill(v, u);
        let c = &self.ctx;
        let (d, tau, eps, i0, n) = (c.d, c.tau, c.eps, c.i0, c.n);
        let q = c.w.ratio();
        let energy = c.p.energy();
        let mut h = vec![0.0; d];
        let mut acc = vec![0.0; d];
        let factor = tau * c.kappa / (eps + tau);
        // P_i = h_i + q P_{i+1}, h_N = 0
        for i in (i0..=n).rev() {
            if i < n {
                energy.gradient(&u[i * d..(i + 1) * d], &mut h);
                for k in 0..d {
                    acc[k] = h[k] - c.f[i * d + k] + q * acc[k];
                }
            }
            for k in 0..d {
                out[(i - i0) * d + k] = factor * acc[k];
            }
        }
        if c.rho > 0.0 {
            let t2 = tau * tau;
            for i in i0..=n {
                for k in 0..d {
                    let vi = v[(i - i0) * d + k];
                    let prev = if i > i0 { v[(i - 1 - i0) * d + k] } else { self.v_fixed[k] };
                    let mut g = c.rho * (eps + tau) * (vi - prev) / t2;
                    if i < n {
                        g -= c.rho * eps * (v[(i + 1 - i0) * d + k] - vi) / t2;
                    }
                    out[(i - i0) * d + k] += g;
                }
            }
        }
    }

    fn prox(&self, z: &mut [f64], s: f64) {
        let diss = self.ctx.p.dissipation();
        for x in z.iter_mut() {
            *x = diss.prox_scalar(*x, s);
        }
    }

    /// Power iteration on the linearized gradient map.
    fn lipschitz(&self, v: &[f64], u: &mut [f64]) -> f64 {
        let n = v.len();
        let mut g0 = vec![0.0; n];
        self.gradient(v, u, &mut g0);
        let mut z: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7919) % 13) as f64).collect();
        let mut gz = vec![0.0; n];
        let mut probe = vec![0.0; n];
        let mut est = 0.0;
        let vscale = 1.0 + math::max_abs(v);
        for _ in 0..60 {
            let nz = math::norm2(&z);
            if nz == 0.0 {
                break;
            }
            z.iter_mut().for_each(|x| *x /= nz);
            let h = 1e-6 * vscale;
            for i in 0..n {
                probe[i] = v[i] + h * z[i];
            }
            self.gradient(&probe, u, &mut gz);
            for i in 0..n {
                z[i] = (gz[i] - g0[i]) / h;
            }
            let new = math::norm2(&z);
            if (new - est).abs() <= 1e-3 * new {
                est = new;
                break;
            }
            est = new;
        }
        (1.1 * est).max(1e-12)
    }

    /// Best of `v` and its proximal-gradient update, with its residual.
    fn certify(&self, u: &[f64], work: &mut [f64]) -> (Vec<f64>, f64) {
        let v = self.velocities(u);
        let lip = self.lipschitz(&v, work);
        let mut g = vec![0.0; v.len()];
        let mut z = vec![0.0; v.len()];
        let res_v = self.fixed_point_residual(&v, lip, work, &mut g, &mut z);
        let polished = z.clone();
        let res_z = self.fixed_point_residual(&polished, lip, work, &mut g, &mut z);
        if res_z <= res_v {
            (polished, res_z)
        } else {
            (v, res_v)
        }
    }

    fn fixed_point_residual(&self, x: &[f64], lip: f64, u: &mut [f64], g: &mut [f64], z: &mut [f64]) -> f64 {
        self.gradient(x, u, g);
        for i in 0..x.len() {
            z[i] = x[i] - g[i] / lip;
        }
        self.prox(z, 1.0 / lip);
        lip * z.iter().zip(x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    fn inclusion(&self, x: &[f64], u: &mut [f64], g: &mut [f64]) -> f64 {
        self.gradient(x, u, g);
        let diss = self.ctx.p.dissipation();
        x.iter().zip(g.iter()).fold(0.0_f64, |m, (v, gi)| m.max(diss.subgradient(*v).distance(-gi)))
    }
}
