//! The discrete WIDE functional, its gradient and banded Hessian.
//!
//! Each term is weighted at the first node of its stencil:
//!
//! ```text
//! W(u) = sum_{i=2}^{N} tau e_{i-2} eps^2 rho/2 |d2u_i|^2
//!      + sum_{i=1}^{N} tau e_{i-1} eps D(du_i)
//!      + sum_{j=0}^{N-1} tau e_j c (E(u_j) - f_j.u_j)
//! ```
//!
//! with `du_i = (u_i - u_{i-1})/tau`, `d2u_i = (du_i - du_{i-1})/tau` and
//! energy factor `c`. Stationarity in `u_j` divided by `tau e_j` (the
//! "scaled residual") only involves the ratios `1, q^-1, q^-2` and therefore
//! stays representable when the weights underflow.

use crate::band::BandMatrix;
use crate::error::{Result, WideError};
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::WeightScheme;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Precomputed data for repeated evaluations on one problem.
pub(crate) struct Ctx<'a> {
    pub p: &'a WideProblem,
    pub w: &'a WeightScheme,
    pub f: Vec<f64>,
    pub d: usize,
    pub n: usize,
    pub i0: usize,
    pub tau: f64,
    pub eps: f64,
    pub kappa: f64,
    pub rho: f64,
    /// Smoothing width for nonsmooth dissipations (0 = exact).
    pub smoothing: f64,
}

impl<'a> Ctx<'a> {
    pub fn new(p: &'a WideProblem, w: &'a WeightScheme) -> Result<Self> {
        if w.weights().len() != p.grid().nodes() || (w.tau() - p.grid().tau()).abs() > 1e-15 * p.grid().tau() {
            return Err(WideError::ShapeMismatch(format!(
                "weights built for {} nodes, grid has {}",
                w.weights().len(),
                p.grid().nodes()
            )));
        }
        Ok(Ctx {
            p,
            w,
            f: p.forcing_nodes(),
            d: p.dim(),
            n: p.grid().steps(),
            i0: p.first_free(),
            tau: p.grid().tau(),
            eps: w.epsilon(),
            kappa: w.energy_factor(),
            rho: p.rho(),
            smoothing: 0.0,
        })
    }

    #[inline]
    pub fn free_len(&self) -> usize {
        (self.n + 1 - self.i0) * self.d
    }

    /// Position of `(node, component)` among the unknowns.
    #[inline]
    fn slot(&self, node: usize, k: usize) -> Option<usize> {
        (node >= self.i0).then(|| (node - self.i0) * self.d + k)
    }

    /// `tau e_j`, the factor between raw and scaled gradient rows.
    pub fn row_scale(&self, node: usize) -> f64 {
        self.tau * self.w.weight(node)
    }

    pub fn block_bandwidth(&self) -> usize {
        if self.rho > 0.0 {
            2
        } else {
            1
        }
    }

    /// Raw objective and the sum of absolute term values (a roundoff scale).
    pub fn objective(&self, u: &[f64]) -> (f64, f64) {
        let (d, tau, eps) = (self.d, self.tau, self.eps);
        let diss = self.p.dissipation();
        let e = self.w.weights();
        let (mut total, mut mag) = (0.0, 0.0);
        let mut add = |x: f64| {
            total += x;
            mag += x.abs();
        };
        for i in 1..=self.n {
            let mut s = 0.0;
            for k in 0..d {
                s += diss.phi_smoothed((u[i * d + k] - u[(i - 1) * d + k]) / tau, self.smoothing);
            }
            add(tau * e[i - 1] * eps * s);
        }
        if self.rho > 0.0 {
            for i in 2..=self.n {
                let mut s = 0.0;
                for k in 0..d {
                    let g = (u[i * d + k] - 2.0 * u[(i - 1) * d + k] + u[(i - 2) * d + k]) / (tau * tau);
                    s += g * g;
                }
                add(tau * e[i - 2] * eps * eps * self.rho * 0.5 * s);
            }
        }
        let energy = self.p.energy();
        for j in 0..self.n {
            let uj = &u[j * d..(j + 1) * d];
            let load = crate::math::dot(&self.f[j * d..(j + 1) * d], uj);
            add(tau * e[j] * self.kappa * (energy.value(uj) - load));
        }
        (total, mag)
    }

    /// Scaled stationarity residual `(dW/du_j) / (tau e_j)` at the free nodes.
    pub fn residual(&self, u: &[f64], out: &mut [f64]) {
        let (d, tau, eps) = (self.d, self.tau, self.eps);
        let diss = self.p.dissipation();
        out.iter_mut().for_each(|x| *x = 0.0);
        let c_here = (eps + tau) / tau;
        let c_next = eps / tau;
        for i in 1..=self.n {
            for k in 0..d {
                let dp = diss.dphi_smoothed((u[i * d + k] - u[(i - 1) * d + k]) / tau, self.smoothing);
                if let Some(r) = self.slot(i, k) {
                    out[r] += c_here * dp;
                }
                if let Some(r) = self.slot(i - 1, k) {
                    out[r] -= c_next * dp;
                }
            }
        }
        if self.rho > 0.0 {
            let t2 = tau * tau;
            let c = [
                self.rho * self.w.scaled(2, 2) / t2,
                -2.0 * self.rho * self.w.scaled(2, 1) / t2,
                self.rho * self.w.scaled(2, 0) / t2,
            ];
            for i in 2..=self.n {
                for k in 0..d {
                    let g = (u[i * d + k] - 2.0 * u[(i - 1) * d + k] + u[(i - 2) * d + k]) / t2;
                    for (back, ck) in c.iter().enumerate() {
                        if let Some(r) = self.slot(i - back, k) {
                            out[r] += ck * g;
                        }
                    }
                }
            }
        }
        let energy = self.p.energy();
        let mut g = vec![0.0; d];
        for j in self.i0..self.n {
            energy.gradient(&u[j * d..(j + 1) * d], &mut g);
            let base = (j - self.i0) * d;
            for k in 0..d {
                out[base + k] += self.kappa * (g[k] - self.f[j * d + k]);
            }
        }
    }

    /// Jacobian of the scaled residual. Similar to the symmetric Hessian
    /// through the positive row scaling `tau e_j`.
    pub fn jacobian(&self, u: &[f64]) -> BandMatrix {
        let (d, tau, eps) = (self.d, self.tau, self.eps);
        let bw = self.block_bandwidth() * d;
        let mut jac = BandMatrix::zeros(self.free_len(), bw, bw);
        let diss = self.p.dissipation();
        let a = [1.0 / tau, -1.0 / tau];
        let c = [(eps + tau) / tau, eps / tau];
        for i in 1..=self.n {
            for k in 0..d {
                let h = diss.d2phi_smoothed((u[i * d + k] - u[(i - 1) * d + k]) / tau, self.smoothing);
                if h == 0.0 {
                    continue;
                }
                for rb in 0..2 {
                    let Some(r) = self.slot(i - rb, k) else { continue };
                    for cb in 0..2 {
                        if let Some(col) = self.slot(i - cb, k) {
                            jac.add(r, col, c[rb] * h * a[cb] * if rb == 0 { 1.0 } else { -1.0 });
                        }
                    }
                }
            }
        }
        if self.rho > 0.0 {
            let t2 = tau * tau;
            let c = [self.rho * self.w.scaled(2, 2), self.rho * self.w.scaled(2, 1), self.rho * self.w.scaled(2, 0)];
            let b = [1.0 / t2, -2.0 / t2, 1.0 / t2];
            for i in 2..=self.n {
                for rb in 0..3 {
                    if i - rb < self.i0 {
                        continue;
                    }
                    for cb in 0..3 {
                        if i - cb < self.i0 {
                            continue;
                        }
                        let v = c[rb] * b[rb] * b[cb];
                        for k in 0..d {
                            let r = self.slot(i - rb, k).unwrap();
                            let col = self.slot(i - cb, k).unwrap();
                            jac.add(r, col, v);
                        }
                    }
                }
            }
        }
        let energy = self.p.energy();
        let kappa = self.kappa;
        for j in self.i0..self.n {
            let base = (j - self.i0) * d;
            energy.hessian_entries(&u[j * d..(j + 1) * d], &mut |r, col, v| {
                jac.add(base + r, base + col, kappa * v);
            });
        }
        jac
    }
}

fn require_smooth(p: &WideProblem) -> Result<()> {
    if p.dissipation().is_smooth() {
        Ok(())
    } else {
        Err(WideError::NonSmoothDissipation)
    }
}

/// Value of the discrete functional at a trajectory satisfying the initial data.
pub fn eval_functional(problem: &WideProblem, w: &WeightScheme, u: &DiscreteTrajectory) -> Result<f64> {
    problem.check_prefix(u)?;
    let ctx = Ctx::new(problem, w)?;
    let (v, _) = ctx.objective(u.values());
    if !v.is_finite() {
        return Err(WideError::NonFiniteValue);
    }
    Ok(v)
}

/// Gradient with respect to the free nodes `u_{i0}, ..., u_N`, node-major.
pub fn eval_gradient(problem: &WideProblem, w: &WeightScheme, u: &DiscreteTrajectory) -> Result<Vec<f64>> {
    require_smooth(problem)?;
    problem.check_prefix(u)?;
    let ctx = Ctx::new(problem, w)?;
    let mut g = vec![0.0; ctx.free_len()];
    ctx.residual(u.values(), &mut g);
    for (slot, x) in g.iter_mut().enumerate() {
        *x *= ctx.row_scale(ctx.i0 + slot / ctx.d);
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(WideError::NonFiniteValue);
    }
    Ok(g)
}

/// Scaled stationarity residual at the free nodes (gradient row `j` divided
/// by `tau e_j`).
pub fn scaled_residual(problem: &WideProblem, w: &WeightScheme, u: &DiscreteTrajectory) -> Result<Vec<f64>> {
    require_smooth(problem)?;
    let ctx = Ctx::new(problem, w)?;
    let mut g = vec![0.0; ctx.free_len()];
    ctx.residual(u.values(), &mut g);
    Ok(g)
}

/// Hessian of the functional as `diag(scale) * jacobian`.
#[derive(Debug, Clone)]
pub struct HessianOperator {
    jacobian: BandMatrix,
    scale: Vec<f64>,
    block: usize,
}

impl HessianOperator {
    pub fn dim(&self) -> usize {
        self.scale.len()
    }
    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.jacobian.matvec(x, y);
        for (yi, s) in y.iter_mut().zip(&self.scale) {
            *yi *= s;
        }
    }
    /// Half bandwidth in nodes.
    pub fn block_bandwidth(&self) -> usize {
        self.jacobian.upper() / self.block
    }
    /// Jacobian of the scaled residual (row `j` of `H` divided by `scale_j`).
    pub fn scaled(&self) -> &BandMatrix {
        &self.jacobian
    }
    pub fn row_scales(&self) -> &[f64] {
        &self.scale
    }
    /// Raw Hessian entry.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.scale[i] * self.jacobian.get(i, j)
    }
}

pub fn hessian_operator(problem: &WideProblem, w: &WeightScheme, u: &DiscreteTrajectory) -> Result<HessianOperator> {
    require_smooth(problem)?;
    problem.check_prefix(u)?;
    let ctx = Ctx::new(problem, w)?;
    let jacobian = ctx.jacobian(u.values());
    let scale = (0..ctx.free_len()).map(|s| ctx.row_scale(ctx.i0 + s / ctx.d)).collect();
    Ok(HessianOperator { jacobian, scale, block: ctx.d })
}

/// Banded linear system `A x = b` for the free nodes.
#[derive(Debug, Clone)]
pub struct BandedSystem {
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
    /// Number of leading nodes eliminated into the right-hand side.
    pub constrained: usize,
    pub block: usize,
}

impl BandedSystem {
    pub fn solve(&self) -> Result<Vec<f64>> {
        let lu = self.matrix.clone().factor()?;
        let mut x = self.rhs.clone();
        lu.solve_in_place(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(WideError::NonFiniteValue);
        }
        Ok(x)
    }
}

/// Tridiagonal system of the scalar, inertia-free quadratic problem, in
/// the row normalization
///
/// ```text
/// [ nu(2e+t)+lt^2   -nu e                          ]
/// [ -nu(e+t)        nu(2e+t)+lt^2   -nu e          ]
/// [                 ...                            ]
/// [                                -nu e    nu e   ]
/// ```
///
/// with `b_1 = nu (e u0 + t u0)` plus `t^2 f_j` in the non-final rows.
pub fn assemble_linear_system(problem: &WideProblem, w: &WeightScheme) -> Result<BandedSystem> {
    let lambda = match (problem.energy().quadratic_matrix(), problem.dim()) {
        (Some(a), 1) => a[0],
        (_, 1) => return Err(WideError::ShapeMismatch("energy is not quadratic".into())),
        (_, d) => return Err(WideError::ShapeMismatch(format!("scalar problem required, got dimension {d}"))),
    };
    if problem.rho() != 0.0 {
        return Err(WideError::WrongRegime("rho = 0"));
    }
    let nu = match *problem.dissipation() {
        crate::DissipationModel::Quadratic { nu } => nu,
        _ => return Err(WideError::WrongRegime("quadratic dissipation")),
    };
    let ctx = Ctx::new(problem, w)?;
    let (eps, tau, n) = (ctx.eps, ctx.tau, ctx.n);
    let kappa = ctx.kappa;
    if lambda < 0.0 && tau >= -1.0 / lambda {
        return Err(WideError::SingularityRisk { tau, limit: -1.0 / lambda });
    }
    let diag = nu * (2.0 * eps + tau) + kappa * lambda * tau * tau;
    let sub = -nu * (eps + tau);
    let sup = -nu * eps;
    let mut a = BandMatrix::zeros(n, 1, 1);
    for r in 0..n - 1 {
        a.set(r, r, diag);
        a.set(r, r + 1, sup);
        if r > 0 {
            a.set(r, r - 1, sub);
        }
    }
    a.set(n - 1, n - 2, -nu * eps);
    a.set(n - 1, n - 1, nu * eps);
    let u0 = problem.u0()[0];
    let mut b = vec![0.0; n];
    b[0] = nu * (eps * u0 + tau * u0);
    if problem.energy().forcing().is_some() {
        for j in 1..n {
            b[j - 1] += kappa * tau * tau * ctx.f[j];
        }
    }
    Ok(BandedSystem { matrix: a, rhs: b, constrained: 1, block: 1 })
}

/// Scaled stationarity system `J x = -R(prefix, 0)` of any problem whose
/// residual is affine in the free nodes.
pub(crate) fn affine_system(problem: &WideProblem, w: &WeightScheme) -> Result<BandedSystem> {
    let ctx = Ctx::new(problem, w)?;
    let mut u = vec![0.0; problem.grid().nodes() * ctx.d];
    let pre = problem.prefix();
    u[..pre.len()].copy_from_slice(&pre);
    let matrix = ctx.jacobian(&u);
    let mut rhs = vec![0.0; ctx.free_len()];
    ctx.residual(&u, &mut rhs);
    rhs.iter_mut().for_each(|x| *x = -*x);
    Ok(BandedSystem { matrix, rhs, constrained: ctx.i0, block: ctx.d })
}
