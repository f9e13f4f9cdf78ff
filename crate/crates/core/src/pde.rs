//! Finite-difference semidiscretization of 1D evolution problems on `(0, L)`
//! with homogeneous Dirichlet conditions.
//!
//! The mass matrix is lumped to `h I`, so inertia, dissipation and energy all
//! carry the factor `h` and the time-continuous limit of the discrete problem
//! is `rho u_tt + zeta(u_t) + L u + gamma(u) = 0` nodewise.

use crate::dissipation::DissipationModel;
use crate::energy::{Energy, EnergyModel};
use crate::error::{Result, WideError};
use crate::grid::TimeGrid;
use crate::math;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Uniform mesh of `points` interior nodes on `(0, length)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMesh {
    length: f64,
    points: usize,
}

impl SpatialMesh {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(WideError::InvalidParams(format!("interval length {length} must be positive")));
        }
        if points == 0 {
            return Err(WideError::InvalidParams("mesh needs at least one interior point".into()));
        }
        Ok(SpatialMesh { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn spacing(&self) -> f64 {
        self.length / (self.points + 1) as f64
    }
    /// Coordinate of interior node `j` (zero based).
    pub fn x(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.spacing()
    }
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// `k`-th eigenvalue `(4/h^2) sin^2(k pi h / 2L)` of the stiffness matrix.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let h = self.spacing();
        let s = math::sin(k as f64 * PI * h / (2.0 * self.length));
        4.0 * s * s / (h * h)
    }

    /// `out = L u` with `L = tridiag(-1, 2, -1) / h^2`.
    pub fn stiffness_apply(&self, u: &[f64], out: &mut [f64]) {
        let m = self.points;
        let ih2 = 1.0 / (self.spacing() * self.spacing());
        for j in 0..m {
            let left = if j > 0 { u[j - 1] } else { 0.0 };
            let right = if j + 1 < m { u[j + 1] } else { 0.0 };
            out[j] = (2.0 * u[j] - left - right) * ih2;
        }
    }

    /// Discrete `L^2(0, L)` norm `sqrt(h sum v_j^2)`.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        math::sqrt(self.spacing()) * math::norm2(v)
    }

    /// Space-time `L^2` distance `sqrt(sum_i tau h |a_i - b_i|^2)`.
    pub fn space_time_distance(&self, a: &DiscreteTrajectory, b: &DiscreteTrajectory) -> f64 {
        math::sqrt(self.spacing()) * a.l2_distance(b)
    }
}

/// Reaction term `gamma = G'` with its primitive `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    Zero,
    /// `gamma(u) = c u`.
    Linear(f64),
    /// `G(u) = |u|^{2k} / 2k`, so `k = 2` gives `gamma(u) = u^3`.
    Power(u32),
}

impl Nonlinearity {
    pub fn primitive(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Linear(c) => 0.5 * c * u * u,
            Nonlinearity::Power(k) => {
                let e = 2 * k;
                math::powi(u, e) / e as f64
            }
        }
    }
    pub fn gamma(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Linear(c) => c * u,
            Nonlinearity::Power(k) => math::powi(u, 2 * k - 1),
        }
    }
    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Linear(c) => c,
            Nonlinearity::Power(k) => (2 * k - 1) as f64 * math::powi(u, 2 * k - 2),
        }
    }
    /// Lower bound of `gamma'`.
    pub fn convexity(&self) -> f64 {
        match *self {
            Nonlinearity::Linear(c) => c,
            _ => 0.0,
        }
    }
    fn validate(&self) -> Result<()> {
        match *self {
            Nonlinearity::Power(0) => Err(WideError::InvalidParams("power nonlinearity needs k >= 1".into())),
            Nonlinearity::Linear(c) if !c.is_finite() => Err(WideError::NonFiniteValue),
            _ => Ok(()),
        }
    }
}

struct MeshEnergy {
    mesh: SpatialMesh,
    gamma: Nonlinearity,
}

impl Energy for MeshEnergy {
    fn dim(&self) -> usize {
        self.mesh.points
    }
    fn value(&self, u: &[f64]) -> f64 {
        let mut lu = vec![0.0; u.len()];
        self.mesh.stiffness_apply(u, &mut lu);
        let g: f64 = u.iter().map(|&x| self.gamma.primitive(x)).sum();
        self.mesh.spacing() * (0.5 * math::dot(u, &lu) + g)
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.mesh.stiffness_apply(u, out);
        let h = self.mesh.spacing();
        for (o, &x) in out.iter_mut().zip(u) {
            *o = h * (*o + self.gamma.gamma(x));
        }
    }
    fn hessian(&self, u: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> bool {
        let h = self.mesh.spacing();
        let ih = 1.0 / h;
        for j in 0..u.len() {
            sink(j, j, 2.0 * ih + h * self.gamma.derivative(u[j]));
            if j > 0 {
                sink(j, j - 1, -ih);
            }
            if j + 1 < u.len() {
                sink(j, j + 1, -ih);
            }
        }
        true
    }
    fn hessian_bandwidth(&self) -> usize {
        1
    }
}

/// `E(u) = h (1/2 u^T L u + sum_j G(u_j))`.
pub fn discretize_gradient_flow(mesh: &SpatialMesh, gamma: Nonlinearity) -> Result<EnergyModel> {
    gamma.validate()?;
    let m = mesh.points;
    let h = mesh.spacing();
    let quadratic = match gamma {
        Nonlinearity::Zero | Nonlinearity::Linear(_) => {
            let c = gamma.derivative(0.0);
            let mut a = vec![0.0; m * m];
            for j in 0..m {
                a[j * m + j] = 2.0 / h + h * c;
                if j > 0 {
                    a[j * m + j - 1] = -1.0 / h;
                    a[(j - 1) * m + j] = -1.0 / h;
                }
            }
            Some(a)
        }
        Nonlinearity::Power(_) => None,
    };
    let lambda = h * (mesh.eigenvalue(1) + gamma.convexity());
    let inner = Arc::new(MeshEnergy { mesh: *mesh, gamma });
    Ok(EnergyModel::from_parts("discretized_pde", inner, quadratic, lambda))
}

/// Gradient flow `nu u_t - u_xx + gamma(u) = 0` as a first-order problem.
pub fn gradient_flow_problem(
    mesh: &SpatialMesh,
    gamma: Nonlinearity,
    nu: f64,
    grid: TimeGrid,
    u0: Vec<f64>,
) -> Result<WideProblem> {
    let energy = discretize_gradient_flow(mesh, gamma)?;
    let diss = DissipationModel::quadratic(nu * mesh.spacing())?;
    WideProblem::new(grid, energy, diss, 0.0, u0, None)
}

/// Damping potential `Z(v) = coeff |v|^p / p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDamping {
    pub p: f64,
    pub coeff: f64,
}

/// Builds wave problems `u_tt + nu u_t + zeta(u_t) - u_xx + gamma(u) = 0`.
#[derive(Debug, Clone)]
pub struct WaveFactory {
    mesh: SpatialMesh,
    energy: EnergyModel,
    dissipation: DissipationModel,
}

impl WaveFactory {
    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }
    pub fn energy(&self) -> &EnergyModel {
        &self.energy
    }
    pub fn dissipation(&self) -> &DissipationModel {
        &self.dissipation
    }
    pub fn problem(&self, grid: TimeGrid, u0: Vec<f64>, u1: Vec<f64>) -> Result<WideProblem> {
        let rho = self.mesh.spacing();
        WideProblem::new(grid, self.energy.clone(), self.dissipation, rho, u0, Some(u1))
    }
}

/// Semilinear wave equation with linear damping `nu` or nonlinear damping
/// `zeta = Z'` (not both).
pub fn discretize_wave(
    mesh: &SpatialMesh,
    gamma: Nonlinearity,
    nu: f64,
    zeta: Option<PowerDamping>,
) -> Result<WaveFactory> {
    let h = mesh.spacing();
    let energy = discretize_gradient_flow(mesh, gamma)?;
    let dissipation = match zeta {
        Some(z) => {
            if nu != 0.0 {
                return Err(WideError::InvalidParams("combine either linear or power damping, not both".into()));
            }
            DissipationModel::power_law(z.p, z.coeff * h)?
        }
        None => DissipationModel::quadratic(nu * h)?,
    };
    Ok(WaveFactory { mesh: *mesh, energy, dissipation })
}

/// Samples `sin(k pi x_j / L)`.
pub fn mode_initializer(mesh: &SpatialMesh, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > mesh.points {
        return Err(WideError::ModeOutOfRange { k, m: mesh.points });
    }
    Ok((0..mesh.points).map(|j| math::sin(k as f64 * PI * mesh.x(j) / mesh.length)).collect())
}
