use crate::dissipation::DissipationModel;
use crate::energy::EnergyModel;
use crate::error::{Result, WideError};
use crate::grid::TimeGrid;
use crate::trajectory::DiscreteTrajectory;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Inertia, dissipation, energy, initial data and horizon.
#[derive(Debug, Clone)]
pub struct WideProblem {
    grid: TimeGrid,
    energy: EnergyModel,
    dissipation: DissipationModel,
    rho: f64,
    u0: Vec<f64>,
    u1: Option<Vec<f64>>,
    quasistatic: bool,
}

impl WideProblem {
    pub fn new(
        grid: TimeGrid,
        energy: EnergyModel,
        dissipation: DissipationModel,
        rho: f64,
        u0: Vec<f64>,
        u1: Option<Vec<f64>>,
    ) -> Result<Self> {
        let p = WideProblem { grid, energy, dissipation, rho, u0, u1, quasistatic: false };
        p.validate()?;
        Ok(p)
    }

    /// The degenerate `rho = 0`, `D = 0` problem; only meaningful for the
    /// quasistatic solver.
    pub fn quasistatic(grid: TimeGrid, energy: EnergyModel, u0: Vec<f64>) -> Result<Self> {
        let p = WideProblem {
            grid,
            energy,
            dissipation: DissipationModel::Quadratic { nu: 0.0 },
            rho: 0.0,
            u0,
            u1: None,
            quasistatic: true,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let d = self.energy.dim();
        if self.u0.len() != d {
            return Err(WideError::ShapeMismatch(format!("u0 has {} entries, energy dimension is {d}", self.u0.len())));
        }
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(WideError::InvalidProblem(format!("rho = {} must be nonnegative", self.rho)));
        }
        if self.u0.iter().any(|x| !x.is_finite()) {
            return Err(WideError::NonFiniteValue);
        }
        match (&self.u1, self.rho > 0.0) {
            (None, true) => return Err(WideError::InvalidProblem("rho > 0 requires an initial velocity u1".into())),
            (Some(_), false) => return Err(WideError::InvalidProblem("initial velocity given but rho = 0".into())),
            (Some(u1), true) if u1.len() != d => {
                return Err(WideError::ShapeMismatch(format!("u1 has {} entries, expected {d}", u1.len())))
            }
            _ => {}
        }
        if !self.quasistatic && self.rho == 0.0 && self.dissipation.is_trivial() {
            return Err(WideError::InvalidProblem("rho = 0 with zero dissipation is degenerate".into()));
        }
        let first = if self.rho > 0.0 { 2 } else { 1 };
        if self.grid.steps() < first {
            return Err(WideError::GridTooShort { n: self.grid.steps() });
        }
        Ok(())
    }

    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        let mut p = self.clone();
        p.grid = grid;
        p.validate()?;
        Ok(p)
    }

    pub fn with_initial(&self, u0: Vec<f64>) -> Result<Self> {
        let mut p = self.clone();
        p.u0 = u0;
        p.validate()?;
        Ok(p)
    }

    pub fn with_energy(&self, energy: EnergyModel) -> Result<Self> {
        let mut p = self.clone();
        p.energy = energy;
        p.validate()?;
        Ok(p)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn energy(&self) -> &EnergyModel {
        &self.energy
    }
    pub fn dissipation(&self) -> &DissipationModel {
        &self.dissipation
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn u0(&self) -> &[f64] {
        &self.u0
    }
    pub fn u1(&self) -> Option<&[f64]> {
        self.u1.as_deref()
    }
    pub fn is_quasistatic(&self) -> bool {
        self.quasistatic
    }
    pub fn dim(&self) -> usize {
        self.energy.dim()
    }

    /// First node that is not fixed by the initial data.
    pub fn first_free(&self) -> usize {
        if self.rho > 0.0 {
            2
        } else {
            1
        }
    }

    pub fn free_dim(&self) -> usize {
        (self.grid.nodes() - self.first_free()) * self.dim()
    }

    /// Values of the fixed prefix: `u_0` and, when `rho > 0`, `u_0 + tau u_1`.
    pub fn prefix(&self) -> Vec<f64> {
        let mut v = self.u0.clone();
        if let Some(u1) = &self.u1 {
            let tau = self.grid.tau();
            v.extend(self.u0.iter().zip(u1).map(|(a, b)| a + tau * b));
        }
        v
    }

    /// Overwrites the fixed prefix of `u`.
    pub fn impose_prefix(&self, u: &mut DiscreteTrajectory) {
        let pre = self.prefix();
        u.values_mut()[..pre.len()].copy_from_slice(&pre);
    }

    pub fn check_prefix(&self, u: &DiscreteTrajectory) -> Result<()> {
        if u.dim() != self.dim() || u.len() != self.grid.nodes() {
            return Err(WideError::ShapeMismatch(format!(
                "trajectory is {} x {}, problem needs {} x {}",
                u.len(),
                u.dim(),
                self.grid.nodes(),
                self.dim()
            )));
        }
        let pre = self.prefix();
        let scale = 1.0 + crate::math::max_abs(&pre);
        for (k, (a, b)) in u.values().iter().zip(&pre).enumerate() {
            if (a - b).abs() > 1e-12 * scale {
                return Err(WideError::ConstraintViolated { node: k / self.dim() });
            }
        }
        Ok(())
    }

    /// Trajectory that satisfies the initial data and stays at rest afterwards.
    pub fn rest_trajectory(&self) -> DiscreteTrajectory {
        let pre = self.prefix();
        let d = self.dim();
        let last = &pre[pre.len() - d..];
        let mut u = DiscreteTrajectory::constant(self.grid, last);
        u.values_mut()[..pre.len()].copy_from_slice(&pre);
        u
    }

    /// Forcing sampled at every node, node-major.
    pub fn forcing_nodes(&self) -> Vec<f64> {
        let d = self.dim();
        let mut f = vec![0.0; self.grid.nodes() * d];
        if self.energy.forcing().is_some() {
            for (i, chunk) in f.chunks_mut(d).enumerate() {
                self.energy.load(self.grid.t(i), chunk);
            }
        }
        f
    }
}
