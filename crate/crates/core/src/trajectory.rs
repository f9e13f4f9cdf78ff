use crate::error::{Result, WideError};
use crate::grid::TimeGrid;
use alloc::format;
use alloc::vec::Vec;

/// Values `u_0..u_N` in `R^d`, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrajectory {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl DiscreteTrajectory {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() != grid.nodes() * dim {
            return Err(WideError::ShapeMismatch(format!(
                "expected {} x {} values, got {}",
                grid.nodes(),
                dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WideError::NonFiniteValue);
        }
        Ok(DiscreteTrajectory { grid, dim, values })
    }

    pub fn constant(grid: TimeGrid, u: &[f64]) -> Self {
        let mut values = Vec::with_capacity(grid.nodes() * u.len());
        for _ in 0..grid.nodes() {
            values.extend_from_slice(u);
        }
        DiscreteTrajectory { grid, dim: u.len(), values }
    }

    /// Samples `f(t, out)` at every node.
    pub fn sample(grid: TimeGrid, dim: usize, mut f: impl FnMut(f64, &mut [f64])) -> Self {
        let mut values = alloc::vec![0.0; grid.nodes() * dim];
        for (i, chunk) in values.chunks_mut(dim).enumerate() {
            f(grid.t(i), chunk);
        }
        DiscreteTrajectory { grid, dim, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.grid.nodes()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Backward difference `(u_i - u_{i-1}) / tau`, `i >= 1`.
    pub fn velocity(&self, i: usize, out: &mut [f64]) {
        let tau = self.grid.tau();
        let (a, b) = (self.node(i), self.node(i - 1));
        for k in 0..self.dim {
            out[k] = (a[k] - b[k]) / tau;
        }
    }

    /// Second backward difference `(u_i - 2u_{i-1} + u_{i-2}) / tau^2`, `i >= 2`.
    pub fn acceleration(&self, i: usize, out: &mut [f64]) {
        let tau = self.grid.tau();
        let (a, b, c) = (self.node(i), self.node(i - 1), self.node(i - 2));
        for k in 0..self.dim {
            out[k] = (a[k] - 2.0 * b[k] + c[k]) / (tau * tau);
        }
    }

    /// Largest Euclidean node distance to `other` over nodes `0..nodes`.
    pub fn sup_distance_upto(&self, other: &DiscreteTrajectory, nodes: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..nodes {
            let d: f64 = self.node(i).iter().zip(other.node(i)).map(|(a, b)| (a - b) * (a - b)).sum();
            m = m.max(crate::math::sqrt(d));
        }
        m
    }

    pub fn sup_distance(&self, other: &DiscreteTrajectory) -> f64 {
        self.sup_distance_upto(other, self.len())
    }

    /// Discrete `L^2(0,T)` distance with right-endpoint weights `tau`.
    pub fn l2_distance(&self, other: &DiscreteTrajectory) -> f64 {
        let tau = self.grid.tau();
        let s: f64 =
            self.values[self.dim..].iter().zip(&other.values[self.dim..]).map(|(a, b)| (a - b) * (a - b)).sum();
        crate::math::sqrt(tau * s)
    }
}
