use crate::error::{Result, WideError};
use crate::grid::TimeGrid;
use alloc::vec::Vec;

/// Discrete Pareto weights `e_i = q^i`, `q = eps / (eps + tau)`.
///
/// The global factor `eps^2` of the continuous weight is dropped; it only
/// rescales the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    epsilon: f64,
    tau: f64,
    weights: Vec<f64>,
    energy_factor: f64,
}

pub fn make_weights(epsilon: f64, grid: &TimeGrid) -> Result<WeightScheme> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(WideError::NonPositiveEpsilon(epsilon));
    }
    let tau = grid.tau();
    let q = epsilon / (epsilon + tau);
    let mut weights = Vec::with_capacity(grid.nodes());
    let mut e = 1.0;
    for _ in 0..grid.nodes() {
        weights.push(e);
        e *= q;
    }
    Ok(WeightScheme { epsilon, tau, weights, energy_factor: 1.0 })
}

impl WeightScheme {
    /// Overrides the energy factor (default 1). Must lie in `(0, 1]`.
    pub fn with_energy_factor(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(WideError::InvalidParams(alloc::format!("energy factor {c} outside (0, 1]")));
        }
        self.energy_factor = c;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn ratio(&self) -> f64 {
        self.epsilon / (self.epsilon + self.tau)
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
    pub fn energy_factor(&self) -> f64 {
        self.energy_factor
    }

    /// `eps^k q^{-m}` for `0 <= m <= k`, evaluated as `eps^(k-m) (eps+tau)^m`
    /// so that it never overflows when `q` underflows.
    pub(crate) fn scaled(&self, k: u32, m: u32) -> f64 {
        let e = self.epsilon;
        let s = self.epsilon + self.tau;
        let mut v = 1.0;
        for _ in 0..(k - m) {
            v *= e;
        }
        for _ in 0..m {
            v *= s;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_ratio() {
        let g = TimeGrid::new(0.3, 3).unwrap();
        let w = make_weights(0.1, &g).unwrap();
        // tau is 0.3/3, not exactly 0.1, so compare loosely
        for (a, b) in w.weights().iter().zip([1.0, 0.5, 0.25, 0.125]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(w.weight(0), 1.0);
    }

    #[test]
    fn tiny_epsilon_decreasing() {
        let g = TimeGrid::new(0.2, 2).unwrap();
        let w = make_weights(1e-6, &g).unwrap();
        assert!((w.weight(1) - 1e-6 / (1e-6 + 0.1)).abs() < 1e-20);
        assert!((w.weight(1) - 9.9999e-6).abs() < 1e-10);
        assert!(w.weight(2) < w.weight(1));
    }

    #[test]
    fn rejects_bad_epsilon() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(make_weights(0.0, &g), Err(WideError::NonPositiveEpsilon(0.0)));
        assert!(make_weights(-1.0, &g).is_err());
        assert!(make_weights(0.1, &g).unwrap().with_energy_factor(1.5).is_err());
    }
}
