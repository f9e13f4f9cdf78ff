use crate::error::{Result, WideError};
use alloc::format;

/// Uniform time grid `t_i = i * tau`, `i = 0..=N`, with `tau = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    tau: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(WideError::InvalidParams(format!("horizon must be positive, got {horizon}")));
        }
        if steps < 2 {
            return Err(WideError::GridTooShort { n: steps });
        }
        Ok(TimeGrid { horizon, steps, tau: horizon / steps as f64 })
    }

    /// Grid with a prescribed step; `T` is rounded to a whole number of steps.
    pub fn with_step(horizon: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(WideError::InvalidParams(format!("step must be positive, got {tau}")));
        }
        let n = crate::math::round(horizon / tau) as usize;
        Self::new(horizon, n)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn nodes(&self) -> usize {
        self.steps + 1
    }
    pub fn t(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            i as f64 * self.tau
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_times_count_is_horizon() {
        for &(t, n) in &[(1.0, 3usize), (2.0 * core::f64::consts::PI, 2000), (0.7, 13)] {
            let g = TimeGrid::new(t, n).unwrap();
            assert!((g.tau() * n as f64 - t).abs() <= f64::EPSILON * t);
            assert_eq!(g.t(n), t);
        }
    }

    #[test]
    fn rejects_short_grids() {
        assert_eq!(TimeGrid::new(1.0, 1), Err(WideError::GridTooShort { n: 1 }));
        assert!(TimeGrid::new(0.0, 4).is_err());
    }
}
