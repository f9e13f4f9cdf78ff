//! Componentwise separable dissipation potentials `D(v) = sum_k phi(v_k)`.

use crate::error::{Result, WideError};
use crate::math;
use alloc::format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DissipationModel {
    /// `phi(v) = nu/2 v^2`.
    Quadratic { nu: f64 },
    /// `phi(v) = coeff |v|^p / p`.
    PowerLaw { p: f64, coeff: f64 },
    /// `phi(v) = alpha |v|`.
    OneHomogeneous { alpha: f64 },
}

/// Closed interval `[lo, hi]` describing a scalar subdifferential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subgradient {
    pub lo: f64,
    pub hi: f64,
}

impl Subgradient {
    pub fn point(x: f64) -> Self {
        Subgradient { lo: x, hi: x }
    }
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
    pub fn distance(&self, x: f64) -> f64 {
        (self.lo - x).max(x - self.hi).max(0.0)
    }
}

impl DissipationModel {
    pub fn quadratic(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(WideError::InvalidParams(format!("nu = {nu} must be nonnegative")));
        }
        Ok(DissipationModel::Quadratic { nu })
    }
    pub fn power_law(p: f64, coeff: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(WideError::InvalidGrowth(p));
        }
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(WideError::InvalidParams(format!("coefficient {coeff} must be positive")));
        }
        Ok(DissipationModel::PowerLaw { p, coeff })
    }
    pub fn one_homogeneous(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(WideError::InvalidParams(format!("alpha = {alpha} must be positive")));
        }
        Ok(DissipationModel::OneHomogeneous { alpha })
    }

    /// Same potential multiplied by `c > 0`.
    pub fn scaled(self, c: f64) -> Self {
        match self {
            DissipationModel::Quadratic { nu } => DissipationModel::Quadratic { nu: nu * c },
            DissipationModel::PowerLaw { p, coeff } => DissipationModel::PowerLaw { p, coeff: coeff * c },
            DissipationModel::OneHomogeneous { alpha } => DissipationModel::OneHomogeneous { alpha: alpha * c },
        }
    }

    /// Twice continuously differentiable away from zero and `C^1` at zero.
    pub fn is_smooth(&self) -> bool {
        match *self {
            DissipationModel::Quadratic { .. } => true,
            DissipationModel::PowerLaw { p, .. } => p >= 2.0,
            DissipationModel::OneHomogeneous { .. } => false,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(*self, DissipationModel::Quadratic { nu } if nu == 0.0)
    }

    pub fn phi(&self, x: f64) -> f64 {
        match *self {
            DissipationModel::Quadratic { nu } => 0.5 * nu * x * x,
            DissipationModel::PowerLaw { p, coeff } => coeff * math::powf(x.abs(), p) / p,
            DissipationModel::OneHomogeneous { alpha } => alpha * x.abs(),
        }
    }

    /// Derivative of `phi`; for the 1-homogeneous case the minimal-norm
    /// element of the subdifferential.
    pub fn dphi(&self, x: f64) -> f64 {
        match *self {
            DissipationModel::Quadratic { nu } => nu * x,
            DissipationModel::PowerLaw { p, coeff } => {
                if x == 0.0 {
                    0.0
                } else {
                    coeff * math::powf(x.abs(), p - 1.0) * x.signum()
                }
            }
            DissipationModel::OneHomogeneous { alpha } => {
                if x == 0.0 {
                    0.0
                } else {
                    alpha * x.signum()
                }
            }
        }
    }

    pub fn d2phi(&self, x: f64) -> f64 {
        match *self {
            DissipationModel::Quadratic { nu } => nu,
            DissipationModel::PowerLaw { p, coeff } => {
                if x == 0.0 {
                    if p == 2.0 {
                        coeff
                    } else if p > 2.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    coeff * (p - 1.0) * math::powf(x.abs(), p - 2.0)
                }
            }
            DissipationModel::OneHomogeneous { .. } => 0.0,
        }
    }

    pub fn subgradient(&self, x: f64) -> Subgradient {
        match *self {
            DissipationModel::OneHomogeneous { alpha } if x == 0.0 => Subgradient { lo: -alpha, hi: alpha },
            _ => Subgradient::point(self.dphi(x)),
        }
    }

    /// Smoothed potential used by continuation: `|x|` is replaced by
    /// `sqrt(x^2 + delta^2) - delta` (and likewise inside power laws with
    /// `p < 2`). `delta = 0` gives the exact potential.
    pub fn phi_smoothed(&self, x: f64, delta: f64) -> f64 {
        if delta == 0.0 || self.is_smooth() {
            return self.phi(x);
        }
        let r2 = x * x + delta * delta;
        match *self {
            DissipationModel::OneHomogeneous { alpha } => alpha * (math::sqrt(r2) - delta),
            DissipationModel::PowerLaw { p, coeff } => coeff * (math::powf(r2, 0.5 * p) - math::powf(delta, p)) / p,
            DissipationModel::Quadratic { .. } => unreachable!(),
        }
    }

    pub fn dphi_smoothed(&self, x: f64, delta: f64) -> f64 {
        if delta == 0.0 || self.is_smooth() {
            return self.dphi(x);
        }
        let r2 = x * x + delta * delta;
        match *self {
            DissipationModel::OneHomogeneous { alpha } => alpha * x / math::sqrt(r2),
            DissipationModel::PowerLaw { p, coeff } => coeff * x * math::powf(r2, 0.5 * p - 1.0),
            DissipationModel::Quadratic { .. } => unreachable!(),
        }
    }

    pub fn d2phi_smoothed(&self, x: f64, delta: f64) -> f64 {
        if delta == 0.0 || self.is_smooth() {
            return self.d2phi(x);
        }
        let r2 = x * x + delta * delta;
        match *self {
            DissipationModel::OneHomogeneous { alpha } => alpha * delta * delta / (r2 * math::sqrt(r2)),
            DissipationModel::PowerLaw { p, coeff } => {
                coeff * math::powf(r2, 0.5 * p - 2.0) * ((p - 1.0) * x * x + delta * delta)
            }
            DissipationModel::Quadratic { .. } => unreachable!(),
        }
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        v.iter().map(|&x| self.phi(x)).sum()
    }

    /// `argmin_w s phi(w) + 1/2 (w - x)^2` for scalar `x`, `s >= 0`.
    pub fn prox_scalar(&self, x: f64, s: f64) -> f64 {
        match *self {
            DissipationModel::Quadratic { nu } => x / (1.0 + s * nu),
            DissipationModel::OneHomogeneous { alpha } => {
                let t = s * alpha;
                if x > t {
                    x - t
                } else if x < -t {
                    x + t
                } else {
                    0.0
                }
            }
            DissipationModel::PowerLaw { p, coeff } => {
                let a = x.abs();
                if a == 0.0 || s == 0.0 {
                    return x;
                }
                let k = s * coeff;
                // g(r) = r + k r^{p-1} - a is increasing with g(0) < 0 < g(a)
                let (mut lo, mut hi) = (0.0_f64, a);
                let mut r = if p >= 2.0 { a / (1.0 + k * math::powf(a, p - 2.0)) } else { 0.5 * a };
                for _ in 0..200 {
                    let g = r + k * math::powf(r, p - 1.0) - a;
                    if g > 0.0 {
                        hi = r;
                    } else {
                        lo = r;
                    }
                    if hi - lo <= 1e-16 * a || g == 0.0 {
                        break;
                    }
                    let dg = 1.0 + k * (p - 1.0) * math::powf(r, p - 2.0);
                    let next = r - g / dg;
                    r = if next > lo && next < hi && dg.is_finite() { next } else { 0.5 * (lo + hi) };
                }
                r * x.signum()
            }
        }
    }

    pub fn prox(&self, v: &[f64], s: f64, out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(v) {
            *o = self.prox_scalar(x, s);
        }
    }
}
