//! Energies `E: R^d -> R` with gradients, optional Hessians and forcing.

use crate::error::{Result, WideError};
use crate::math;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

/// A differentiable energy density.
pub trait Energy: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, u: &[f64]) -> f64;
    fn gradient(&self, u: &[f64], out: &mut [f64]);
    /// Emits Hessian entries `(row, col, value)`; returns `false` when no
    /// analytic Hessian is available.
    fn hessian(&self, _u: &[f64], _sink: &mut dyn FnMut(usize, usize, f64)) -> bool {
        false
    }
    /// Half bandwidth of the Hessian sparsity pattern.
    fn hessian_bandwidth(&self) -> usize {
        self.dim() - 1
    }
}

type ForcingFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// Time-dependent load `f(t)`, evaluated at the grid nodes.
#[derive(Clone)]
pub struct Forcing {
    f: Arc<ForcingFn>,
}

impl core::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Forcing(..)")
    }
}

impl Forcing {
    pub fn new(f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Forcing { f: Arc::new(f) }
    }
    /// `f(t) = slope * t`.
    pub fn linear(slope: Vec<f64>) -> Self {
        Self::new(move |t, out| {
            for (o, s) in out.iter_mut().zip(&slope) {
                *o = s * t;
            }
        })
    }
    pub fn constant(value: Vec<f64>) -> Self {
        Self::new(move |_, out| out.copy_from_slice(&value))
    }
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        (self.f)(t, out)
    }
}

/// Energy together with its metadata.
#[derive(Clone)]
pub struct EnergyModel {
    name: String,
    inner: Arc<dyn Energy>,
    quadratic: Option<Vec<f64>>,
    lambda: f64,
    forcing: Option<Forcing>,
}

impl core::fmt::Debug for EnergyModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("EnergyModel")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("lambda", &self.lambda)
            .field("quadratic", &self.quadratic.is_some())
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl EnergyModel {
    /// Wraps a user energy with a declared convexity modulus.
    pub fn custom(name: &str, energy: impl Energy + 'static, lambda: f64) -> Self {
        EnergyModel { name: name.to_string(), inner: Arc::new(energy), quadratic: None, lambda, forcing: None }
    }

    /// `E(u) = 1/2 u^T A u` for a symmetric row-major `A`.
    pub fn quadratic(matrix: Vec<f64>) -> Result<Self> {
        let d = math::round(math::sqrt(matrix.len() as f64)) as usize;
        if d == 0 || d * d != matrix.len() {
            return Err(WideError::InvalidParams(format!("{} entries is not a square matrix", matrix.len())));
        }
        for i in 0..d {
            for j in 0..i {
                if matrix[i * d + j] != matrix[j * d + i] {
                    return Err(WideError::InvalidParams("quadratic matrix must be symmetric".into()));
                }
            }
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(WideError::NonFiniteValue);
        }
        let lambda = math::symmetric_eigenvalues(&matrix, d)[0];
        let mut bw = 0;
        for i in 0..d {
            for j in 0..d {
                if matrix[i * d + j] != 0.0 {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        let inner = Quadratic { d, a: matrix.clone(), bw };
        Ok(EnergyModel {
            name: "quadratic".into(),
            inner: Arc::new(inner),
            quadratic: Some(matrix),
            lambda,
            forcing: None,
        })
    }

    /// Isotropic `E(u) = lambda/2 |u|^2` in dimension `d`.
    pub fn isotropic(lambda: f64, d: usize) -> Self {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            a[i * d + i] = lambda;
        }
        Self::quadratic(a).expect("diagonal matrix is valid")
    }

    pub(crate) fn from_parts(name: &str, inner: Arc<dyn Energy>, quadratic: Option<Vec<f64>>, lambda: f64) -> Self {
        EnergyModel { name: name.to_string(), inner, quadratic, lambda, forcing: None }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
    pub fn value(&self, u: &[f64]) -> f64 {
        self.inner.value(u)
    }
    pub fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.inner.gradient(u, out)
    }
    pub fn quadratic_matrix(&self) -> Option<&[f64]> {
        self.quadratic.as_deref()
    }
    pub fn lambda_convexity(&self) -> f64 {
        self.lambda
    }
    pub fn forcing(&self) -> Option<&Forcing> {
        self.forcing.as_ref()
    }
    pub fn hessian_bandwidth(&self) -> usize {
        self.inner.hessian_bandwidth()
    }
    pub fn has_hessian(&self) -> bool {
        let u = vec![0.0; self.dim()];
        self.inner.hessian(&u, &mut |_, _, _| {})
    }

    /// Load at time `t` (zero without forcing).
    pub fn load(&self, t: f64, out: &mut [f64]) {
        match &self.forcing {
            Some(f) => f.eval(t, out),
            None => out.iter_mut().for_each(|x| *x = 0.0),
        }
    }

    /// Emits Hessian entries, falling back to central differences of the
    /// gradient when no analytic Hessian exists.
    pub fn hessian_entries(&self, u: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) {
        if self.inner.hessian(u, sink) {
            return;
        }
        let d = self.dim();
        let mut x = Vec::from(u);
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        for j in 0..d {
            let h = 1e-6 * (1.0 + u[j].abs());
            x[j] = u[j] + h;
            self.inner.gradient(&x, &mut gp);
            x[j] = u[j] - h;
            self.inner.gradient(&x, &mut gm);
            x[j] = u[j];
            for i in 0..d {
                let v = (gp[i] - gm[i]) / (2.0 * h);
                if v != 0.0 {
                    sink(i, j, v);
                }
            }
        }
    }

    /// Dense Hessian, row-major.
    pub fn hessian_dense(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut h = vec![0.0; d * d];
        self.hessian_entries(u, &mut |i, j, v| h[i * d + j] += v);
        h
    }
}

/// Catalogue of builtin energies.
#[derive(Clone, Debug)]
pub enum EnergySpec {
    /// `1/2 u^T A u`, row-major symmetric `A`.
    Quadratic(Vec<f64>),
    /// Scalar `-(4/3) (u^+)^{3/2}`.
    SqrtSelection,
    /// `sum_k |u_k|^q / q`.
    Power { q: f64, dim: usize },
    /// `sum_k (u_k^2 - 1)^2 / 4`.
    DoubleWell { dim: usize },
    /// An energy produced by the PDE discretization.
    DiscretizedPde(EnergyModel),
}

impl EnergySpec {
    /// Parses a catalogue name with numeric parameters, e.g. `power` with `[4]`.
    pub fn parse(name: &str, params: &[f64]) -> Result<Self> {
        let dim_at = |i: usize| -> Result<usize> {
            match params.get(i) {
                None => Ok(1),
                Some(&d) if d >= 1.0 && d == math::floor(d) => Ok(d as usize),
                Some(&d) => Err(WideError::InvalidParams(format!("dimension {d} is not a positive integer"))),
            }
        };
        match name {
            "quadratic" => {
                if params.is_empty() {
                    return Err(WideError::InvalidParams("quadratic needs a matrix".into()));
                }
                Ok(EnergySpec::Quadratic(params.to_vec()))
            }
            "sqrt_selection" => {
                if !params.is_empty() {
                    return Err(WideError::InvalidParams("sqrt_selection takes no parameters".into()));
                }
                Ok(EnergySpec::SqrtSelection)
            }
            "power" => {
                let q = *params.first().ok_or_else(|| WideError::InvalidParams("power needs q".into()))?;
                Ok(EnergySpec::Power { q, dim: dim_at(1)? })
            }
            "double_well" => Ok(EnergySpec::DoubleWell { dim: dim_at(0)? }),
            "discretized_pde" => Err(WideError::InvalidParams(
                "discretized_pde energies are built by pde::discretize_gradient_flow".into(),
            )),
            other => Err(WideError::UnknownEnergy(other.to_string())),
        }
    }
}

/// Builds a catalogue energy.
pub fn builtin_energy(spec: EnergySpec) -> Result<EnergyModel> {
    match spec {
        EnergySpec::Quadratic(a) => EnergyModel::quadratic(a),
        EnergySpec::SqrtSelection => {
            Ok(EnergyModel::from_parts("sqrt_selection", Arc::new(SqrtSelection), None, f64::NEG_INFINITY))
        }
        EnergySpec::Power { q, dim } => {
            if !(q > 1.0) || !q.is_finite() {
                return Err(WideError::InvalidParams(format!("power exponent {q} must exceed 1")));
            }
            if dim == 0 {
                return Err(WideError::InvalidParams("dimension must be positive".into()));
            }
            let quadratic = (q == 2.0).then(|| {
                let mut a = vec![0.0; dim * dim];
                (0..dim).for_each(|i| a[i * dim + i] = 1.0);
                a
            });
            Ok(EnergyModel::from_parts("power", Arc::new(Power { q, dim }), quadratic, 0.0))
        }
        EnergySpec::DoubleWell { dim } => {
            if dim == 0 {
                return Err(WideError::InvalidParams("dimension must be positive".into()));
            }
            Ok(EnergyModel::from_parts("double_well", Arc::new(DoubleWell { dim }), None, -1.0))
        }
        EnergySpec::DiscretizedPde(model) => Ok(model),
    }
}

struct Quadratic {
    d: usize,
    a: Vec<f64>,
    bw: usize,
}

impl Energy for Quadratic {
    fn dim(&self) -> usize {
        self.d
    }
    fn value(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            let row = &self.a[i * self.d..(i + 1) * self.d];
            s += u[i] * math::dot(row, u);
        }
        0.5 * s
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = math::dot(&self.a[i * self.d..(i + 1) * self.d], u);
        }
    }
    fn hessian(&self, _u: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> bool {
        for i in 0..self.d {
            for j in 0..self.d {
                let v = self.a[i * self.d + j];
                if v != 0.0 {
                    sink(i, j, v);
                }
            }
        }
        true
    }
    fn hessian_bandwidth(&self) -> usize {
        self.bw
    }
}

struct SqrtSelection;

impl Energy for SqrtSelection {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, u: &[f64]) -> f64 {
        let p = u[0].max(0.0);
        -(4.0 / 3.0) * p * math::sqrt(p)
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        out[0] = -2.0 * math::sqrt(u[0].max(0.0));
    }
    fn hessian(&self, u: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> bool {
        if u[0] > 0.0 {
            sink(0, 0, -1.0 / math::sqrt(u[0]));
        }
        true
    }
}

struct Power {
    q: f64,
    dim: usize,
}

impl Energy for Power {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &[f64]) -> f64 {
        u.iter().map(|x| math::powf(x.abs(), self.q)).sum::<f64>() / self.q
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(u) {
            *o = math::powf(x.abs(), self.q - 1.0) * x.signum() * (*x != 0.0) as u8 as f64;
        }
    }
    fn hessian(&self, u: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> bool {
        for (k, x) in u.iter().enumerate() {
            let v = if *x == 0.0 {
                if self.q == 2.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (self.q - 1.0) * math::powf(x.abs(), self.q - 2.0)
            };
            sink(k, k, v);
        }
        true
    }
    fn hessian_bandwidth(&self) -> usize {
        0
    }
}

struct DoubleWell {
    dim: usize,
}

impl Energy for DoubleWell {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &[f64]) -> f64 {
        u.iter().map(|x| 0.25 * (x * x - 1.0) * (x * x - 1.0)).sum()
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(u) {
            *o = x * x * x - x;
        }
    }
    fn hessian(&self, u: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> bool {
        for (k, x) in u.iter().enumerate() {
            sink(k, k, 3.0 * x * x - 1.0);
        }
        true
    }
    fn hessian_bandwidth(&self) -> usize {
        0
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Energy given by closures; no analytic Hessian.
pub struct FnEnergy {
    dim: usize,
    value: Box<ValueFn>,
    gradient: Box<GradientFn>,
}

impl FnEnergy {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        FnEnergy { dim, value: Box::new(value), gradient: Box::new(gradient) }
    }
}

impl Energy for FnEnergy {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &[f64]) -> f64 {
        (self.value)(u)
    }
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        (self.gradient)(u, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grad(e: &EnergyModel, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; e.dim()];
        e.gradient(u, &mut g);
        g
    }

    #[test]
    fn scalar_quadratic() {
        let e = builtin_energy(EnergySpec::parse("quadratic", &[1.0]).unwrap()).unwrap();
        assert_eq!(e.value(&[2.0]), 2.0);
        assert_eq!(grad(&e, &[2.0]), [2.0]);
        assert_eq!(e.lambda_convexity(), 1.0);
    }

    #[test]
    fn selection_energy() {
        let e = builtin_energy(EnergySpec::SqrtSelection).unwrap();
        assert_eq!(grad(&e, &[4.0]), [-4.0]);
        assert_eq!(e.value(&[-1.0]), 0.0);
        assert_eq!(grad(&e, &[-1.0]), [0.0]);
    }

    #[test]
    fn power_and_errors() {
        let e = builtin_energy(EnergySpec::parse("power", &[4.0]).unwrap()).unwrap();
        assert_eq!(e.value(&[2.0]), 4.0);
        assert_eq!(grad(&e, &[-2.0]), [-8.0]);
        assert!(matches!(EnergySpec::parse("nope", &[]), Err(WideError::UnknownEnergy(_))));
        assert!(builtin_energy(EnergySpec::Power { q: 0.5, dim: 1 }).is_err());
        assert!(EnergyModel::quadratic(vec![1.0, 2.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn fd_hessian_fallback() {
        let e = EnergyModel::custom(
            "cubic",
            FnEnergy::new(1, |u| u[0] * u[0] * u[0] / 3.0, |u, g| g[0] = u[0] * u[0]),
            0.0,
        );
        let h = e.hessian_dense(&[1.5]);
        assert!((h[0] - 3.0).abs() < 1e-8);
    }
}
