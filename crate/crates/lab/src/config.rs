//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Nested specs use dotted
//! keys and lists are comma separated. Unknown or repeated keys are errors.
//!
//! | key | value |
//! |-----|-------|
//! | `mode` | `run`, `sweep`, `pde`, `check` or `oracle` |
//! | `seed` | integer, default 0 |
//! | `output` | output directory, default `out` |
//! | `grid.horizon`, `grid.steps` | time horizon `T` and step count `N` |
//! | `problem.energy` | `quadratic`, `sqrt_selection`, `power`, `double_well` |
//! | `problem.energy_params` | catalogue parameters of the energy |
//! | `problem.dissipation` | `quadratic`, `power_law`, `one_homogeneous` |
//! | `problem.dissipation_params` | `nu`; `p, coeff`; or `alpha` |
//! | `problem.rho` | inertia, default 0 |
//! | `problem.u0`, `problem.u1` | initial position and velocity |
//! | `problem.forcing` | `none`, `linear` (`f = c t`) or `constant` |
//! | `problem.forcing_params` | the vector `c` |
//! | `pde.kind` | `heat` or `wave` |
//! | `pde.length`, `pde.points` | interval length `L`, interior points `M` |
//! | `pde.gamma`, `pde.gamma_param` | `zero`, `linear` (coefficient) or `power` (`k`) |
//! | `pde.nu` | linear damping, default 1 for heat and 0 for wave |
//! | `pde.damping_p`, `pde.damping_coeff` | power-law damping of the wave |
//! | `pde.profile`, `pde.profile_param` | `mode` (index `k`), `parabola` or `zero` |
//! | `solver.eps` | weight parameter of `run`, `pde`, `check`, `oracle` |
//! | `solver.eps_list` | strictly decreasing schedule of `sweep` |
//! | `solver.tau_coupling` | `fixed` (use the grid) or `squared` (`tau = eps^2`) |
//! | `solver.el_tol` | Euler-Lagrange threshold of `check`, default 1e-8 |
//! | `reference.kind` | `implicit_euler`, `incremental`, `leapfrog`, `quasistatic`, `catalogue` |
//! | `reference.name`, `reference.params` | catalogue entry and parameters |
//! | `sweep.norm` | `sup` or `l2`, default `sup` |

use crate::error::{LabError, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use wide_core::causal::{Norm, TauCoupling};
use wide_core::oracles::{
    analytic_catalogue, implicit_euler, incremental_minimization, leapfrog_wave, solve_quasistatic, ReferenceSolution,
};
use wide_core::pde::{self, Nonlinearity, PowerDamping, SpatialMesh};
use wide_core::{builtin_energy, DissipationModel, EnergySpec, Forcing, TimeGrid, WideError, WideProblem};

const KEYS: &[&str] = &[
    "mode",
    "seed",
    "output",
    "grid.horizon",
    "grid.steps",
    "problem.energy",
    "problem.energy_params",
    "problem.dissipation",
    "problem.dissipation_params",
    "problem.rho",
    "problem.u0",
    "problem.u1",
    "problem.forcing",
    "problem.forcing_params",
    "pde.kind",
    "pde.length",
    "pde.points",
    "pde.gamma",
    "pde.gamma_param",
    "pde.nu",
    "pde.damping_p",
    "pde.damping_coeff",
    "pde.profile",
    "pde.profile_param",
    "solver.eps",
    "solver.eps_list",
    "solver.tau_coupling",
    "solver.el_tol",
    "reference.kind",
    "reference.name",
    "reference.params",
    "sweep.norm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Sweep,
    Pde,
    Check,
    Oracle,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "run" => Mode::Run,
            "sweep" => Mode::Sweep,
            "pde" => Mode::Pde,
            "check" => Mode::Check,
            "oracle" => Mode::Oracle,
            other => return Err(format!("unknown mode `{other}`")),
        })
    }
}

/// Parsed but untyped `key = value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::Syntax { line: k + 1, msg: "expected `key = value`".into() })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(LabError::UnknownKey(key.to_string()));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(LabError::Syntax { line: k + 1, msg: format!("`{key}` given twice") });
            }
        }
        Ok(RawConfig { entries })
    }

    /// Overrides or adds a key, with the same validation as the file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(LabError::UnknownKey(key.to_string()));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| LabError::MissingKey(key.to_string()))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|v| v.parse::<T>().map_err(|e| bad(key, e))).transpose()
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?.ok_or_else(|| LabError::MissingKey(key.to_string()))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                if v.is_empty() {
                    return Ok(Vec::new());
                }
                v.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| bad(key, e))).collect()
            })
            .transpose()
    }
}

fn bad(key: &str, msg: impl std::fmt::Display) -> LabError {
    LabError::BadValue { key: key.to_string(), msg: msg.to_string() }
}

/// Source of the ground truth for `sweep`, `pde` and `oracle`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    ImplicitEuler,
    Incremental,
    Leapfrog,
    Quasistatic,
    Catalogue { name: String, params: Vec<f64> },
}

impl ReferenceSpec {
    /// Computes the reference on the problem's grid.
    pub fn build(&self, problem: &WideProblem) -> wide_core::Result<ReferenceSolution> {
        match self {
            ReferenceSpec::ImplicitEuler => implicit_euler(problem),
            ReferenceSpec::Incremental => incremental_minimization(problem),
            ReferenceSpec::Leapfrog => leapfrog_wave(problem),
            ReferenceSpec::Quasistatic => solve_quasistatic(problem.energy(), problem.grid()),
            ReferenceSpec::Catalogue { name, params } => analytic_catalogue(name, params),
        }
    }

    /// Whether the reference must be recomputed when the grid changes.
    pub fn is_discrete(&self) -> bool {
        !matches!(self, ReferenceSpec::Catalogue { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeKind {
    Heat,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Mode(usize),
    /// `4 x (L - x) / L^2`.
    Parabola,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeSpec {
    pub kind: PdeKind,
    pub mesh: SpatialMesh,
    pub gamma: Nonlinearity,
    pub nu: f64,
    pub damping: Option<PowerDamping>,
    pub profile: Profile,
}

impl PdeSpec {
    pub fn initial(&self) -> wide_core::Result<Vec<f64>> {
        let l = self.mesh.length();
        Ok(match self.profile {
            Profile::Mode(k) => pde::mode_initializer(&self.mesh, k)?,
            Profile::Parabola => self.mesh.coordinates().iter().map(|x| 4.0 * x * (l - x) / (l * l)).collect(),
            Profile::Zero => vec![0.0; self.mesh.points()],
        })
    }

    pub fn problem(&self, grid: TimeGrid) -> wide_core::Result<WideProblem> {
        let u0 = self.initial()?;
        match self.kind {
            PdeKind::Heat => pde::gradient_flow_problem(&self.mesh, self.gamma, self.nu, grid, u0),
            PdeKind::Wave => {
                let factory = pde::discretize_wave(&self.mesh, self.gamma, self.nu, self.damping)?;
                let m = self.mesh.points();
                factory.problem(grid, u0, vec![0.0; m])
            }
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub output: PathBuf,
    pub grid: TimeGrid,
    pub problem: WideProblem,
    pub pde: Option<PdeSpec>,
    pub eps: Option<f64>,
    pub eps_list: Vec<f64>,
    pub coupling: Coupling,
    pub el_tol: f64,
    pub reference: Option<ReferenceSpec>,
    pub norm: Norm,
}

/// How the grid follows `eps` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Fixed,
    Squared,
}

impl Coupling {
    /// Grid used at `eps`.
    pub fn grid(&self, base: &TimeGrid, eps: f64) -> wide_core::Result<TimeGrid> {
        match self {
            Coupling::Fixed => Ok(*base),
            Coupling::Squared => TimeGrid::with_step(base.horizon(), TauCoupling::Squared.tau(eps)),
        }
    }
}

impl ExperimentConfig {
    /// Types and validates a raw config, constructing the problem so that
    /// invariant violations surface before any solve.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mode: Mode = raw.required("mode")?;
        let seed = raw.parsed("seed")?.unwrap_or(0);
        let output = PathBuf::from(raw.get("output").unwrap_or("out"));
        let horizon: f64 = raw.required("grid.horizon")?;
        let steps: usize = raw.required("grid.steps")?;
        let grid = TimeGrid::new(horizon, steps).map_err(LabError::Problem)?;

        let pde = match mode {
            Mode::Pde => Some(pde_spec(raw)?),
            _ => None,
        };
        let problem = match &pde {
            Some(spec) => spec.problem(grid).map_err(LabError::Problem)?,
            None => ode_problem(raw, grid)?,
        };

        let eps: Option<f64> = raw.parsed("solver.eps")?;
        let eps_list = raw.list("solver.eps_list")?.unwrap_or_default();
        match mode {
            Mode::Sweep if eps_list.is_empty() => return Err(LabError::MissingKey("solver.eps_list".into())),
            Mode::Sweep => {}
            _ if eps.is_none() => return Err(LabError::MissingKey("solver.eps".into())),
            _ => {}
        }
        for &e in eps.iter().chain(&eps_list) {
            if !e.is_finite() || e <= 0.0 {
                return Err(LabError::Problem(WideError::NonPositiveEpsilon(e)));
            }
        }
        let coupling = match raw.get("solver.tau_coupling").unwrap_or("fixed") {
            "fixed" => Coupling::Fixed,
            "squared" => Coupling::Squared,
            other => return Err(bad("solver.tau_coupling", format!("unknown coupling `{other}`"))),
        };
        let el_tol = raw.parsed("solver.el_tol")?.unwrap_or(1e-8);
        let reference = reference_spec(raw)?;
        if matches!(mode, Mode::Sweep | Mode::Oracle) && reference.is_none() {
            return Err(LabError::MissingKey("reference.kind".into()));
        }
        let norm = match raw.get("sweep.norm").unwrap_or("sup") {
            "sup" => Norm::Sup,
            "l2" => Norm::L2,
            other => return Err(bad("sweep.norm", format!("unknown norm `{other}`"))),
        };
        Ok(ExperimentConfig {
            mode,
            seed,
            output,
            grid,
            problem,
            pde,
            eps,
            eps_list,
            coupling,
            el_tol,
            reference,
            norm,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }
}

fn ode_problem(raw: &RawConfig, grid: TimeGrid) -> Result<WideProblem> {
    let name = raw.require("problem.energy")?;
    let params = raw.list("problem.energy_params")?.unwrap_or_default();
    let spec = EnergySpec::parse(name, &params).map_err(LabError::Problem)?;
    let mut energy = builtin_energy(spec).map_err(LabError::Problem)?;
    let forcing = raw.list("problem.forcing_params")?;
    match (raw.get("problem.forcing").unwrap_or("none"), forcing) {
        ("none", None) => {}
        ("none", Some(_)) => return Err(bad("problem.forcing_params", "given without problem.forcing")),
        (kind @ ("linear" | "constant"), Some(c)) => {
            if c.len() != energy.dim() {
                return Err(bad("problem.forcing_params", format!("expected {} values", energy.dim())));
            }
            let f = if kind == "linear" { Forcing::linear(c) } else { Forcing::constant(c) };
            energy = energy.with_forcing(f);
        }
        ("linear" | "constant", None) => return Err(LabError::MissingKey("problem.forcing_params".into())),
        (other, _) => return Err(bad("problem.forcing", format!("unknown forcing `{other}`"))),
    }
    let dp = raw.list("problem.dissipation_params")?.unwrap_or_default();
    let arity = |n: usize| {
        if dp.len() == n {
            Ok(())
        } else {
            Err(bad("problem.dissipation_params", format!("expected {n} values, got {}", dp.len())))
        }
    };
    let dissipation = match raw.require("problem.dissipation")? {
        "quadratic" => arity(1).and_then(|_| DissipationModel::quadratic(dp[0]).map_err(LabError::Problem)),
        "power_law" => arity(2).and_then(|_| DissipationModel::power_law(dp[0], dp[1]).map_err(LabError::Problem)),
        "one_homogeneous" => arity(1).and_then(|_| DissipationModel::one_homogeneous(dp[0]).map_err(LabError::Problem)),
        other => Err(bad("problem.dissipation", format!("unknown dissipation `{other}`"))),
    }?;
    let rho = raw.parsed("problem.rho")?.unwrap_or(0.0);
    let u0 = raw.list("problem.u0")?.ok_or_else(|| LabError::MissingKey("problem.u0".into()))?;
    let u1 = raw.list("problem.u1")?;
    WideProblem::new(grid, energy, dissipation, rho, u0, u1).map_err(LabError::Problem)
}

fn pde_spec(raw: &RawConfig) -> Result<PdeSpec> {
    let kind = match raw.require("pde.kind")? {
        "heat" => PdeKind::Heat,
        "wave" => PdeKind::Wave,
        other => return Err(bad("pde.kind", format!("unknown kind `{other}`"))),
    };
    let length = raw.parsed("pde.length")?.unwrap_or(1.0);
    let mesh = SpatialMesh::new(length, raw.required("pde.points")?).map_err(LabError::Problem)?;
    let param: Option<f64> = raw.parsed("pde.gamma_param")?;
    let gamma = match (raw.get("pde.gamma").unwrap_or("zero"), param) {
        ("zero", None) => Nonlinearity::Zero,
        ("linear", Some(c)) => Nonlinearity::Linear(c),
        ("power", Some(k)) if k >= 1.0 && k.fract() == 0.0 && k <= u32::MAX as f64 => Nonlinearity::Power(k as u32),
        ("power", Some(k)) => return Err(bad("pde.gamma_param", format!("{k} is not a positive integer"))),
        ("linear" | "power", None) => return Err(LabError::MissingKey("pde.gamma_param".into())),
        ("zero", Some(_)) => return Err(bad("pde.gamma_param", "zero nonlinearity takes no parameter")),
        (other, _) => return Err(bad("pde.gamma", format!("unknown nonlinearity `{other}`"))),
    };
    let nu = raw.parsed("pde.nu")?.unwrap_or(if kind == PdeKind::Heat { 1.0 } else { 0.0 });
    let damping = match (raw.parsed::<f64>("pde.damping_p")?, raw.parsed::<f64>("pde.damping_coeff")?) {
        (None, None) => None,
        (Some(p), coeff) if kind == PdeKind::Wave => Some(PowerDamping { p, coeff: coeff.unwrap_or(1.0) }),
        (Some(_), _) => return Err(bad("pde.damping_p", "power damping applies to waves only")),
        (None, Some(_)) => return Err(LabError::MissingKey("pde.damping_p".into())),
    };
    let profile = match raw.get("pde.profile").unwrap_or("mode") {
        "mode" => {
            let k: f64 = raw.parsed("pde.profile_param")?.unwrap_or(1.0);
            if !(k >= 1.0 && k.fract() == 0.0) {
                return Err(bad("pde.profile_param", format!("{k} is not a positive integer")));
            }
            Profile::Mode(k as usize)
        }
        "parabola" => Profile::Parabola,
        "zero" => Profile::Zero,
        other => return Err(bad("pde.profile", format!("unknown profile `{other}`"))),
    };
    Ok(PdeSpec { kind, mesh, gamma, nu, damping, profile })
}

fn reference_spec(raw: &RawConfig) -> Result<Option<ReferenceSpec>> {
    let Some(kind) = raw.get("reference.kind") else {
        if raw.get("reference.name").is_some() || raw.get("reference.params").is_some() {
            return Err(LabError::MissingKey("reference.kind".into()));
        }
        return Ok(None);
    };
    Ok(Some(match kind {
        "implicit_euler" => ReferenceSpec::ImplicitEuler,
        "incremental" => ReferenceSpec::Incremental,
        "leapfrog" => ReferenceSpec::Leapfrog,
        "quasistatic" => ReferenceSpec::Quasistatic,
        "catalogue" => {
            let name = raw.require("reference.name")?.to_string();
            let params = raw.list("reference.params")?.unwrap_or_default();
            analytic_catalogue(&name, &params).map_err(|e| bad("reference.name", e))?;
            ReferenceSpec::Catalogue { name, params }
        }
        other => return Err(bad("reference.kind", format!("unknown reference `{other}`"))),
    }))
}
