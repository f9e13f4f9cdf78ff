//! Runtime verifiers for the identities and estimates satisfied by WIDE
//! minimizers and their causal limits.
//!
//! All time derivatives are the backward differences used by the
//! functional, so stationarity of a computed minimizer is an algebraic
//! statement rather than an `O(tau)` one.

use crate::dissipation::DissipationModel;
use crate::error::{Result, WideError};
use crate::functional::scaled_residual;
use crate::grid::TimeGrid;
use crate::math;
use crate::minimize::minimize;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::{make_weights, WeightScheme};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One named measurement against a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticReport {
    pub eps: Option<f64>,
    pub tau: f64,
    pub checks: Vec<Check>,
}

impl DiagnosticReport {
    pub fn new(eps: Option<f64>, tau: f64) -> Self {
        DiagnosticReport { eps, tau, checks: Vec::new() }
    }
    /// Records `value <= threshold`.
    pub fn push(&mut self, name: &str, value: f64, threshold: f64) {
        let pass = value <= threshold;
        self.checks.push(Check { name: name.to_string(), value, threshold, pass });
    }
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Per-node residual norms starting at node `first`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeResiduals {
    pub first: usize,
    pub values: Vec<f64>,
}

impl NodeResiduals {
    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

fn quadratic_nu(problem: &WideProblem) -> Result<f64> {
    match *problem.dissipation() {
        DissipationModel::Quadratic { nu } => Ok(nu),
        _ => Err(WideError::WrongRegime("quadratic dissipation")),
    }
}

fn unforced_first_order(problem: &WideProblem) -> Result<f64> {
    if problem.rho() != 0.0 {
        return Err(WideError::WrongRegime("first-order problem (rho = 0)"));
    }
    if problem.energy().forcing().is_some() {
        return Err(WideError::WrongRegime("unforced energy"));
    }
    quadratic_nu(problem)
}

fn node_norm(v: &[f64]) -> f64 {
    math::max_abs(v)
}

/// Residual of the discrete Euler-Lagrange equation
/// `eps^2 rho u'''' - 2 eps rho u''' + rho u'' - eps (D'(u'))' + D'(u') + grad E(u) = f`
/// at the interior nodes `i0..N-1`.
pub fn el_residual(u: &DiscreteTrajectory, problem: &WideProblem, w: &WeightScheme) -> Result<NodeResiduals> {
    let first = problem.first_free();
    let n = problem.grid().steps();
    if n < first + 1 {
        return Err(WideError::GridTooShort { n });
    }
    let r = scaled_residual(problem, w, u)?;
    let d = problem.dim();
    let values = (first..n).map(|j| node_norm(&r[(j - first) * d..(j - first + 1) * d])).collect();
    Ok(NodeResiduals { first, values })
}

/// Discrete natural conditions at `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalConditions {
    /// `|u_N - u_{N-1}|` for `rho = 0`; `|u_tt(T)|` and
    /// `|eps^2 rho u_ttt(T) - eps D'(u_t(T))|` for `rho > 0`.
    pub values: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
}

pub fn final_conditions(u: &DiscreteTrajectory, problem: &WideProblem, w: &WeightScheme) -> FinalConditions {
    let n = problem.grid().steps();
    let tau = problem.grid().tau();
    let d = problem.dim();
    let scale = 1.0 + math::max_abs(u.values());
    let values = if problem.rho() == 0.0 || n < 3 {
        let diff: Vec<f64> = (0..d).map(|k| u.node(n)[k] - u.node(n - 1)[k]).collect();
        let threshold = 1e-12 * scale;
        let values = vec![node_norm(&diff)];
        let pass = values[0] <= threshold;
        return FinalConditions { values, threshold, pass };
    } else {
        let eps = w.epsilon();
        let rho = problem.rho();
        let mut a_n = vec![0.0; d];
        let mut a_prev = vec![0.0; d];
        let mut v_n = vec![0.0; d];
        u.acceleration(n, &mut a_n);
        u.acceleration(n - 1, &mut a_prev);
        u.velocity(n, &mut v_n);
        let diss = problem.dissipation();
        let second: Vec<f64> =
            (0..d).map(|k| eps * eps * rho * (a_n[k] - a_prev[k]) / tau - eps * diss.dphi(v_n[k])).collect();
        vec![node_norm(&a_n), node_norm(&second)]
    };
    let threshold = 10.0 * tau * scale;
    let pass = values.iter().all(|&v| v <= threshold);
    FinalConditions { values, threshold, pass }
}

/// Defects of the energy identity obtained from inner variations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerVariation {
    /// `|(eps nu/2)|du_1|^2 + nu sum tau |du_i|^2 + E(u_N) - E(u_0)|`.
    pub defect: f64,
    /// `sup_i |nu |du_i|^2 + (-(eps nu/2)(|du_i|^2 - |du_{i-1}|^2) + E(u_i) - E(u_{i-1}))/tau|`.
    pub local: f64,
}

pub fn inner_variation_identity(
    u: &DiscreteTrajectory,
    problem: &WideProblem,
    w: &WeightScheme,
) -> Result<InnerVariation> {
    let nu = unforced_first_order(problem)?;
    let grid = problem.grid();
    let (n, tau, eps, d) = (grid.steps(), grid.tau(), w.epsilon(), problem.dim());
    let energy = problem.energy();
    let mut v = vec![0.0; d];
    let speed2 = |i: usize, v: &mut [f64]| {
        u.velocity(i, v);
        math::dot(v, v)
    };
    let mut sum = 0.0;
    let mut local: f64 = 0.0;
    let mut prev = 0.0;
    for i in 1..=n {
        let s = speed2(i, &mut v);
        sum += tau * s;
        if i >= 2 {
            let de = energy.value(u.node(i)) - energy.value(u.node(i - 1));
            local = local.max((nu * s + (-(0.5 * eps * nu) * (s - prev) + de) / tau).abs());
        }
        prev = s;
    }
    let first = speed2(1, &mut v);
    let defect = (0.5 * eps * nu * first + nu * sum + energy.value(u.node(n)) - energy.value(u.node(0))).abs();
    Ok(InnerVariation { defect, local })
}

/// Integral of the piecewise-linear interpolant of `f` (nodal values, step
/// `tau`) over `[a, b]`.
fn integrate_linear(f: &[f64], tau: f64, a: f64, b: f64) -> f64 {
    let n = f.len() - 1;
    let at = |t: f64| {
        let s = (t / tau).clamp(0.0, n as f64);
        let i = (math::floor(s) as usize).min(n.saturating_sub(1));
        let th = s - i as f64;
        (i, (1.0 - th) * f[i] + th * f[(i + 1).min(n)])
    };
    let (ia, fa) = at(a);
    let (ib, fb) = at(b);
    if ia == ib {
        return 0.5 * (fa + fb) * (b - a);
    }
    let mut s = 0.5 * (fa + f[ia + 1]) * ((ia + 1) as f64 * tau - a);
    for i in ia + 1..ib {
        s += 0.5 * (f[i] + f[i + 1]) * tau;
    }
    s + 0.5 * (f[ib] + fb) * (b - ib as f64 * tau)
}

/// Monitored quantities for one `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorRow {
    pub eps: f64,
    /// `rho sum tau |d2u|^2 + nu sum tau |du|^2 + sum tau E(u)`.
    pub nested: f64,
    /// `eps^2 nu^2 sum tau |d2u|^2 + nu^2/2 sum tau |du|^2 + sum tau |grad E(u)|^2`.
    pub max_regularity: f64,
    /// `sup_t rho |du(t)|^2 + nu sum_{s <= t} tau |du(s)|^2`.
    pub serra_tilli: f64,
    /// `sup_t (1/eps) int_t^{t+eps} E(u)`, window clipped at `T`.
    pub windowed_energy: f64,
}

impl MonitorRow {
    pub fn values(&self) -> [f64; 4] {
        [self.nested, self.max_regularity, self.serra_tilli, self.windowed_energy]
    }
}

pub const MONITOR_NAMES: [&str; 4] = ["nested", "max_regularity", "serra_tilli", "windowed_energy"];

/// Monitors over a sweep, sorted by decreasing `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorTable {
    pub rows: Vec<MonitorRow>,
    /// Per monitor: every row stays within twice the largest-`eps` value.
    pub bounded: [bool; 4],
}

impl MonitorTable {
    pub fn all_bounded(&self) -> bool {
        self.bounded.iter().all(|&b| b)
    }
}

pub fn monitor_row(u: &DiscreteTrajectory, problem: &WideProblem, eps: f64) -> Result<MonitorRow> {
    let nu = quadratic_nu(problem)?;
    let rho = problem.rho();
    let grid = u.grid();
    let (n, tau, d) = (grid.steps(), grid.tau(), u.dim());
    let energy = problem.energy();
    let mut v = vec![0.0; d];
    let mut a = vec![0.0; d];
    let mut g = vec![0.0; d];
    let (mut acc2, mut vel2, mut esum, mut grad2) = (0.0, 0.0, 0.0, 0.0);
    let mut serra_tilli: f64 = 0.0;
    let mut e_nodes = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let ui = u.node(i);
        let e = energy.value(ui);
        e_nodes.push(e);
        if i >= 1 {
            u.velocity(i, &mut v);
            let s = math::dot(&v, &v);
            vel2 += tau * s;
            esum += tau * e;
            energy.gradient(ui, &mut g);
            grad2 += tau * math::dot(&g, &g);
            serra_tilli = serra_tilli.max(rho * s + nu * vel2);
        }
        if i >= 2 {
            u.acceleration(i, &mut a);
            acc2 += tau * math::dot(&a, &a);
        }
    }
    let horizon = grid.horizon();
    let mut windowed: f64 = 0.0;
    for i in 0..n {
        let t = grid.t(i);
        let end = (t + eps).min(horizon);
        windowed = windowed.max(integrate_linear(&e_nodes, tau, t, end) / eps);
    }
    Ok(MonitorRow {
        eps,
        nested: rho * acc2 + nu * vel2 + esum,
        max_regularity: eps * eps * nu * nu * acc2 + 0.5 * nu * nu * vel2 + grad2,
        serra_tilli,
        windowed_energy: windowed,
    })
}

/// Evaluates the four monitors on `(eps, u^eps)` pairs and flags growth
/// beyond twice the value at the largest `eps`.
pub fn estimate_monitors(family: &[(f64, DiscreteTrajectory)], problem: &WideProblem) -> Result<MonitorTable> {
    if family.len() < 3 {
        return Err(WideError::InsufficientSweep { need: 3, got: family.len() });
    }
    let mut rows = family.iter().map(|(e, u)| monitor_row(u, problem, *e)).collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let base = rows[0].values();
    let mut bounded = [true; 4];
    for row in &rows {
        for (k, v) in row.values().iter().enumerate() {
            if !(*v <= 2.0 * base[k] + 1e-12) {
                bounded[k] = false;
            }
        }
    }
    Ok(MonitorTable { rows, bounded })
}

/// `V^eps(v) = min W / (eps + tau)` over trajectories starting at `v`.
///
/// The normalization makes the constant trajectory give exactly
/// `(1 - q^N) E(v)`, so `0 <= V^eps(v) <= E(v)` for nonnegative data.
pub fn value_function(problem: &WideProblem, v: &[f64], eps: f64) -> Result<f64> {
    if problem.rho() != 0.0 {
        return Err(WideError::WrongRegime("first-order problem (rho = 0)"));
    }
    let fail = |e: WideError| WideError::SolveFailed { eps, reason: e.to_string() };
    let p = problem.with_initial(v.to_vec()).map_err(fail)?;
    let w = make_weights(eps, p.grid()).map_err(fail)?;
    let (_, report) = minimize(&p, &w, None).map_err(fail)?;
    Ok(report.objective / (eps + w.tau()))
}

/// Largest violation of `V(u(t_k)) + (nu/2) int_0^{t_k} |u_t|^2 <= E(u_0)`
/// over the sample nodes, with `V` computed on the remaining horizon.
pub fn dpp_defect(problem: &WideProblem, u: &DiscreteTrajectory, eps: f64, samples: &[usize]) -> Result<f64> {
    let nu = unforced_first_order(problem)?;
    let grid = problem.grid();
    let (n, tau) = (grid.steps(), grid.tau());
    let energy = problem.energy();
    let e0 = energy.value(u.node(0));
    let d = problem.dim();
    let mut v = vec![0.0; d];
    let mut dissipated = vec![0.0; n + 1];
    for i in 1..=n {
        u.velocity(i, &mut v);
        dissipated[i] = dissipated[i - 1] + 0.5 * nu * tau * math::dot(&v, &v);
    }
    let mut worst: f64 = 0.0;
    for &k in samples {
        if k + 2 > n {
            return Err(WideError::GridTooShort { n: n - k.min(n) });
        }
        let rest = TimeGrid::new(grid.horizon() - grid.t(k), n - k)?;
        let p = problem.with_grid(rest)?;
        let val = value_function(&p, u.node(k), eps)?;
        worst = worst.max(val + dissipated[k] - e0);
    }
    Ok(worst.max(0.0))
}

/// De Giorgi functional
/// `E(u_N) - E(u_0) + (nu/2) sum tau |du_i|^2 + 1/(2 nu) sum tau |grad E(u_{i-1})|^2`,
/// nonnegative for convex `E` and zero only along gradient-flow solutions in
/// the limit `tau -> 0`.
pub fn edp_residual(u: &DiscreteTrajectory, problem: &WideProblem) -> Result<f64> {
    let nu = unforced_first_order(problem)?;
    let grid = u.grid();
    let (n, tau, d) = (grid.steps(), grid.tau(), u.dim());
    let energy = problem.energy();
    let mut v = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut s = energy.value(u.node(n)) - energy.value(u.node(0));
    for i in 1..=n {
        u.velocity(i, &mut v);
        energy.gradient(u.node(i - 1), &mut g);
        s += 0.5 * tau * (nu * math::dot(&v, &v) + math::dot(&g, &g) / nu);
    }
    Ok(s)
}

/// Sampling parameters for the global stability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergeticOptions {
    pub samples: usize,
    pub seed: u64,
    pub stability_slack: f64,
    pub balance_tol: f64,
}

impl Default for EnergeticOptions {
    fn default() -> Self {
        EnergeticOptions { samples: 64, seed: 0, stability_slack: 1e-2, balance_tol: 5e-3 }
    }
}

/// Global stability (sampled) and energy balance of a rate-independent
/// trajectory with `E(t, u) = E(u) - f(t).u`.
///
/// Competitors are drawn uniformly from a box of half-width three times the
/// trajectory diameter around each node. The balance uses the right-endpoint
/// power `sum (f_i - f_{i-1}).u_i`.
pub fn energetic_checks(
    u: &DiscreteTrajectory,
    problem: &WideProblem,
    opts: &EnergeticOptions,
) -> Result<DiagnosticReport> {
    let alpha = match *problem.dissipation() {
        DissipationModel::OneHomogeneous { alpha } => alpha,
        _ => return Err(WideError::WrongRegime("1-homogeneous dissipation")),
    };
    if problem.rho() != 0.0 {
        return Err(WideError::WrongRegime("first-order problem (rho = 0)"));
    }
    let grid = u.grid();
    let (n, d) = (grid.steps(), u.dim());
    let energy = problem.energy();
    let f = problem.forcing_nodes();
    let e_t = |i: usize, x: &[f64]| energy.value(x) - math::dot(&f[i * d..(i + 1) * d], x);

    let mut diam: f64 = 0.0;
    for k in 0..d {
        let (lo, hi) = (0..=n)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| (lo.min(u.node(i)[k]), hi.max(u.node(i)[k])));
        diam = diam.max(hi - lo);
    }
    let radius = 3.0 * if diam > 0.0 { diam } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut competitor = vec![0.0; d];
    let mut violation: f64 = 0.0;
    for i in 0..=n {
        let ui = u.node(i);
        let here = e_t(i, ui);
        for _ in 0..opts.samples {
            let mut jump = 0.0;
            for k in 0..d {
                competitor[k] = ui[k] + radius * rng.gen_range(-1.0..=1.0);
                jump += (competitor[k] - ui[k]).abs();
            }
            violation = violation.max(here - e_t(i, &competitor) - alpha * jump);
        }
    }

    let mut variation = 0.0;
    let mut work = 0.0;
    for i in 1..=n {
        for k in 0..d {
            variation += alpha * (u.node(i)[k] - u.node(i - 1)[k]).abs();
            work += (f[i * d + k] - f[(i - 1) * d + k]) * u.node(i)[k];
        }
    }
    let balance = (e_t(n, u.node(n)) + variation - e_t(0, u.node(0)) + work).abs();

    let mut report = DiagnosticReport::new(None, grid.tau());
    report.push("stability", violation, opts.stability_slack);
    report.push("energy_balance", balance, opts.balance_tol);
    report.push("dissipated_variation", variation, f64::INFINITY);
    Ok(report)
}

/// The checks that apply to a computed minimizer: Euler-Lagrange residual
/// (smooth problems), natural final conditions, and for unforced linear
/// gradient flows the inner-variation identity.
pub fn standard_checks(
    u: &DiscreteTrajectory,
    problem: &WideProblem,
    w: &WeightScheme,
    el_tol: f64,
) -> Result<DiagnosticReport> {
    let mut report = DiagnosticReport::new(Some(w.epsilon()), w.tau());
    if problem.dissipation().is_smooth() {
        let r = el_residual(u, problem, w)?;
        report.push("el_residual", r.max(), el_tol);
    }
    let fc = final_conditions(u, problem, w);
    for (k, v) in fc.values.iter().enumerate() {
        let name = if k == 0 { "final_condition" } else { "final_condition_2" };
        report.push(name, *v, fc.threshold);
    }
    if let Ok(iv) = inner_variation_identity(u, problem, w) {
        report.push("inner_variation", iv.defect, f64::INFINITY);
    }
    Ok(report)
}
