//! Acceptance run: one line per criterion, exit status 1 if any fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use wide_core::causal::{self, Norm, TauCoupling};
use wide_core::diagnostics::*;
use wide_core::minimize::{brute_force, minimize};
use wide_core::oracles::*;
use wide_core::pde::*;
use wide_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = out.pass && in_time;
    let limit = budget.map_or(String::new(), |b| format!(" / budget {b:.0?}"));
    println!("{} {:>2} {}: {} [{elapsed:.2?}{limit}]", if pass { "PASS" } else { "FAIL" }, id, name, out.detail);
    pass
}

fn scalar(lambda: f64, nu: f64, t: f64, n: usize, u0: f64) -> WideProblem {
    WideProblem::new(
        TimeGrid::new(t, n).unwrap(),
        EnergyModel::isotropic(lambda, 1),
        DissipationModel::quadratic(nu).unwrap(),
        0.0,
        vec![u0],
        None,
    )
    .unwrap()
}

fn play(n: usize) -> WideProblem {
    WideProblem::new(
        TimeGrid::new(2.0, n).unwrap(),
        EnergyModel::isotropic(1.0, 1).with_forcing(Forcing::linear(vec![1.0])),
        DissipationModel::one_homogeneous(1.0).unwrap(),
        0.0,
        vec![0.0],
        None,
    )
    .unwrap()
}

fn solve(p: &WideProblem, eps: f64) -> DiscreteTrajectory {
    minimize(p, &make_weights(eps, p.grid()).unwrap(), None).unwrap().0
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    math::linear_fit(&lx, &ly).0
}

fn matrix_reproduction() -> Outcome {
    let (lambda, eps, u0) = (1.0, 0.1, 1.0);
    let p = scalar(lambda, 1.0, 0.3, 3, u0);
    let tau = p.grid().tau();
    let w = make_weights(eps, p.grid()).unwrap();
    let s = assemble_linear_system(&p, &w).unwrap();
    let a = &s.matrix;
    let diag = 2.0 * eps + tau + lambda * tau * tau;
    let want = [[diag, -eps, 0.0], [-eps - tau, diag, -eps], [0.0, -eps, eps]];
    let mut exact = a.size() == 3;
    for (i, row) in want.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            exact &= a.get(i, j).to_bits() == v.to_bits();
        }
    }
    let b = [eps * u0 + tau * u0, 0.0, 0.0];
    exact &= s.rhs.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    outcome(exact, format!("diag {diag}, rhs {:?}, bitwise {}", s.rhs, if exact { "equal" } else { "different" }))
}

fn fixed_tau_limit() -> Outcome {
    let p = scalar(1.0, 1.0, 1.0, 10, 1.0);
    let euler = implicit_euler(&p).unwrap();
    let r = causal::sweep(&p, &[1e-1, 1e-2, 1e-3, 1e-4], &euler, Norm::Sup).unwrap();
    let k = r.fit.exponent().unwrap_or(f64::NAN);
    outcome((k - 1.0).abs() <= 0.15, format!("exponent {k:.4} (target 1 +- 0.15), errors {}", sci(&r.errors())))
}

fn continuous_rate() -> Outcome {
    let r = causal::rate_report(1.0, 1.0, 1.0, 1.0, &[1e-2, 1e-3, 1e-4], TauCoupling::Squared).unwrap();
    let errs: Vec<f64> = r.rows.iter().map(|x| x.sup_error).collect();
    let k = r.fit.exponent().unwrap_or(f64::INFINITY);
    outcome(r.meets(0.4), format!("exponent {k:.4} (>= 0.4), errors {}", sci(&errs)))
}

fn natural_final_condition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let lambda = rng.gen_range(0.0..10.0);
        let eps = 10f64.powf(rng.gen_range(-5.0..0.0));
        let n = rng.gen_range(2..2000);
        let u0 = rng.gen_range(0.1..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let p = scalar(lambda, 1.0, 1.0, n, u0);
        let u = solve(&p, eps);
        let gap = (u.node(n)[0] - u.node(n - 1)[0]).abs() / math::max_abs(u.values());
        worst = worst.max(gap);
    }
    outcome(worst <= 1e-12, format!("max |u_N - u_(N-1)| / max|u| = {worst:.3e} over 100 triples"))
}

fn selection_principle() -> Outcome {
    let p = WideProblem::new(
        TimeGrid::new(1.0, 10_000).unwrap(),
        builtin_energy(EnergySpec::SqrtSelection).unwrap(),
        DissipationModel::quadratic(1.0).unwrap(),
        0.0,
        vec![0.0],
        None,
    )
    .unwrap();
    let u = solve(&p, 1e-3);
    let mut err: f64 = 0.0;
    for i in 2000..=10_000 {
        let t = p.grid().t(i);
        err = err.max((u.node(i)[0] - t * t).abs());
    }
    outcome(err <= 0.1, format!("relative sup error vs t^2 on [0.2, 1] = {err:.3e}"))
}

fn de_giorgi_wave() -> Outcome {
    let mesh = SpatialMesh::new(1.0, 64).unwrap();
    let factory = discretize_wave(&mesh, Nonlinearity::Power(2), 0.0, None).unwrap();
    let u0 = mode_initializer(&mesh, 1).unwrap();
    let p = factory.problem(TimeGrid::new(1.0, 1000).unwrap(), u0, vec![0.0; 64]).unwrap();
    let reference = leapfrog_wave(&p).unwrap();
    let mut init: Option<DiscreteTrajectory> = None;
    let mut dist = Vec::new();
    for eps in [1e-2, 3e-3, 1e-3] {
        let w = make_weights(eps, p.grid()).unwrap();
        let (u, _) = minimize(&p, &w, init.as_ref()).unwrap();
        dist.push(mesh.space_time_distance(&u, reference.trajectory().unwrap()));
        init = Some(u);
    }
    let decreasing = dist.windows(2).all(|w| w[1] < w[0]);
    let last = *dist.last().unwrap();
    outcome(decreasing && last <= 5e-2, format!("L2 distances to leapfrog {}", sci(&dist)))
}

fn rate_independent_play() -> Outcome {
    let p = play(2000);
    let exact = analytic_catalogue("play", &[1.0]).unwrap();
    let r = causal::sweep(&p, &[1e-2, 1e-3, 1e-4], &exact, Norm::Sup).unwrap();
    let e = r.errors();
    let decreasing = e.windows(2).all(|w| w[1] < w[0]);
    let u = solve(&p, 1e-4);
    let checks = energetic_checks(&u, &p, &EnergeticOptions::default()).unwrap();
    let stab = checks.get("stability").unwrap().value;
    let bal = checks.get("energy_balance").unwrap().value;
    outcome(
        decreasing && e[2] <= 2e-2 && checks.passed(),
        format!("sup errors {}, stability violation {stab:.2e}, balance defect {bal:.2e}", sci(&e)),
    )
}

fn random_problem(rng: &mut ChaCha8Rng, k: usize) -> (WideProblem, f64) {
    let eps = 10f64.powf(rng.gen_range(-2.0..0.0));
    let t = rng.gen_range(0.3..2.0);
    let u0 = rng.gen_range(-1.5..1.5);
    let slope = rng.gen_range(-1.0..1.0);
    let energy = match k % 3 {
        0 => EnergyModel::isotropic(rng.gen_range(0.0..3.0), 1),
        1 => builtin_energy(EnergySpec::Power { q: 4.0, dim: 1 }).unwrap(),
        _ => builtin_energy(EnergySpec::Power { q: 3.0, dim: 1 }).unwrap(),
    }
    .with_forcing(Forcing::linear(vec![slope]));
    let p = match k % 5 {
        0 => WideProblem::new(
            TimeGrid::new(t, rng.gen_range(2..=12)).unwrap(),
            energy,
            DissipationModel::quadratic(rng.gen_range(0.2..2.0)).unwrap(),
            0.0,
            vec![u0],
            None,
        ),
        1 => WideProblem::new(
            TimeGrid::new(t, rng.gen_range(2..=10)).unwrap(),
            energy,
            DissipationModel::power_law(rng.gen_range(1.5..3.0), 1.0).unwrap(),
            0.0,
            vec![u0],
            None,
        ),
        2 => WideProblem::new(
            TimeGrid::new(t, rng.gen_range(2..=10)).unwrap(),
            energy,
            DissipationModel::one_homogeneous(rng.gen_range(0.1..1.0)).unwrap(),
            0.0,
            vec![u0],
            None,
        ),
        3 => WideProblem::new(
            TimeGrid::new(t, rng.gen_range(3..=12)).unwrap(),
            energy,
            DissipationModel::quadratic(rng.gen_range(0.0..1.0)).unwrap(),
            rng.gen_range(0.2..2.0),
            vec![u0],
            Some(vec![rng.gen_range(-1.0..1.0)]),
        ),
        _ => {
            let a = rng.gen_range(0.5..2.0);
            let b = rng.gen_range(-0.4..0.4);
            let e = builtin_energy(EnergySpec::Quadratic(vec![a, b, b, 1.0])).unwrap();
            WideProblem::new(
                TimeGrid::new(t, rng.gen_range(2..=6)).unwrap(),
                e,
                DissipationModel::quadratic(1.0).unwrap(),
                0.0,
                vec![u0, -u0],
                None,
            )
        }
    }
    .unwrap();
    (p, eps)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for k in 0..50 {
        let (p, eps) = random_problem(&mut rng, k);
        let w = make_weights(eps, p.grid()).unwrap();
        let main = minimize(&p, &w, None).map(|r| r.1.objective);
        let brute = brute_force(&p, &w, 1e-12).map(|r| r.1.objective);
        match (main, brute) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / (1.0 + a.abs())),
            _ => failures += 1,
        }
    }
    outcome(
        failures == 0 && worst <= 1e-5,
        format!("max relative objective gap {worst:.3e} over 50 problems, {failures} solver failures"),
    )
}

fn estimate_monitors_bounded() -> Outcome {
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let lin = scalar(1.0, 1.0, 1.0, 1000, 1.0);
    let dw = WideProblem::new(
        TimeGrid::new(1.0, 1000).unwrap(),
        builtin_energy(EnergySpec::DoubleWell { dim: 1 }).unwrap(),
        DissipationModel::quadratic(1.0).unwrap(),
        0.0,
        vec![0.3],
        None,
    )
    .unwrap();
    let mut ratios = Vec::new();
    let mut ok = true;
    for p in [&lin, &dw] {
        let family: Vec<_> = eps.iter().map(|&e| (e, solve(p, e))).collect();
        let t = estimate_monitors(&family, p).unwrap();
        ok &= t.all_bounded();
        let base = t.rows[0].values();
        let worst =
            t.rows.iter().flat_map(|r| r.values().into_iter().zip(base).map(|(v, b)| v / b)).fold(0.0, f64::max);
        ratios.push(worst);
    }
    outcome(ok, format!("largest monitor / largest-eps value: linear {:.3}, double well {:.3}", ratios[0], ratios[1]))
}

fn value_function_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ok = true;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..20 {
        let lambda = rng.gen_range(0.1..5.0);
        let v = rng.gen_range(-3.0..3.0);
        let eps = 10f64.powf(rng.gen_range(-3.0..0.0));
        let p = scalar(lambda, 1.0, 1.0, 200, 0.0);
        let val = value_function(&p, &[v], eps).unwrap();
        let e = 0.5 * lambda * v * v;
        ok &= val >= 0.0 && val <= e;
        worst = worst.max(val / e);
    }
    let p = scalar(1.0, 1.0, 1.0, 10_000, 1.0);
    let u = solve(&p, 1e-2);
    let d = dpp_defect(&p, &u, 1e-2, &[0, 2000, 5000, 8000]).unwrap();
    outcome(ok && d <= 1e-3, format!("max V/E over 20 pairs {worst:.4}, integrated DPP defect {d:.3e}"))
}

fn identity_convergence() -> Outcome {
    let taus = [1e-2, 1e-3, 1e-4];
    let steps = [100, 1000, 10_000];
    let inner: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let p = scalar(1.0, 1.0, 1.0, n, 1.0);
            let w = make_weights(0.1, p.grid()).unwrap();
            inner_variation_identity(&solve(&p, 0.1), &p, &w).unwrap().defect
        })
        .collect();
    let edp: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let p = scalar(1.0, 1.0, 1.0, n, 1.0);
            edp_residual(&DiscreteTrajectory::sample(*p.grid(), 1, |t, o| o[0] = (-t).exp()), &p).unwrap()
        })
        .collect();
    let balance: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let p = play(2 * n);
            let u = DiscreteTrajectory::sample(*p.grid(), 1, |t, o| o[0] = (t - 1.0).max(0.0));
            energetic_checks(&u, &p, &EnergeticOptions::default()).unwrap().get("energy_balance").unwrap().value
        })
        .collect();
    let s = [slope(&taus, &inner), slope(&taus, &edp), slope(&taus, &balance)];
    outcome(
        s.iter().all(|&x| x >= 0.8),
        format!("slopes: inner variation {:.3}, edp {:.3}, energy balance {:.3}", s[0], s[1], s[2]),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "linear system reproduction", Some(Duration::from_millis(1)), matrix_reproduction),
        run(2, "causal limit at fixed tau", Some(secs(1)), fixed_tau_limit),
        run(3, "continuous rate", Some(secs(30)), continuous_rate),
        run(4, "natural final condition", None, natural_final_condition),
        run(5, "selection principle", Some(secs(60)), selection_principle),
        run(6, "cubic wave causal limit", Some(secs(300)), de_giorgi_wave),
        run(7, "rate-independent play", None, rate_independent_play),
        run(8, "oracle equivalence", None, oracle_equivalence),
        run(9, "estimate monitors", None, estimate_monitors_bounded),
        run(10, "value function", None, value_function_bounds),
        run(11, "identity convergence", None, identity_convergence),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
