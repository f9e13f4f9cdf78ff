use super::{MinimizeReport, SolverKind};
use crate::error::{Result, WideError};
use crate::functional::Ctx;
use crate::math;
use crate::problem::WideProblem;
use crate::trajectory::DiscreteTrajectory;
use crate::weights::WeightScheme;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DIM: usize = 12;
const STARTS: usize = 24;

/// Derivative-free multistart minimization for tiny instances.
pub fn brute_force(problem: &WideProblem, w: &WeightScheme, tol: f64) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    brute_force_seeded(problem, w, tol, 0)
}

/// Nelder-Mead from a deterministic set of random starts; the lowest
/// objective wins, near-ties go to the lexicographically smallest point.
pub fn brute_force_seeded(
    problem: &WideProblem,
    w: &WeightScheme,
    tol: f64,
    seed: u64,
) -> Result<(DiscreteTrajectory, MinimizeReport)> {
    let ctx = Ctx::new(problem, w)?;
    let n = ctx.free_len();
    if n > MAX_DIM {
        return Err(WideError::DimensionTooLarge { dim: n, limit: MAX_DIM });
    }
    let rest = problem.rest_trajectory();
    let off = ctx.i0 * ctx.d;
    let base: Vec<f64> = rest.values()[off..].to_vec();
    let scale = 1.0 + math::max_abs(&problem.prefix()) + math::max_abs(&ctx.f);
    let mut buf = rest.values().to_vec();
    let mut f = |x: &[f64]| -> f64 {
        buf[off..].copy_from_slice(x);
        let v = ctx.objective(&buf).0;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evals = 0;
    for s in 0..STARTS {
        let mut x0 = base.clone();
        if s > 0 {
            for x in x0.iter_mut() {
                *x += scale * rng.gen_range(-1.0..1.0);
            }
        }
        let (mut fx, mut x) = (f(&x0), x0);
        let mut step = 0.5 * scale;
        for _ in 0..50 {
            let (fn_, xn, e) = nelder_mead(&mut f, &x, step, tol);
            evals += e;
            let gain = fx - fn_;
            if fn_ <= fx {
                fx = fn_;
                x = xn;
            }
            if gain <= tol * 1e-3 * (1.0 + fx.abs()) {
                break;
            }
            step = (step * 0.5).max(1e-6 * scale);
        }
        best = match best {
            None => Some((fx, x)),
            Some((fb, xb)) => {
                if fx < fb - 1e-12 || ((fx - fb).abs() <= 1e-12 && lex_less(&x, &xb)) {
                    Some((fx, x))
                } else {
                    Some((fb, xb))
                }
            }
        };
    }
    let (fb, xb) = best.expect("at least one start");
    let mut u = rest;
    u.values_mut()[off..].copy_from_slice(&xb);
    let report = MinimizeReport {
        objective: fb,
        iterations: evals,
        residual: 0.0,
        tolerance: tol,
        solver: SolverKind::BruteForce,
        converged: true,
        inclusion: None,
    };
    Ok((u, report))
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Adaptive Nelder-Mead (dimension-dependent coefficients).
fn nelder_mead(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64) -> (f64, Vec<f64>, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let max_evals = 4000 * (n + 1);
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        let size = pts[1..]
            .iter()
            .fold(0.0_f64, |m, p| m.max(p.iter().zip(&pts[0]).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))));
        if spread <= 1e-3 * tol * (1.0 + vals[0].abs()) && size <= 1e-9 * (1.0 + math::max_abs(&pts[0])) {
            break;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &pts[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / nf;
            }
        }
        let along = |coef: f64, t: &mut [f64], worst: &[f64], c: &[f64]| {
            for i in 0..n {
                t[i] = c[i] + coef * (worst[i] - c[i]);
            }
        };
        along(-alpha, &mut trial, &pts[n], &centroid);
        let fr = f(&trial);
        evals += 1;
        if fr < vals[0] {
            let refl = trial.clone();
            along(-alpha * beta, &mut trial, &pts[n], &centroid);
            let fe = f(&trial);
            evals += 1;
            if fe < fr {
                pts[n] = trial.clone();
                vals[n] = fe;
            } else {
                pts[n] = refl;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = trial.clone();
            vals[n] = fr;
        } else {
            let outside = fr < vals[n];
            let coef = if outside { -alpha * gamma } else { gamma };
            along(coef, &mut trial, &pts[n], &centroid);
            let fc = f(&trial);
            evals += 1;
            if (outside && fc <= fr) || (!outside && fc < vals[n]) {
                pts[n] = trial.clone();
                vals[n] = fc;
            } else {
                let best = pts[0].clone();
                for j in 1..=n {
                    for i in 0..n {
                        pts[j][i] = best[i] + delta * (pts[j][i] - best[i]);
                    }
                    vals[j] = f(&pts[j]);
                }
                evals += n;
            }
        }
    }
    let mut bi = 0;
    for i in 1..=n {
        if vals[i] < vals[bi] {
            bi = i;
        }
    }
    (vals[bi], pts[bi].clone(), evals)
}
