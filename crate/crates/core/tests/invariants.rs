mod common;

use common::*;
use proptest::prelude::*;
use wide_core::oracles::*;
use wide_core::*;

fn energies() -> Vec<EnergyModel> {
    vec![
        builtin_energy(EnergySpec::Quadratic(vec![2.0, 0.5, 0.5, 1.0])).unwrap(),
        builtin_energy(EnergySpec::SqrtSelection).unwrap(),
        builtin_energy(EnergySpec::Power { q: 3.0, dim: 2 }).unwrap(),
        builtin_energy(EnergySpec::Power { q: 4.0, dim: 1 }).unwrap(),
        builtin_energy(EnergySpec::DoubleWell { dim: 3 }).unwrap(),
    ]
}

fn dissipations() -> impl Strategy<Value = DissipationModel> {
    prop_oneof![
        (0.0f64..5.0).prop_map(|nu| DissipationModel::quadratic(nu).unwrap()),
        (1.2f64..4.0, 0.1f64..3.0).prop_map(|(p, c)| DissipationModel::power_law(p, c).unwrap()),
        (0.1f64..3.0).prop_map(|a| DissipationModel::one_homogeneous(a).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradients_match_finite_differences(x in proptest::collection::vec(0.2f64..2.0, 3), s in proptest::collection::vec(prop_oneof![Just(-1.0), Just(1.0)], 3)) {
        for e in energies() {
            let d = e.dim();
            let u: Vec<f64> = (0..d).map(|k| x[k] * if e.name() == "sqrt_selection" { 1.0 } else { s[k] }).collect();
            let mut g = vec![0.0; d];
            e.gradient(&u, &mut g);
            let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-12);
            for k in 0..d {
                let h = 1e-6 * (1.0 + u[k].abs());
                let (mut a, mut b) = (u.clone(), u.clone());
                a[k] += h;
                b[k] -= h;
                let fd = (e.value(&a) - e.value(&b)) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() <= 1e-6 * scale, "{}: {} vs {}", e.name(), fd, g[k]);
            }
        }
    }

    #[test]
    fn weights_are_geometric(eps in 1e-6f64..10.0, n in 2usize..200) {
        let g = grid(1.0, n);
        let w = make_weights(eps, &g).unwrap();
        let q = eps / (eps + g.tau());
        prop_assert_eq!(w.weight(0), 1.0);
        for i in 1..=n {
            let ratio = w.weight(i) / w.weight(i - 1);
            prop_assert!((ratio - q).abs() <= 8.0 * f64::EPSILON * q);
            prop_assert!(w.weight(i) < w.weight(i - 1) || w.weight(i) == 0.0);
        }
    }

    #[test]
    fn smaller_eps_decouples_the_future(tau in 1e-3f64..1.0) {
        let g = TimeGrid::with_step(2.0 * tau.max(0.5), tau).unwrap();
        let e1 = |eps| make_weights(eps, &g).unwrap().weight(1);
        prop_assert!(e1(1e-2) > e1(1e-4));
        prop_assert!(e1(1e-10) < 1e-6);
    }

    #[test]
    fn dissipation_is_convex_and_vanishes_at_rest(d in dissipations(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        prop_assert_eq!(d.phi(0.0), 0.0);
        prop_assert!(d.phi(a) >= 0.0);
        let mid = d.phi(0.5 * (a + b));
        prop_assert!(mid <= 0.5 * (d.phi(a) + d.phi(b)) + 1e-12 * (1.0 + d.phi(a) + d.phi(b)));
    }

    #[test]
    fn one_homogeneous_scales(alpha in 0.1f64..3.0, v in -5.0f64..5.0, c in 0.0f64..10.0) {
        let d = DissipationModel::one_homogeneous(alpha).unwrap();
        prop_assert!((d.phi(c * v) - c * d.phi(v)).abs() <= 1e-12 * (1.0 + c * d.phi(v)));
    }

    #[test]
    fn prox_satisfies_its_inclusion(d in dissipations(), v in -5.0f64..5.0, s in 0.01f64..5.0) {
        let p = d.prox_scalar(v, s);
        let dist = d.subgradient(p).distance((v - p) / s);
        prop_assert!(dist <= 1e-9 * (1.0 + v.abs() / s), "{dist}");
    }

    #[test]
    fn prox_beats_a_grid(d in dissipations(), v in -3.0f64..3.0, s in 0.05f64..3.0) {
        let p = d.prox_scalar(v, s);
        let obj = |x: f64| s * d.phi(x) + 0.5 * (x - v) * (x - v);
        let best = (-6000..=6000).map(|k| k as f64 * 1e-3).fold(f64::INFINITY, |m, x| m.min(obj(x)));
        prop_assert!(obj(p) <= best + 1e-6);
    }

    /// Every oracle is causal: changing the load after a node leaves the
    /// computed states up to that node untouched.
    #[test]
    fn oracle_causality(cut in 5usize..45, bump in 0.1f64..3.0) {
        let split = (cut as f64 + 0.5) / 50.0;
        let make = |b: f64, rho: f64, diss: DissipationModel| {
            let f = Forcing::new(move |t, o| o[0] = (3.0 * t).sin() + if t > split { b } else { 0.0 });
            let e = EnergyModel::isotropic(1.0, 1).with_forcing(f);
            let u1 = (rho > 0.0).then(|| vec![0.0]);
            WideProblem::new(grid(1.0, 50), e, diss, rho, vec![0.2], u1).unwrap()
        };
        let quad = DissipationModel::quadratic(1.0).unwrap();
        let play = DissipationModel::one_homogeneous(0.3).unwrap();
        let same = |a: &ReferenceSolution, b: &ReferenceSolution| {
            let (a, b) = (a.trajectory().unwrap(), b.trajectory().unwrap());
            (0..=cut).all(|i| a.node(i) == b.node(i))
        };
        prop_assert!(same(&implicit_euler(&make(0.0, 0.0, quad)).unwrap(), &implicit_euler(&make(bump, 0.0, quad)).unwrap()));
        prop_assert!(same(
            &incremental_minimization(&make(0.0, 0.0, play)).unwrap(),
            &incremental_minimization(&make(bump, 0.0, play)).unwrap()
        ));
        prop_assert!(same(&leapfrog_wave(&make(0.0, 1.0, quad)).unwrap(), &leapfrog_wave(&make(bump, 1.0, quad)).unwrap()));
    }
}
