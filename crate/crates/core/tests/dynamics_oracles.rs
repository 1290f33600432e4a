mod common;

use common::*;
use graphon_core::dynamics::{integrate, picard_solve};
use graphon_core::sampler::{make_latents, sample_adjacency, step_graphon};
use graphon_core::{Discretization, Kernel64, LatentScheme, Model};
use proptest::prelude::*;

#[test]
fn two_node_gap_and_opposing_constant_decay() {
    let k = Kernel64::grid(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    let tr = integrate(Model::Repelling, &k, 1.0, &[1.0, 0.0], 1.0, 1e-3).unwrap();
    let u = tr.final_state();
    assert!(((u[0] - u[1]) - (-2.0f64).exp()).abs() < 1e-9);
    assert!((u[0] + u[1] - 1.0).abs() < 1e-12);

    for n in [3, 10, 40] {
        let k = Kernel64::constant(-1.0).unwrap().discretize(n, Discretization::Midpoint).unwrap();
        let tr = integrate(Model::Opposing, &k, 1.0 / n as f64, &vec![0.7; n], 1.0, 1e-3).unwrap();
        let want = 0.7 * (-2.0f64).exp();
        assert!(tr.final_state().iter().all(|v| (v - want).abs() < 1e-9));
    }
}

#[test]
fn rk4_matches_picard_on_random_signed_instances() {
    for seed in 0..20u64 {
        let n = 2 + (seed as usize % 9);
        let horizon = 0.25 + 0.75 * ((seed % 4) as f64) / 3.0;
        let k = random_grid(n, -1.0, 1.0, 100 + seed);
        let g = random_vector(n, 200 + seed);
        let alpha = 1.0 / n as f64;
        for model in [Model::Repelling, Model::Opposing] {
            let pic = picard_solve(model, &k, alpha, &g, horizon, 64, 200).unwrap();
            let tr = integrate(model, &k, alpha, &g, horizon, 1e-3).unwrap();
            let d = sup_diff(pic.trajectory.final_state(), tr.final_state());
            assert!(d < 1e-6, "seed {seed} {model}: {d}");
        }
    }
}

#[test]
fn picard_windows_contract() {
    let k = random_grid(6, -1.0, 1.0, 5);
    let sol = picard_solve(Model::Opposing, &k, 1.0 / 6.0, &random_vector(6, 6), 1.0, 64, 200).unwrap();
    for deltas in &sol.window_deltas {
        for w in deltas.windows(2) {
            if w[0] > 1e-13 {
                assert!(w[1] <= 0.5 * w[0], "{:?}", deltas);
            }
        }
    }
}

#[test]
fn repelling_conserves_total_opinion() {
    for n in [50, 500] {
        let k = random_grid(n, -1.0, 1.0, n as u64);
        let g = random_vector(n, 1 + n as u64);
        let tr = integrate(Model::Repelling, &k, 1.0 / n as f64, &g, 5.0, 1e-2).unwrap();
        let s0: f64 = g.iter().sum();
        let scale = g.iter().map(|v| v.abs()).sum::<f64>();
        for s in &tr.states {
            let st: f64 = s.iter().sum();
            assert!((st - s0).abs() <= 1e-9 * scale, "n={n}: {st} vs {s0}");
        }
    }
}

#[test]
fn rk4_step_halving_ratio_near_sixteen() {
    let n = 200;
    let lat = make_latents(n, LatentScheme::Deterministic, 0).unwrap();
    let adj = sample_adjacency(&block_kernel(), &lat, 1.0, 3).unwrap();
    let k = step_graphon(&adj, 1.0).unwrap();
    let g: Vec<f64> = lat.points().iter().map(|x| (std::f64::consts::TAU * x).sin()).collect();
    let run = |h: f64| integrate(Model::Repelling, &k, 1.0 / n as f64, &g, 2.0, h).unwrap().final_state().to_vec();
    let (a, b, c) = (run(0.4), run(0.2), run(0.1));
    let l2 = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let ratio = l2(&a, &b) / l2(&b, &c);
    assert!((14.0..=18.0).contains(&ratio), "{ratio}");
}

#[test]
fn graphon_solution_bounded_on_horizon() {
    let k = block_kernel().discretize(64, Discretization::Midpoint).unwrap();
    let g: Vec<f64> = (0..64).map(|i| if i < 32 { 1.0 } else { -1.0 }).collect();
    let tr = integrate(Model::Repelling, &k, 1.0 / 64.0, &g, 2.0, 1e-2).unwrap();
    assert!(tr.states.iter().flatten().all(|v| v.is_finite() && v.abs() < 10.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn models_coincide_on_nonnegative_kernels(seed in any::<u64>(), n in 2usize..20) {
        let k = random_grid(n, 0.0, 1.0, seed);
        let g = random_vector(n, seed ^ 1);
        let a = integrate(Model::Repelling, &k, 0.3, &g, 0.5, 0.05).unwrap();
        let b = integrate(Model::Opposing, &k, 0.3, &g, 0.5, 0.05).unwrap();
        prop_assert_eq!(a.states, b.states);
    }

    #[test]
    fn constants_are_repelling_equilibria(seed in any::<u64>(), n in 2usize..20, c in -5.0f64..5.0) {
        let k = random_grid(n, -1.0, 1.0, seed);
        let tr = integrate(Model::Repelling, &k, 1.0 / n as f64, &vec![c; n], 1.0, 0.1).unwrap();
        prop_assert!(tr.states.iter().flatten().all(|v| (v - c).abs() <= 1e-12 * c.abs().max(1.0)));
        let z = integrate(Model::Opposing, &k, 1.0 / n as f64, &vec![0.0; n], 1.0, 0.1).unwrap();
        prop_assert!(z.states.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn integrate_is_deterministic(seed in any::<u64>()) {
        let k = random_grid(8, -1.0, 1.0, seed);
        let g = random_vector(8, seed);
        let a = integrate(Model::Opposing, &k, 0.125, &g, 1.0, 0.1).unwrap();
        let b = integrate(Model::Opposing, &k, 0.125, &g, 1.0, 0.1).unwrap();
        prop_assert_eq!(a.states, b.states);
    }
}
