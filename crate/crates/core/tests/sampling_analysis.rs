mod common;

use common::*;
use graphon_core::analysis::{degree_report, error_report, initial_condition_error, sorted_degree_gap, trajectory_error};
use graphon_core::dynamics::{integrate, sample_initial, solve_graphon};
use graphon_core::sampler::{make_latents, sample_adjacency, step_graphon};
use graphon_core::{kernel_difference, Discretization, InitialCondition, Kernel64, LatentScheme, Model};
use proptest::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn half_constant_scaled_degree_concentrates() {
    let k = Kernel64::constant(0.5).unwrap();
    let lat = make_latents(1000, LatentScheme::Deterministic, 0).unwrap();
    let hits = (0..100u64)
        .filter(|&s| {
            let adj = sample_adjacency(&k, &lat, 1.0, s).unwrap();
            let r = degree_report(&adj, &k, 0.05).unwrap();
            assert!(r.max_norm_deg >= r.avg_norm_deg && r.max_norm_deg <= 999.0 / 1000.0);
            (r.scaled_max - 0.5).abs() <= 0.06
        })
        .count();
    assert!(hits >= 95, "{hits}");
}

#[test]
fn sorted_gap_within_gamma_on_block_kernel() {
    let k = block_kernel();
    let hits = (0..100u64)
        .filter(|&s| {
            let lat = make_latents(500, LatentScheme::Stochastic, s).unwrap();
            let adj = sample_adjacency(&k, &lat, 0.5, s).unwrap();
            let r = degree_report(&adj, &k, 0.05).unwrap();
            sorted_degree_gap(&adj, &k).unwrap() <= r.bound_gamma
        })
        .count();
    assert!(hits >= 92, "{hits}");
}

#[test]
fn graph_error_shrinks_with_n() {
    let k = block_kernel();
    let g = InitialCondition::analytic(|x: f64| x).unwrap();
    let m = 1600;
    let reference = solve_graphon(Model::Repelling, &k, &g, 2.0, 0.05, m).unwrap();
    let err_at = |n: usize, seed: u64| {
        let lat = make_latents(n, LatentScheme::Stochastic, seed).unwrap();
        let adj = sample_adjacency(&k, &lat, 1.0, seed).unwrap();
        let wn = step_graphon(&adj, 1.0).unwrap();
        let u = integrate(Model::Repelling, &wn, 1.0 / n as f64, &sample_initial(&g, &lat).unwrap(), 2.0, 0.05).unwrap();
        *trajectory_error(&u, &reference).unwrap().l2_errors.last().unwrap()
    };
    let small = median((0..10).map(|s| err_at(50, s)).collect());
    let large = median((0..10).map(|s| err_at(200, s)).collect());
    assert!(large < small, "{large} vs {small}");
}

#[test]
fn report_bound_holds_and_is_nondecreasing() {
    let k = block_kernel();
    let m = 400;
    let g = InitialCondition::analytic(|x: f64| (std::f64::consts::TAU * x).sin()).unwrap();
    let refk = k.discretize(m, Discretization::Midpoint).unwrap();
    for model in [Model::Repelling, Model::Opposing] {
        let reference = solve_graphon(model, &k, &g, 1.0, 0.05, m).unwrap();
        let lat = make_latents(100, LatentScheme::Stochastic, 1).unwrap();
        let adj = sample_adjacency(&k, &lat, 0.5, 1).unwrap();
        let wn = step_graphon(&adj, 1.0).unwrap();
        let n_alpha = 1.0 / 0.5;
        let u = integrate(model, &wn, n_alpha / 100.0, &sample_initial(&g, &lat).unwrap(), 1.0, 0.05).unwrap();
        let r = error_report(&u, &reference, &refk, &wn, n_alpha).unwrap();
        assert!(r.bound_values.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.l2_errors.iter().all(|&e| e >= 0.0));
        assert!(r.min_margin >= 0.0, "{model}: {}", r.min_margin);
        assert_eq!(r.g_error, r.l2_errors[0]);
        assert_eq!(r.op_norm_diff_pos.is_some(), model == Model::Opposing);
    }
}

#[test]
fn rescaled_sample_approaches_kernel() {
    let k = block_kernel();
    let norm_at = |n: usize| {
        let lat = make_latents(n, LatentScheme::Deterministic, 0).unwrap();
        let adj = sample_adjacency(&k, &lat, 1.0, 17).unwrap();
        let wn = step_graphon(&adj, 1.0).unwrap();
        kernel_difference(&wn, &k, n).unwrap().operator_norm().unwrap()
    };
    assert!(norm_at(400) < norm_at(50));
}

#[test]
fn initial_condition_error_decays() {
    let g = InitialCondition::analytic(|x: f64| (std::f64::consts::TAU * x).sin()).unwrap();
    let med = |n: usize| {
        median(
            (0..20u64)
                .map(|s| {
                    let lat = make_latents(n, LatentScheme::Stochastic, s).unwrap();
                    initial_condition_error(&g, lat.points(), 4).unwrap()
                })
                .collect(),
        )
    };
    let (a, b) = (med(100), med(1600));
    assert!(b < a / 2.0, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn c_u_t_has_prefix_property(seed in any::<u64>(), cut in 1usize..20) {
        let k = random_grid(12, -1.0, 1.0, seed);
        let g = random_vector(12, seed ^ 5);
        let full = integrate(Model::Opposing, &k, 0.5, &g, 2.0, 0.1).unwrap();
        let mut prefix = full.clone();
        prefix.times.truncate(cut + 1);
        prefix.states.truncate(cut + 1);
        let a = trajectory_error(&full, &full).unwrap().c_u_t;
        let b = trajectory_error(&prefix, &prefix).unwrap().c_u_t;
        prop_assert!(b <= a);
    }

    #[test]
    fn sampling_is_reproducible_and_sign_consistent(seed in any::<u64>(), eps in 0.05f64..1.0) {
        let k = block_kernel();
        let lat = make_latents(40, LatentScheme::Stochastic, seed).unwrap();
        let a = sample_adjacency(&k, &lat, eps, seed).unwrap();
        let b = sample_adjacency(&k, &lat, eps, seed).unwrap();
        prop_assert_eq!(a.to_dense(), b.to_dense());
        let x = lat.points();
        for (i, j, s) in a.edges() {
            let w = k.evaluate(x[i], x[j]).unwrap();
            prop_assert_eq!(s as f64, w.signum());
        }
    }
}
