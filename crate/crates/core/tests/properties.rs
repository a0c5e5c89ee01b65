use memolab_core::datagen::{generate, rescale, DatasetKind, DatasetSpec};
use memolab_core::dynsys::{iterate, median_pairwise_distance, recovery_probability};
use memolab_core::linear_fc::{gd_linear_closed_form, gd_linear_with, min_norm_projection, top_eigenvalue, StopRule};
use memolab_core::net_engine::linear_map;
use memolab_core::nonlinear_fc::{adaptive_gd, check_assumption1, AdaptiveGdConfig};
use memolab_core::rng::{gaussian_vec, seeded};
use memolab_core::robustness::{construct_interpolant, coordinatewise, interpolant_attractor_check, to_relu_network};
use memolab_core::{Activation, TrainingSet};
use proptest::prelude::*;

fn gaussian_set(n: usize, d: usize, seed: u64) -> TrainingSet {
    let mut rng = seeded(seed);
    TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, d)).collect()).unwrap()
}

fn sorted_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..0.98, 1..6).prop_filter_map("points too close", |mut p| {
        p.sort_by(f64::total_cmp);
        p.windows(2).all(|w| w[1] - w[0] > 1e-3).then_some(p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projector_is_idempotent_and_symmetric(n in 1usize..4, extra in 0usize..5, seed in any::<u64>()) {
        let ts = gaussian_set(n, n + extra, seed);
        let p = min_norm_projection(&ts, 1e-10).unwrap();
        prop_assert!(p.matmul(&p).unwrap().sub(&p).unwrap().max_abs() < 1e-10);
        prop_assert!(p.asymmetry() < 1e-12);
        for x in ts.examples() {
            let px = p.mul_vec(x).unwrap();
            prop_assert!(px.iter().zip(x).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn closed_form_tracks_recurrence(n in 1usize..4, d in 4usize..8, steps in 1usize..200, seed in any::<u64>()) {
        let ts = gaussian_set(n, d, seed);
        let gamma = 0.5 / top_eigenvalue(&ts);
        let run = gd_linear_with(&ts, gamma, StopRule::fixed(steps)).unwrap();
        let closed = gd_linear_closed_form(&ts, gamma, steps as u64).unwrap();
        prop_assert!(run.weights.sub(&closed).unwrap().frobenius_norm() < 1e-11);
    }

    #[test]
    fn interpolant_is_within_epsilon_and_continuous(points in sorted_points(), eps in 1e-4f64..0.5) {
        let f = construct_interpolant(&points, eps).unwrap();
        prop_assert!(f.epsilon <= eps);
        prop_assert!(f.continuity_gap() < 1e-12);
        prop_assert!(f.max_deviation(0.0, 1.0, 2_000) <= f.epsilon * (1.0 + 1e-9));
        for &x in &f.points {
            prop_assert!((f.eval(x) - x).abs() < 1e-12);
            prop_assert!(f.slope_at(x) < 1.0);
        }
        prop_assert!((f.eval(0.0)).abs() < 1e-12 && (f.eval(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relu_network_reproduces_interpolant(points in sorted_points(), eps in 1e-3f64..0.3) {
        let f = construct_interpolant(&points, eps).unwrap();
        let net = to_relu_network(std::slice::from_ref(&f)).unwrap();
        prop_assert_eq!(net.layers()[0].output_len(), 2 * points.len() + 1);
        for k in 0..=200 {
            let x = k as f64 / 200.0;
            prop_assert!((net.forward(&[x]).unwrap()[0] - f.eval(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn generated_images_lie_in_unit_interval(s in 1usize..5, n in 1usize..4, seed in any::<u64>()) {
        for kind in [DatasetKind::GaussianImages { s, n }, DatasetKind::UniformImages { s, n }] {
            let ts = generate(&DatasetSpec::new(kind, seed)).unwrap();
            prop_assert_eq!(ts.dim(), s * s);
            prop_assert!(ts.examples().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn rescaled_data_satisfies_sigmoid_assumption(n in 1usize..3, seed in any::<u64>()) {
        let ts = generate(&DatasetSpec::new(DatasetKind::UniformImages { s: 2, n }, seed)).unwrap();
        let ts = rescale(&ts, 0.05, 0.45).unwrap();
        prop_assert!(check_assumption1(&ts, Activation::Sigmoid).passed());
    }
}

#[test]
fn adaptive_gd_fits_preimages() {
    let ts = TrainingSet::new(vec![vec![0.1, 0.3, 0.2, 0.4], vec![0.25, 0.05, 0.35, 0.15]]).unwrap();
    let cfg = AdaptiveGdConfig::from_data(&ts, Activation::Sigmoid, 0.5).unwrap();
    let run = adaptive_gd(&ts, Activation::Sigmoid, cfg).unwrap();
    assert!(run.converged && run.max_preimage_residual < 1e-4);
}

#[test]
fn coordinatewise_network_is_exact_in_two_dimensions() {
    let train = vec![vec![0.2, 0.7], vec![0.6, 0.3]];
    let fs = coordinatewise(&train, 0.05).unwrap();
    let net = to_relu_network(&fs).unwrap();
    assert_eq!(net.layers()[0].output_len(), 10);
    for x in &train {
        let y = net.forward(x).unwrap();
        assert!(y.iter().zip(x).all(|(a, b)| (a - b).abs() < 1e-12));
    }
    for k in 0..50 {
        let x = [k as f64 / 49.0, 1.0 - k as f64 / 49.0];
        let y = net.forward(&x).unwrap();
        assert!((y[0] - fs[0].eval(x[0])).abs() < 1e-12 && (y[1] - fs[1].eval(x[1])).abs() < 1e-12);
    }
}

#[test]
fn interpolant_captures_uniform_starts() {
    let f = construct_interpolant(&[0.15, 0.4, 0.8], 0.02).unwrap();
    let check = interpolant_attractor_check(&f, 3);
    assert_eq!(check.converged, check.starts);
    assert!(check.worst_final_distance < 1e-9);
}

#[test]
fn projector_map_recovers_its_span() {
    let ts = gaussian_set(2, 5, 9);
    let map = linear_map(&min_norm_projection(&ts, 1e-10).unwrap());
    let eps = 0.05 * median_pairwise_distance(&ts);
    let starts: Vec<Vec<f64>> = ts.examples().to_vec();
    assert_eq!(recovery_probability(&map, &ts, &starts, eps, 3).unwrap(), 1.0);
    let tr = iterate(&map, &ts.examples()[1], 4, &ts, eps).unwrap();
    assert_eq!(tr.converged_to, Some(1));
}
