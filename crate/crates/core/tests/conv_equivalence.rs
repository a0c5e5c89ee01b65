mod common;

use common::{direct_conv, direct_upsample, rel_err, uniform_vec};
use memolab_core::conv_linear::{create_filter_matrix, create_upsampling_matrix, linearize_network, ConvFilterParams};
use memolab_core::net_engine::{Initializer, LayerSpec, Network};
use memolab_core::rng::seeded;
use memolab_core::Activation;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn filter_matrix_matches_direct_convolution(
        half in 1usize..4, stride in 1usize..3, filters in 1usize..3, channels in 1usize..3, seed in any::<u64>()
    ) {
        let side = 2 * half;
        let mut rng = seeded(seed);
        let w = uniform_vec(&mut rng, filters * channels * 9, -1.0, 1.0);
        let x = uniform_vec(&mut rng, channels * side * side, -1.0, 1.0);
        let op = create_filter_matrix(&ConvFilterParams::new(w.clone(), filters, channels, side, stride).unwrap()).unwrap();
        let ours = op.apply(&x).unwrap();
        let oracle = direct_conv(&w, filters, channels, side, stride, &x);
        prop_assert!(rel_err(&ours, &oracle) < 1e-13);
    }

    #[test]
    fn upsampling_matrix_is_exact(side in 1usize..5, channels in 1usize..3, scale in 1usize..4, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x = uniform_vec(&mut rng, channels * side * side, -1.0, 1.0);
        let op = create_upsampling_matrix(side, channels, scale).unwrap();
        prop_assert_eq!(op.apply(&x).unwrap(), direct_upsample(&x, channels, side, scale));
    }
}

#[test]
fn linearized_network_matches_forward_pass() {
    let id = Activation::Identity;
    let layers = vec![
        LayerSpec::conv(1, 3, 4, 2, id),
        LayerSpec::upsample(3, 2, 2),
        LayerSpec::conv(3, 2, 4, 1, id),
        LayerSpec::conv(2, 1, 4, 1, id),
    ];
    let net = Network::new(layers, None, Initializer::XavierNormal, 9).unwrap();
    let c = linearize_network(&net).unwrap();
    let mut rng = seeded(4);
    for _ in 0..5 {
        let x = uniform_vec(&mut rng, 16, -1.0, 1.0);
        let y = net.forward(&x).unwrap();
        assert!(rel_err(&c.interior.mul_vec(&x).unwrap(), &y) < 1e-13);
    }
}

#[test]
fn biased_or_nonlinear_networks_are_rejected() {
    let biased = Network::new(vec![LayerSpec::conv(1, 1, 2, 1, Activation::Identity).with_bias()], None, Initializer::Zeros, 0).unwrap();
    assert!(linearize_network(&biased).is_err());
    let relu = Network::new(vec![LayerSpec::conv(1, 1, 2, 1, Activation::Relu)], None, Initializer::Zeros, 0).unwrap();
    assert!(linearize_network(&relu).is_err());
}
