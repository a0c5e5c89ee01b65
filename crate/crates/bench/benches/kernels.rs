use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use memolab_core::conv_linear::{create_filter_matrix, ConvFilterParams};
use memolab_core::datagen::{generate, DatasetKind, DatasetSpec};
use memolab_core::net_engine::{Initializer, LayerSpec};
use memolab_core::numkit::{svd, sym_eig, Matrix};
use memolab_core::rng::{gaussian_vec, seeded};
use memolab_core::{Activation, Network};

fn random_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    Matrix::new(n, n, gaussian_vec(&mut rng, n * n)).unwrap()
}

fn decompositions(c: &mut Criterion) {
    let a = random_matrix(64, 1);
    let sym = a.add(&a.transpose()).unwrap();
    c.bench_function("sym_eig 64", |b| b.iter(|| sym_eig(black_box(&sym), 1e-12).unwrap()));
    c.bench_function("svd 64", |b| b.iter(|| svd(black_box(&a)).unwrap()));
}

fn filter_matrix(c: &mut Criterion) {
    let mut rng = seeded(2);
    let p = ConvFilterParams::new(gaussian_vec(&mut rng, 4 * 4 * 9), 4, 4, 8, 1).unwrap();
    c.bench_function("filter matrix 4x4ch side 8", |b| b.iter(|| create_filter_matrix(black_box(&p)).unwrap()));
}

fn train_step(c: &mut Criterion) {
    let ts = generate(&DatasetSpec::new(DatasetKind::SwissRoll3d { n: 20, noise: 0.0 }, 1)).unwrap();
    let act = Activation::LeakyRelu(0.01);
    let mut layers = vec![LayerSpec::fc(3, 128, act).with_bias()];
    layers.extend((0..5).map(|_| LayerSpec::fc(128, 128, act).with_bias()));
    layers.push(LayerSpec::fc(128, 3, Activation::Identity).with_bias());
    let net = Network::new(layers, None, Initializer::FrameworkDefault, 1).unwrap();
    c.bench_function("fc 7x128 gradient, 20 examples", |b| b.iter(|| net.loss_and_gradient(black_box(&ts)).unwrap()));
    c.bench_function("fc 7x128 forward", |b| b.iter(|| net.forward(black_box(ts.example(0))).unwrap()));
}

criterion_group!(benches, decompositions, filter_matrix, train_step);
criterion_main!(benches);
