//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero when any criterion fails or overruns its time budget.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{direct_conv, direct_upsample, rel_err, uniform_vec};
use memolab_core::conv_linear::{
    create_filter_matrix, create_upsampling_matrix, forced_zero_count, heuristic_depth, interior_indices,
    linearize_network, spectrum, ConvFilterParams,
};
use memolab_core::datagen::{generate, sigmoid_compatible, DatasetKind, DatasetSpec};
use memolab_core::dynsys::{
    attractor_census, default_recovery_eps, iterate_many, recovery_probability, Classification, DEFAULT_MARGIN,
};
use memolab_core::linear_fc::{
    gd_linear_closed_form, gd_linear_from_observed, gd_linear_with, min_norm_projection, top_eigenvalue, StopRule,
};
use memolab_core::net_engine::{
    train, two_layer_fixed_hidden, Initializer, LayerSpec, Optimizer, TrainConfig, TrainReport,
};
use memolab_core::nonlinear_fc::{adaptive_gd, phi_eigencheck, phi_span_membership, AdaptiveGdConfig};
use memolab_core::numkit::{dot, norm, numerical_rank, orthonormal_basis, svd, Matrix};
use memolab_core::rng::{gaussian_vec, seeded};
use memolab_core::robustness::{construct_interpolant, to_relu_network, PiecewiseLinear1D};
use memolab_core::{Activation, Network, TrainingSet};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, u64, Check); 14] = [
        ("linear-gd-closed-form", 5, linear_gd_closed_form),
        ("nonlinear-single-layer", 30, nonlinear_single_layer),
        ("two-layer-jacobian-limit", 120, two_layer_limit),
        ("golden-matrices", 1, golden_matrices),
        ("conv-oracle-equivalence", 10, conv_oracle_equivalence),
        ("single-filter-rank", 30, single_filter_rank),
        ("forced-zeros", 5, forced_zeros),
        ("deep-conv-spectra", 600, deep_conv_spectra),
        ("heuristic-depth", 1, heuristic_depth_values),
        ("downsampling-equivalence", 120, downsampling_equivalence),
        ("swiss-roll-attractors", 600, swiss_roll_attractors),
        ("robust-interpolant", 30, robust_interpolant),
        ("init-orthogonal-preservation", 10, init_orthogonal_preservation),
        ("gradient-finite-differences", 60, gradient_finite_differences),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = t.elapsed();
        let budget = Duration::from_secs(*budget);
        let (pass, detail) = match result {
            Ok(o) if elapsed > budget => (false, format!("{} (over time budget)", o.detail)),
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:02} {name:<30} {:>7.2}s / {:>3}s  {detail}",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn linear_gd_closed_form() -> Outcome {
    let mut rng = seeded(101);
    let (mut worst_t, mut worst_limit) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let d = rng.random_range(2..=12);
        let n = rng.random_range(1..=5.min(d));
        let ts = TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, d)).collect()).unwrap();
        let gamma = 0.9 / top_eigenvalue(&ts);
        let run = gd_linear_with(&ts, gamma, StopRule::fixed(10_000)).unwrap();
        let closed = gd_linear_closed_form(&ts, gamma, 10_000).unwrap();
        worst_t = worst_t.max(run.weights.sub(&closed).unwrap().frobenius_norm());
        let limit = gd_linear_closed_form(&ts, gamma, 100_000_000).unwrap();
        let proj = min_norm_projection(&ts, 1e-10).unwrap();
        worst_limit = worst_limit.max(limit.sub(&proj).unwrap().frobenius_norm());
    }
    outcome(
        worst_t < 1e-10 && worst_limit < 1e-6,
        format!("max |GD - closed form| {worst_t:.1e}, max |limit - projector| {worst_limit:.1e}"),
    )
}

fn nonlinear_single_layer() -> Outcome {
    let phi = Activation::Sigmoid;
    let ts = sigmoid_compatible(2, 5, 7).unwrap();
    let cfg = AdaptiveGdConfig::from_data(&ts, phi, 0.5).unwrap();
    let run = adaptive_gd(&ts, phi, cfg).unwrap();
    let rank = numerical_rank(&run.weights, 1e-6).unwrap();
    let mut worst_lambda: f64 = 0.0;
    let mut all_eigen = true;
    for x in ts.examples() {
        let e = phi_eigencheck(&run.weights, phi, x, 1e-4).unwrap();
        all_eigen &= e.is_eigenvector;
        worst_lambda = worst_lambda.max((e.best_scalar - 1.0).abs());
    }
    let mut rng = seeded(8);
    let mut worst_span: f64 = 0.0;
    for _ in 0..100 {
        let y = phi.apply_vec(&run.weights.mul_vec(&gaussian_vec(&mut rng, 5)).unwrap());
        worst_span = worst_span.max(phi_span_membership(&ts, phi, &y, 1e-4).unwrap().distance);
    }
    outcome(
        run.converged && run.max_preimage_residual < 1e-4 && rank == 2 && all_eigen && worst_lambda < 1e-3 && worst_span < 1e-4,
        format!(
            "{} steps, preimage residual {:.1e}, rank {rank}, max |λ-1| {worst_lambda:.1e}, max span residual {worst_span:.1e}",
            run.steps, run.max_preimage_residual
        ),
    )
}

fn two_layer_limit() -> Outcome {
    let widths = [100, 1_000, 10_000];
    let mut means = Vec::new();
    let mut stable = true;
    for &w in &widths {
        let mut gap = 0.0;
        for seed in 1..=20u64 {
            let mut rng = seeded(1_000 + seed);
            let x = gaussian_vec(&mut rng, 10);
            let len = norm(&x);
            let ts = TrainingSet::new(vec![x.iter().map(|v| v / len).collect()]).unwrap();
            let r = two_layer_fixed_hidden(&ts, w, seed).unwrap();
            let top = r.examples[0].top_eigenvalue;
            stable &= top < 1.0;
            gap += (top - 0.5).abs() / 20.0;
        }
        means.push(gap);
    }
    let decreasing = means.windows(2).all(|m| m[1] < m[0]);
    outcome(
        decreasing && means[2] < 0.05 && stable,
        format!("mean |λ - 0.5| at widths 1e2/1e3/1e4: {:.4} / {:.4} / {:.4}; all λ < 1: {stable}", means[0], means[1], means[2]),
    )
}

fn golden_matrices() -> Outcome {
    // Parameter k is printed as k (A_k), 0 as a forced zero.
    const CONV: [[usize; 9]; 9] = [
        [5, 6, 0, 8, 9, 0, 0, 0, 0],
        [4, 5, 6, 7, 8, 9, 0, 0, 0],
        [0, 4, 5, 0, 7, 8, 0, 0, 0],
        [2, 3, 0, 5, 6, 0, 8, 9, 0],
        [1, 2, 3, 4, 5, 6, 7, 8, 9],
        [0, 1, 2, 0, 4, 5, 0, 7, 8],
        [0, 0, 0, 2, 3, 0, 5, 6, 0],
        [0, 0, 0, 1, 2, 3, 4, 5, 6],
        [0, 0, 0, 0, 1, 2, 0, 4, 5],
    ];
    let kernel: [f64; 9] = std::array::from_fn(|k| (k + 1) as f64);
    let op = create_filter_matrix(&ConvFilterParams::single(kernel, 3, 1).unwrap()).unwrap();
    let source = op.source.clone().unwrap();
    let idx = interior_indices(1, 3);
    let cols = op.matrix.cols();
    let mut conv_ok = true;
    for (r, &pr) in idx.iter().enumerate() {
        for (c, &pc) in idx.iter().enumerate() {
            let want = CONV[r][c];
            let got = source[pr * cols + pc].map_or(0, |k| k + 1);
            let value = op.matrix[(pr, pc)];
            conv_ok &= got == want && value == want as f64 && op.mask[pr * cols + pc] == (want != 0);
        }
    }
    // Padding rows and columns of the full matrix carry nothing.
    conv_ok &= (0..op.matrix.rows()).filter(|r| !idx.contains(r)).all(|r| op.matrix.row(r).iter().all(|&v| v == 0.0));

    let up = create_upsampling_matrix(1, 1, 2).unwrap();
    let ones = [5usize, 6, 9, 10];
    let mut up_ok = up.matrix.shape() == (16, 9);
    for r in 0..16 {
        for c in 0..9 {
            let want = if c == 4 && ones.contains(&r) { 1.0 } else { 0.0 };
            up_ok &= up.matrix[(r, c)] == want;
        }
    }
    outcome(conv_ok && up_ok, format!("3×3 filter pattern match: {conv_ok}; 16×9 upsampling match: {up_ok}"))
}

fn conv_oracle_equivalence() -> Outcome {
    let mut rng = seeded(55);
    let mut worst: f64 = 0.0;
    let mut up_exact = true;
    for _ in 0..200 {
        let side = [2, 4, 6][rng.random_range(0..3)];
        let stride = rng.random_range(1..=2);
        let filters = rng.random_range(1..=3);
        let channels = rng.random_range(1..=3);
        let w = uniform_vec(&mut rng, filters * channels * 9, -1.0, 1.0);
        let x = uniform_vec(&mut rng, channels * side * side, -1.0, 1.0);
        let op = create_filter_matrix(&ConvFilterParams::new(w.clone(), filters, channels, side, stride).unwrap()).unwrap();
        worst = worst.max(rel_err(&op.apply(&x).unwrap(), &direct_conv(&w, filters, channels, side, stride, &x)));
        let scale = rng.random_range(1..=3);
        let up = create_upsampling_matrix(side, channels, scale).unwrap();
        up_exact &= up.apply(&x).unwrap() == direct_upsample(&x, channels, side, scale);
    }
    outcome(worst < 1e-13 && up_exact, format!("max relative error {worst:.1e}; upsampling exact: {up_exact}"))
}

fn single_filter_rank() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (s, want) in [(3usize, 9usize), (2, 4)] {
        let ts = generate(&DatasetSpec::new(DatasetKind::UniformImages { s, n: 1 }, 3)).unwrap();
        let net = Network::new(vec![LayerSpec::conv(1, 1, s, 1, Activation::Identity)], None, Initializer::XavierUniform, 3)
            .unwrap();
        let r = train(&net, &ts, &TrainConfig::new(Optimizer::Gd { lr: 5e-3 }, 1e-8, 500_000)).unwrap();
        let op = linearize_network(&r.trained).unwrap();
        let rank = numerical_rank(&op.interior, 1e-4).unwrap();
        pass &= r.final_loss < 1e-8 && rank == want;
        parts.push(format!("s={s}: loss {:.1e} after {} steps, rank {rank}", r.final_loss, r.steps));
    }
    outcome(pass, parts.join("; "))
}

fn forced_zeros() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in 3..=6 {
        let counts: Vec<usize> = (1..s).map(|l| forced_zero_count(l, s).unwrap()).collect();
        pass &= counts[..s - 2].iter().all(|&c| c > 0) && counts[s - 2] == 0;
        parts.push(format!("s={s}: {counts:?}"));
    }
    pass &= forced_zero_count(2, 4).unwrap() > 0;
    outcome(pass, parts.join("; "))
}

fn train_conv_stack(ts: &TrainingSet, s: usize, filters: usize, layers: usize, eps: f64) -> TrainReport {
    let mut specs = Vec::with_capacity(layers);
    for l in 0..layers {
        let cin = if l == 0 { 1 } else { filters };
        let cout = if l + 1 == layers { 1 } else { filters };
        specs.push(LayerSpec::conv(cin, cout, s, 1, Activation::Identity));
    }
    let net = Network::new(specs, None, Initializer::Constant(eps), 0).unwrap();
    train(&net, ts, &TrainConfig::new(Optimizer::Gd { lr: 0.01 }, 1e-6, 200_000)).unwrap()
}

fn deep_conv_spectra() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, layers, eps) in [(2usize, 3usize, 0.3), (3, 9, 0.1)] {
        let ts = generate(&DatasetSpec::new(DatasetKind::GaussianImages { s, n: 1 }, 1)).unwrap();
        let r = train_conv_stack(&ts, s, 1, layers, eps);
        let sp = spectrum(&linearize_network(&r.trained).unwrap().interior, 1e-2).unwrap();
        let ok = r.converged && sp.leading.len() == 1 && (0.98..=1.02).contains(&sp.leading[0]);
        pass &= ok;
        parts.push(format!("{s}×{s} L={layers}: {} (tail {:.1e})", sp.bracket(), sp.tail_bound));
    }
    let mut rng = seeded(1);
    let ts = TrainingSet::new((0..2).map(|_| gaussian_vec(&mut rng, 9)).collect()).unwrap();
    let r = train_conv_stack(&ts, 3, 1, 2, 0.1);
    let sp = spectrum(&linearize_network(&r.trained).unwrap().interior, 1e-2).unwrap();
    let third = sp.magnitudes[2];
    pass &= r.converged && third > 0.9;
    parts.push(format!("3×3 n=2 L=2: third eigenvalue {third:.3}"));
    outcome(pass, parts.join("; "))
}

fn heuristic_depth_values() -> Outcome {
    let got: Vec<usize> = (2..=7).map(|s| heuristic_depth(s).unwrap()).collect();
    outcome(got == [2, 9, 29, 70, 144, 267], format!("{got:?}"))
}

fn downsampling_equivalence() -> Outcome {
    let f = 4;
    let id = Activation::Identity;
    let layers = vec![
        LayerSpec::conv(1, f, 4, 2, id),
        LayerSpec::conv(f, f, 2, 2, id),
        LayerSpec::upsample(f, 1, 2),
        LayerSpec::conv(f, f, 2, 1, id),
        LayerSpec::upsample(f, 2, 2),
        LayerSpec::conv(f, 1, 4, 1, id),
    ];
    let mut net = Network::new(layers, None, Initializer::XavierUniform, 1).unwrap();
    let scaled: Vec<f64> = net.params().iter().map(|v| 0.3 * v).collect();
    net.set_params(scaled).unwrap();
    let mut rng = seeded(101);
    let ts = TrainingSet::new((0..2).map(|_| gaussian_vec(&mut rng, 16)).collect()).unwrap();
    let r = train(&net, &ts, &TrainConfig::new(Optimizer::adam(1e-3), 1e-12, 60_000)).unwrap();
    let op = linearize_network(&r.trained).unwrap().interior;
    let dist = op.sub(&min_norm_projection(&ts, 1e-10).unwrap()).unwrap().frobenius_norm();
    let sp = spectrum(&op, 1e-2).unwrap();
    outcome(dist < 1e-4, format!("loss {:.1e}, distance to projector {dist:.2e}, spectrum {}", r.final_loss, sp.bracket()))
}

fn swiss_roll_attractors() -> Outcome {
    let act = Activation::Relu;
    let ts = generate(&DatasetSpec::new(DatasetKind::SwissRoll3d { n: 20, noise: 0.0 }, 1)).unwrap();
    let mut layers = vec![LayerSpec::fc(3, 128, act).with_bias()];
    layers.extend((0..5).map(|_| LayerSpec::fc(128, 128, act).with_bias()));
    layers.push(LayerSpec::fc(128, 3, Activation::Identity).with_bias());
    let net = Network::new(layers, None, Initializer::FrameworkDefault, 1).unwrap();
    let r = train(&net, &ts, &TrainConfig::new(Optimizer::Gd { lr: 0.03 }, 1e-6, 30_000)).unwrap();
    let census = attractor_census(&r.trained, &ts, DEFAULT_MARGIN).unwrap();
    let attractors = census.iter().filter(|c| c.fixed_point && c.classification == Classification::Attractor).count();
    let eps = default_recovery_eps(&ts).unwrap();
    let probes = generate(&DatasetSpec::new(
        DatasetKind::GridProbes { ranges: vec![(0.0, 1.0); 3], counts: vec![5, 8, 5] },
        0,
    ))
    .unwrap();
    let landed = iterate_many(&r.trained, probes.examples(), 2000, &ts, eps)
        .unwrap()
        .iter()
        .filter(|t| t.converged_to.is_some())
        .count();
    let radii: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|m| m * eps).collect();
    let probs: Vec<f64> =
        radii.iter().map(|&e| recovery_probability(&r.trained, &ts, probes.examples(), e, 20).unwrap()).collect();
    let monotone = probs.windows(2).all(|p| p[1] >= p[0]);
    outcome(
        r.final_loss < 1e-6 && attractors >= 18 && landed >= 160 && monotone,
        format!(
            "loss {:.1e} after {} steps, attractors {attractors}/20, probes landed {landed}/200, R(eps) {probs:?}",
            r.final_loss, r.steps
        ),
    )
}

/// The four-branch interpolant written out directly.
fn interpolant_oracle(points: &[f64], delta: f64, eps: f64, x: f64) -> f64 {
    let n = points.len();
    let (first, last) = (points[0], points[n - 1]);
    if x < first - delta {
        return (first - delta + eps) / (first - delta) * x;
    }
    if x >= last + delta {
        return (1.0 - (last + delta - eps)) / (1.0 - (last + delta)) * (x - 1.0) + 1.0;
    }
    let a = (2.0 * delta - 2.0 * eps) / (2.0 * delta);
    for i in 0..n {
        let xi = points[i];
        if x >= xi - delta && x < xi + delta {
            return a * x + (1.0 - a) * (xi - delta) + eps;
        }
        if i + 1 < n && x >= xi + delta && x < points[i + 1] - delta {
            let b = (points[i + 1] - xi - 2.0 * delta + 2.0 * eps) / (points[i + 1] - xi - 2.0 * delta);
            return b * x + (1.0 - b) * (xi + delta) - eps;
        }
    }
    unreachable!("x = {x} not covered")
}

fn robust_interpolant() -> Outcome {
    let mut rng = seeded(12);
    let mut pass = true;
    let (mut worst_loss_ratio, mut worst_net, mut worst_formula): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let n = rng.random_range(1..=6);
        let points: Vec<f64> = loop {
            let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
            p.sort_by(f64::total_cmp);
            if p.windows(2).all(|w| w[1] - w[0] > 0.01) {
                break p;
            }
        };
        let requested = rng.random_range(0.001..0.2);
        let f: PiecewiseLinear1D = construct_interpolant(&points, requested).unwrap();
        let eps = f.epsilon;
        let loss = f.expected_squared_error(100_000);
        worst_loss_ratio = worst_loss_ratio.max(loss / requested);
        pass &= loss < requested && eps <= requested;
        pass &= f.points.iter().all(|&x| f.slope_at(x) < 1.0 && f.slope_at(x) >= 0.0);
        let (lo, hi) = (f.points[0] - f.delta, f.points[n - 1] + f.delta);
        pass &= f.max_deviation(lo, hi, 10_000) <= eps * (1.0 + 1e-12);
        let net = to_relu_network(std::slice::from_ref(&f)).unwrap();
        for k in 0..=10_000 {
            let x = k as f64 / 10_000.0;
            let want = interpolant_oracle(&f.points, f.delta, eps, x);
            worst_formula = worst_formula.max((f.eval(x) - want).abs());
            worst_net = worst_net.max((net.forward(&[x]).unwrap()[0] - want).abs());
        }
    }
    pass &= worst_net < 1e-9 && worst_formula < 1e-9;
    outcome(
        pass,
        format!("max loss/ε {worst_loss_ratio:.2e}, max |f - formula| {worst_formula:.1e}, max |relu net - formula| {worst_net:.1e}"),
    )
}

fn init_orthogonal_preservation() -> Outcome {
    let (d, n) = (8, 3);
    let mut rng = seeded(31);
    let ts = TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, d)).collect()).unwrap();
    let span = orthonormal_basis(ts.examples(), 1e-10);
    let complement = |v: Vec<f64>| -> Vec<f64> {
        let mut v = v;
        for b in &span {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
        }
        v
    };
    let v = complement(gaussian_vec(&mut rng, d));
    let u = gaussian_vec(&mut rng, d);
    let init = Matrix::outer(&u, &v).scale(0.5 / norm(&v));
    let probes: Vec<Vec<f64>> = (0..5).map(|_| complement(gaussian_vec(&mut rng, d))).collect();
    let targets: Vec<Vec<f64>> = probes.iter().map(|w| init.mul_vec(w).unwrap()).collect();
    let gamma = 0.9 / top_eigenvalue(&ts);
    let mut worst: f64 = 0.0;
    let a = gd_linear_from_observed(&ts, &init, gamma, 20_000, |_, a| {
        for (w, t) in probes.iter().zip(&targets) {
            let got = a.mul_vec(w).unwrap();
            worst = worst.max(got.iter().zip(t).map(|(g, t)| (g - t).abs()).fold(0.0, f64::max));
        }
    })
    .unwrap();
    let sa = svd(&a).unwrap().singular_values;
    let sp = svd(&min_norm_projection(&ts, 1e-10).unwrap()).unwrap().singular_values;
    let s1 = svd(&init).unwrap().singular_values[0];
    let bound_ok = sa.iter().zip(&sp).all(|(a, p)| *a <= p + s1 + 1e-8);
    outcome(
        worst < 1e-10 && bound_ok,
        format!("max |A w - init w| over steps {worst:.1e}; singular-value bound holds: {bound_ok}"),
    )
}

fn gradient_finite_differences() -> Outcome {
    let acts = [
        Activation::Identity,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Relu,
        Activation::LeakyRelu(0.01),
    ];
    type Build = fn(Activation) -> (Vec<LayerSpec>, Option<usize>);
    let stacks: [(&str, Build); 6] = [
        ("fc+bias", |a| (vec![LayerSpec::fc(6, 5, a).with_bias(), LayerSpec::fc(5, 6, a).with_bias()], None)),
        ("fc", |a| (vec![LayerSpec::fc(6, 5, a), LayerSpec::fc(5, 6, a)], None)),
        ("fc+skip", |a| (vec![LayerSpec::fc(6, 6, a).with_bias(), LayerSpec::fc(6, 6, a)], Some(1))),
        ("conv", |a| (vec![LayerSpec::conv(1, 2, 4, 1, a), LayerSpec::conv(2, 1, 4, 1, a).with_bias()], None)),
        (
            "conv-stride2+upsample",
            |a| {
                (
                    vec![
                        LayerSpec::conv(1, 2, 4, 2, a).with_bias(),
                        LayerSpec::upsample(2, 2, 2).with_activation(a),
                        LayerSpec::conv(2, 1, 4, 1, a),
                    ],
                    None,
                )
            },
        ),
        ("conv+skip", |a| (vec![LayerSpec::conv(1, 1, 4, 1, a).with_bias(), LayerSpec::conv(1, 1, 4, 1, a)], Some(2))),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    let mut combos = 0;
    for (name, build) in stacks {
        for act in acts {
            let (layers, skip) = build(act);
            let net = Network::new(layers, skip, Initializer::XavierNormal, 5).unwrap();
            let dim = net.input_len();
            let mut rng = seeded(77);
            let ts = TrainingSet::new((0..3).map(|_| uniform_vec(&mut rng, dim, 0.05, 0.95)).collect()).unwrap();
            let (_, grad) = net.loss_and_gradient(&ts).unwrap();
            let mut probe_net = net.clone();
            for _ in 0..20 {
                let dir = gaussian_vec(&mut rng, net.param_count());
                let h = 1e-6;
                let shifted = |sign: f64| -> Vec<f64> {
                    net.params().iter().zip(&dir).map(|(p, d)| p + sign * h * d).collect()
                };
                probe_net.set_params(shifted(1.0)).unwrap();
                let up = probe_net.loss(&ts).unwrap();
                probe_net.set_params(shifted(-1.0)).unwrap();
                let down = probe_net.loss(&ts).unwrap();
                let fd = (up - down) / (2.0 * h);
                let an = dot(&grad, &dir);
                let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-12);
                if rel > worst {
                    worst = rel;
                    worst_case = format!("{name}/{act}");
                }
            }
            combos += 1;
        }
    }
    outcome(worst < 1e-4, format!("{combos} layer/activation stacks × 20 directional probes; worst relative error {worst:.1e} ({worst_case})"))
}
