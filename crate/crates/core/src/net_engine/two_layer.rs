use super::init::standard_normal;
use super::{LayerSpec, Network};
use crate::activation::Activation;
use crate::error::{invalid, Result};
use crate::linear_fc::{min_norm_solve, TrainingSet};
use crate::numkit::{dot, eigenvalue_magnitudes, norm, Matrix};
use crate::rng::seeded;

#[derive(Debug, Clone)]
pub struct TwoLayerExample {
    pub jacobian: Matrix,
    /// Largest eigenvalue magnitude of the Jacobian at the example.
    pub top_eigenvalue: f64,
    /// Infinite-width prediction `‖x‖² / (‖x‖² + 1)`.
    pub limit: f64,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone)]
pub struct TwoLayerReport {
    pub network: Network,
    pub examples: Vec<TwoLayerExample>,
    /// Cosines between hidden features of distinct examples.
    pub hidden_cosines: Matrix,
    pub max_offdiag_cosine: f64,
}

/// `f(x) = W₂ relu(W₁ x + b)` with `W₁, b` standard normal and frozen and
/// `W₂` the minimum-norm least-squares fit (the limit of gradient descent on
/// the last layer from zero).
pub fn two_layer_fixed_hidden(ts: &TrainingSet, width: usize, seed: u64) -> Result<TwoLayerReport> {
    if width == 0 {
        return Err(invalid("hidden width must be positive"));
    }
    let d = ts.dim();
    let mut rng = seeded(seed);
    let mut first = vec![0.0; width * d + width];
    standard_normal(&mut rng, &mut first);
    let hidden = LayerSpec::fc(d, width, Activation::Relu).with_bias();
    let out = LayerSpec::fc(width, d, Activation::Identity);
    let hidden_net = Network::from_params(vec![hidden], None, first.clone())?;
    let feats: Vec<Vec<f64>> = ts.examples().iter().map(|x| hidden_net.forward(x)).collect::<Result<_>>()?;
    if feats.iter().any(|h| norm(h) == 0.0) {
        return Err(invalid("an example has an all-zero hidden representation; try another seed"));
    }
    let w2 = if ts.len() == 1 {
        let h = &feats[0];
        let hh = dot(h, h);
        Matrix::from_fn(d, width, |r, c| ts.example(0)[r] * h[c] / hh)
    } else {
        min_norm_solve(&TrainingSet::new(feats.clone())?, ts.examples(), 1e-12)?
    };
    let mut params = first;
    params.extend_from_slice(w2.data());
    let network = Network::from_params(vec![hidden, out], None, params)?;

    let n = ts.len();
    let hidden_cosines = Matrix::from_fn(n, n, |i, j| dot(&feats[i], &feats[j]) / (norm(&feats[i]) * norm(&feats[j])));
    let mut max_offdiag_cosine: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_offdiag_cosine = max_offdiag_cosine.max(hidden_cosines[(i, j)].abs());
            }
        }
    }

    let examples = ts
        .examples()
        .iter()
        .map(|x| {
            let jacobian = network.jacobian(x)?;
            let top_eigenvalue = eigenvalue_magnitudes(&jacobian)?.into_iter().fold(0.0, f64::max);
            let nx2 = dot(x, x);
            let fx = network.forward(x)?;
            let reconstruction_error = fx.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok(TwoLayerExample { jacobian, top_eigenvalue, limit: nx2 / (nx2 + 1.0), reconstruction_error })
        })
        .collect::<Result<_>>()?;
    Ok(TwoLayerReport { network, examples, hidden_cosines, max_offdiag_cosine })
}
