//! Deep fully connected / convolutional autoencoders with hand-written
//! reverse-mode differentiation.

mod init;
mod layer;
mod train;
mod two_layer;

pub use init::{Initializer, DEEP_CONV_CONSTANT, DEFAULT_SMALL_CONSTANT};
pub use layer::{LayerKind, LayerSpec, KERNEL, KERNEL_LEN};
pub use train::{train, train_observed, Optimizer, TrainConfig, TrainReport, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use two_layer::{two_layer_fixed_hidden, TwoLayerExample, TwoLayerReport};

use rayon::prelude::*;

use crate::error::{invalid, shape, Error, Result};
use crate::linear_fc::TrainingSet;
use crate::numkit::{fmt_f64, Matrix};
use crate::rng::seeded;

const GRADIENT_CHUNK: usize = 8;

pub const FORMAT_HEADER: &str = "memolab-network v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<LayerSpec>,
    skip_every: Option<usize>,
    initializer: Initializer,
    seed: u64,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Per-layer inputs and pre-activations of one forward pass.
struct Trace {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl Network {
    pub fn new(layers: Vec<LayerSpec>, skip_every: Option<usize>, initializer: Initializer, seed: u64) -> Result<Self> {
        let mut net = Self::empty(layers, skip_every, initializer, seed)?;
        let mut rng = seeded(seed);
        for l in 0..net.layers.len() {
            let (start, end) = (net.offsets[l], net.offsets[l + 1]);
            initializer.fill(&net.layers[l], &mut rng, &mut net.params[start..end]);
        }
        Ok(net)
    }

    /// Builds a network with explicit parameters (weights then bias per layer).
    pub fn from_params(layers: Vec<LayerSpec>, skip_every: Option<usize>, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::empty(layers, skip_every, Initializer::Zeros, 0)?;
        net.set_params(params)?;
        Ok(net)
    }

    fn empty(layers: Vec<LayerSpec>, skip_every: Option<usize>, initializer: Initializer, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        for (l, spec) in layers.iter().enumerate() {
            spec.validate().map_err(|e| invalid(format!("layer {l}: {e}")))?;
        }
        for (l, w) in layers.windows(2).enumerate() {
            if w[0].output_len() != w[1].input_len() {
                return Err(shape(format!(
                    "layer {l} outputs {} values but layer {} expects {}",
                    w[0].output_len(),
                    l + 1,
                    w[1].input_len()
                )));
            }
        }
        if let Some(k) = skip_every {
            if k == 0 {
                return Err(invalid("skip_every must be positive"));
            }
            for start in (0..layers.len()).step_by(k) {
                let end = start + k;
                if end <= layers.len() && layers[start].input_len() != layers[end - 1].output_len() {
                    return Err(shape(format!(
                        "skip connection around layers {start}..{end} joins sizes {} and {}",
                        layers[start].input_len(),
                        layers[end - 1].output_len()
                    )));
                }
            }
        }
        let mut offsets = vec![0];
        for spec in &layers {
            offsets.push(offsets.last().unwrap() + spec.param_count());
        }
        let params = vec![0.0; *offsets.last().unwrap()];
        Ok(Self { layers, skip_every, initializer, seed, params, offsets })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn skip_every(&self) -> Option<usize> {
        self.skip_every
    }

    pub fn initializer(&self) -> Initializer {
        self.initializer
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].input_len()
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().unwrap().output_len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(shape(format!("expected {} parameters, got {}", self.params.len(), params.len())));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameter".into()));
        }
        self.params = params;
        Ok(())
    }

    /// Parameters of layer `l` (weights then bias).
    pub fn layer_params(&self, l: usize) -> &[f64] {
        &self.params[self.offsets[l]..self.offsets[l + 1]]
    }

    pub fn layer_params_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.params[self.offsets[l]..self.offsets[l + 1]]
    }

    /// Offset of layer `l` in the flat parameter vector.
    pub fn layer_offset(&self, l: usize) -> usize {
        self.offsets[l]
    }

    /// Weight matrix of a fully connected layer (`outputs × inputs`).
    pub fn fc_weights(&self, l: usize) -> Result<Matrix> {
        match self.layers[l].kind {
            LayerKind::FullyConnected { inputs, outputs, .. } => {
                Matrix::new(outputs, inputs, self.layer_params(l)[..inputs * outputs].to_vec())
            }
            _ => Err(invalid(format!("layer {l} is not fully connected"))),
        }
    }

    /// Layer index ranges joined by identity skips: `(start, end, skipped)`.
    fn blocks(&self) -> Vec<(usize, usize, bool)> {
        let n = self.layers.len();
        match self.skip_every {
            None => vec![(0, n, false)],
            Some(k) => (0..n).step_by(k).map(|s| (s, (s + k).min(n), s + k <= n)).collect(),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(shape(format!("input has {} values, network expects {}", x.len(), self.input_len())));
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        let mut h = x.to_vec();
        for (start, end, skipped) in self.blocks() {
            let block_in = skipped.then(|| h.clone());
            for l in start..end {
                let spec = &self.layers[l];
                let mut z = vec![0.0; spec.output_len()];
                spec.linear(self.layer_params(l), &h, &mut z);
                let next: Vec<f64> = z.iter().map(|&v| spec.activation.apply(v)).collect();
                inputs.push(std::mem::replace(&mut h, next));
                pre.push(z);
            }
            if let Some(bi) = block_in {
                h.iter_mut().zip(&bi).for_each(|(a, b)| *a += b);
            }
        }
        Trace { inputs, pre, output: h }
    }

    /// Reverse pass from `g_out = ∂L/∂f`; returns `∂L/∂x` and accumulates the
    /// parameter gradient when `grad` is given.
    fn backward(&self, trace: &Trace, g_out: &[f64], mut grad: Option<&mut [f64]>) -> Vec<f64> {
        let mut g = g_out.to_vec();
        for (start, end, skipped) in self.blocks().into_iter().rev() {
            let g_skip = skipped.then(|| g.clone());
            for l in (start..end).rev() {
                let spec = &self.layers[l];
                let gz: Vec<f64> =
                    g.iter().zip(&trace.pre[l]).map(|(gi, &z)| gi * spec.activation.derivative(z)).collect();
                let mut gh = vec![0.0; spec.input_len()];
                let slot = grad.as_deref_mut().map(|gr| &mut gr[self.offsets[l]..self.offsets[l + 1]]);
                spec.backward(self.layer_params(l), &trace.inputs[l], &gz, &mut gh, slot);
                g = gh;
            }
            if let Some(gs) = g_skip {
                g.iter_mut().zip(&gs).for_each(|(a, b)| *a += b);
            }
        }
        g
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).output)
    }

    /// `Σᵢ ‖f(x⁽ⁱ⁾) − x⁽ⁱ⁾‖²`, un-averaged and without the factor ½.
    pub fn loss(&self, ts: &TrainingSet) -> Result<f64> {
        self.check_autoencoder(ts)?;
        let per: Vec<f64> = ts
            .examples()
            .par_iter()
            .map(|x| self.trace(x).output.iter().zip(x).map(|(f, v)| (f - v).powi(2)).sum())
            .collect();
        Ok(per.iter().sum())
    }

    fn check_autoencoder(&self, ts: &TrainingSet) -> Result<()> {
        if ts.dim() != self.input_len() || self.output_len() != self.input_len() {
            return Err(shape(format!(
                "network maps {} → {} values but the data has dimension {}",
                self.input_len(),
                self.output_len(),
                ts.dim()
            )));
        }
        Ok(())
    }

    /// Loss and its gradient with respect to the flat parameter vector.
    /// Examples are split into fixed-size chunks summed in order, so the
    /// result does not depend on the thread count.
    pub fn loss_and_gradient(&self, ts: &TrainingSet) -> Result<(f64, Vec<f64>)> {
        self.check_autoencoder(ts)?;
        let per: Vec<(f64, Vec<f64>)> = ts
            .examples()
            .par_chunks(GRADIENT_CHUNK)
            .map(|chunk| {
                let mut loss = 0.0;
                let mut grad = vec![0.0; self.params.len()];
                for x in chunk {
                    let trace = self.trace(x);
                    let resid: Vec<f64> = trace.output.iter().zip(x).map(|(f, v)| f - v).collect();
                    loss += resid.iter().map(|r| r * r).sum::<f64>();
                    let g_out: Vec<f64> = resid.iter().map(|r| 2.0 * r).collect();
                    self.backward(&trace, &g_out, Some(&mut grad));
                }
                (loss, grad)
            })
            .collect();
        let mut iter = per.into_iter();
        let (mut loss, mut grad) = iter.next().unwrap_or((0.0, vec![0.0; self.params.len()]));
        for (l, g) in iter {
            loss += l;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        Ok((loss, grad))
    }

    /// `∂f_m/∂x_l`, one reverse pass per output coordinate.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        self.check_input(x)?;
        let trace = self.trace(x);
        let (m, d) = (self.output_len(), self.input_len());
        let mut jac = Matrix::zeros(m, d);
        let mut e = vec![0.0; m];
        for r in 0..m {
            e[r] = 1.0;
            let row = self.backward(&trace, &e, None);
            jac.row_mut(r).copy_from_slice(&row);
            e[r] = 0.0;
        }
        Ok(jac)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(FORMAT_HEADER);
        out.push('\n');
        out.push_str(&format!("seed {}\n", self.seed));
        out.push_str(&format!("initializer {}\n", self.initializer));
        match self.skip_every {
            Some(k) => out.push_str(&format!("skip_every {k}\n")),
            None => out.push_str("skip_every none\n"),
        }
        out.push_str(&format!("layers {}\n", self.layers.len()));
        for l in &self.layers {
            out.push_str(&format!("{l}\n"));
        }
        out.push_str(&format!("params {}\n", self.params.len()));
        for v in &self.params {
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rd = Reader::new(text);
        let (ln, header) = rd.next("header")?;
        if header != FORMAT_HEADER {
            return Err(perr(ln, format!("expected '{FORMAT_HEADER}', found '{header}'")));
        }
        let (ln, seed) = rd.field("seed")?;
        let seed: u64 = seed.parse().map_err(|_| perr(ln, "seed must be an unsigned integer"))?;
        let (ln, init) = rd.field("initializer")?;
        let initializer: Initializer = init.parse().map_err(|e: Error| perr(ln, e.to_string()))?;
        let (ln, skip) = rd.field("skip_every")?;
        let skip_every = match skip {
            "none" => None,
            v => Some(v.parse().map_err(|_| perr(ln, "skip_every must be an integer or none"))?),
        };
        let (ln, count) = rd.field("layers")?;
        let count: usize = count.parse().map_err(|_| perr(ln, "layer count must be an integer"))?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = rd.next("layer")?;
            layers.push(l.parse::<LayerSpec>().map_err(|e| perr(ln, e.to_string()))?);
        }
        let (ln, count) = rd.field("params")?;
        let count: usize = count.parse().map_err(|_| perr(ln, "parameter count must be an integer"))?;
        let mut params = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, v) = rd.next("parameter")?;
            params.push(v.parse::<f64>().map_err(|_| perr(ln, format!("'{v}' is not a number")))?);
        }
        if let Some((ln, extra)) = rd.lines.next() {
            return Err(perr(ln, format!("trailing content '{extra}'")));
        }
        let mut net = Self::empty(layers, skip_every, initializer, seed)?;
        net.set_params(params)?;
        Ok(net)
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct Reader<'a> {
    lines: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self { lines: Box::new(text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())) }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.lines.next().ok_or_else(|| perr(0, format!("unexpected end of input, expected {what}")))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, l) = self.next(key)?;
        let rest = l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')).ok_or_else(|| perr(ln, format!("expected '{key} ...'")))?;
        Ok((ln, rest.trim()))
    }
}

pub fn forward(net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    net.forward(x)
}

pub fn jacobian(net: &Network, x: &[f64]) -> Result<Matrix> {
    net.jacobian(x)
}

/// Single linear fully connected layer with the given weight matrix.
pub fn linear_map(a: &Matrix) -> Network {
    Network::from_params(vec![LayerSpec::fc(a.cols(), a.rows(), crate::Activation::Identity)], None, a.data().to_vec())
        .expect("valid single layer")
}
