use std::fmt;

use crate::activation::Activation;
use crate::error::{invalid, Result};
use crate::numkit::dot;

/// Convolutions always use a 3×3 kernel with one pixel of zero padding.
pub const KERNEL: usize = 3;
pub const KERNEL_LEN: usize = KERNEL * KERNEL;

/// Tensors are flat, channel-major, row-major within a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    FullyConnected { inputs: usize, outputs: usize, bias: bool },
    /// Cross-correlation over an `side × side × in_channels` input.
    Conv { in_channels: usize, filters: usize, side: usize, stride: usize, bias: bool },
    /// Nearest-neighbour upsampling by an integer factor.
    Upsample { channels: usize, side: usize, scale: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn fc(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self { kind: LayerKind::FullyConnected { inputs, outputs, bias: false }, activation }
    }

    pub fn conv(in_channels: usize, filters: usize, side: usize, stride: usize, activation: Activation) -> Self {
        Self { kind: LayerKind::Conv { in_channels, filters, side, stride, bias: false }, activation }
    }

    pub fn upsample(channels: usize, side: usize, scale: usize) -> Self {
        Self { kind: LayerKind::Upsample { channels, side, scale }, activation: Activation::Identity }
    }

    /// Enables the bias term; no effect on upsampling layers.
    pub fn with_bias(mut self) -> Self {
        match &mut self.kind {
            LayerKind::FullyConnected { bias, .. } | LayerKind::Conv { bias, .. } => *bias = true,
            LayerKind::Upsample { .. } => {}
        }
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            LayerKind::FullyConnected { inputs, outputs, .. } => {
                if inputs == 0 || outputs == 0 {
                    return Err(invalid("fully connected layer needs positive sizes"));
                }
            }
            LayerKind::Conv { in_channels, filters, side, stride, .. } => {
                if in_channels == 0 || filters == 0 || side == 0 {
                    return Err(invalid("conv layer needs positive channels, filters and side"));
                }
                if stride != 1 && stride != 2 {
                    return Err(invalid(format!("conv stride must be 1 or 2, got {stride}")));
                }
                if side % stride != 0 {
                    return Err(invalid(format!("conv side {side} not divisible by stride {stride}")));
                }
            }
            LayerKind::Upsample { channels, side, scale } => {
                if channels == 0 || side == 0 || scale == 0 {
                    return Err(invalid("upsample layer needs positive channels, side and scale"));
                }
            }
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        match self.kind {
            LayerKind::FullyConnected { inputs, .. } => inputs,
            LayerKind::Conv { in_channels, side, .. } => in_channels * side * side,
            LayerKind::Upsample { channels, side, .. } => channels * side * side,
        }
    }

    pub fn output_len(&self) -> usize {
        match self.kind {
            LayerKind::FullyConnected { outputs, .. } => outputs,
            LayerKind::Conv { filters, side, stride, .. } => filters * (side / stride).pow(2),
            LayerKind::Upsample { channels, side, scale } => channels * (side * scale).pow(2),
        }
    }

    pub fn weight_count(&self) -> usize {
        match self.kind {
            LayerKind::FullyConnected { inputs, outputs, .. } => inputs * outputs,
            LayerKind::Conv { in_channels, filters, .. } => filters * in_channels * KERNEL_LEN,
            LayerKind::Upsample { .. } => 0,
        }
    }

    pub fn bias_count(&self) -> usize {
        match self.kind {
            LayerKind::FullyConnected { outputs, bias: true, .. } => outputs,
            LayerKind::Conv { filters, bias: true, .. } => filters,
            _ => 0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.bias_count()
    }

    pub fn fan_in(&self) -> usize {
        match self.kind {
            LayerKind::FullyConnected { inputs, .. } => inputs,
            LayerKind::Conv { in_channels, .. } => in_channels * KERNEL_LEN,
            LayerKind::Upsample { .. } => 1,
        }
    }

    pub fn fan_out(&self) -> usize {
        match self.kind {
            LayerKind::FullyConnected { outputs, .. } => outputs,
            LayerKind::Conv { filters, .. } => filters * KERNEL_LEN,
            LayerKind::Upsample { .. } => 1,
        }
    }

    /// `z = W h + b` for this layer; `params` holds weights then bias.
    pub(crate) fn linear(&self, params: &[f64], h: &[f64], z: &mut [f64]) {
        let (w, b) = params.split_at(self.weight_count());
        match self.kind {
            LayerKind::FullyConnected { inputs, outputs, bias } => {
                for o in 0..outputs {
                    let row = &w[o * inputs..(o + 1) * inputs];
                    z[o] = dot(row, h) + if bias { b[o] } else { 0.0 };
                }
            }
            LayerKind::Conv { in_channels, filters, side, stride, bias } => {
                let out = side / stride;
                for f in 0..filters {
                    for i in 0..out {
                        for j in 0..out {
                            let mut acc = if bias { b[f] } else { 0.0 };
                            for c in 0..in_channels {
                                let k = &w[(f * in_channels + c) * KERNEL_LEN..][..KERNEL_LEN];
                                let plane = &h[c * side * side..][..side * side];
                                for r in 0..KERNEL {
                                    let Some(y) = tap(stride * i + r, side) else { continue };
                                    for q in 0..KERNEL {
                                        let Some(x) = tap(stride * j + q, side) else { continue };
                                        acc += k[r * KERNEL + q] * plane[y * side + x];
                                    }
                                }
                            }
                            z[(f * out + i) * out + j] = acc;
                        }
                    }
                }
            }
            LayerKind::Upsample { channels, side, scale } => {
                let big = side * scale;
                for c in 0..channels {
                    for i in 0..big {
                        for j in 0..big {
                            z[(c * big + i) * big + j] = h[(c * side + i / scale) * side + j / scale];
                        }
                    }
                }
            }
        }
    }

    /// Backpropagates `gz = ∂L/∂z` to `gh = ∂L/∂h` (overwritten) and, when
    /// `grad` is given, accumulates the parameter gradient into it.
    pub(crate) fn backward(&self, params: &[f64], h: &[f64], gz: &[f64], gh: &mut [f64], grad: Option<&mut [f64]>) {
        let w = &params[..self.weight_count()];
        gh.iter_mut().for_each(|g| *g = 0.0);
        match self.kind {
            LayerKind::FullyConnected { inputs, outputs, bias } => {
                for o in 0..outputs {
                    let g = gz[o];
                    if g == 0.0 {
                        continue;
                    }
                    let row = &w[o * inputs..(o + 1) * inputs];
                    for (ghi, wi) in gh.iter_mut().zip(row) {
                        *ghi += g * wi;
                    }
                }
                if let Some(grad) = grad {
                    let (gw, gb) = grad.split_at_mut(inputs * outputs);
                    for o in 0..outputs {
                        let g = gz[o];
                        for (gwi, hi) in gw[o * inputs..(o + 1) * inputs].iter_mut().zip(h) {
                            *gwi += g * hi;
                        }
                        if bias {
                            gb[o] += g;
                        }
                    }
                }
            }
            LayerKind::Conv { in_channels, filters, side, stride, bias } => {
                let out = side / stride;
                let mut grad = grad;
                for f in 0..filters {
                    for i in 0..out {
                        for j in 0..out {
                            let g = gz[(f * out + i) * out + j];
                            if let (Some(gr), true) = (grad.as_deref_mut(), bias) {
                                gr[self.weight_count() + f] += g;
                            }
                            for c in 0..in_channels {
                                let base = (f * in_channels + c) * KERNEL_LEN;
                                for r in 0..KERNEL {
                                    let Some(y) = tap(stride * i + r, side) else { continue };
                                    for q in 0..KERNEL {
                                        let Some(x) = tap(stride * j + q, side) else { continue };
                                        let idx = (c * side + y) * side + x;
                                        gh[idx] += g * w[base + r * KERNEL + q];
                                        if let Some(gr) = grad.as_deref_mut() {
                                            gr[base + r * KERNEL + q] += g * h[idx];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            LayerKind::Upsample { channels, side, scale } => {
                let big = side * scale;
                for c in 0..channels {
                    for i in 0..big {
                        for j in 0..big {
                            gh[(c * side + i / scale) * side + j / scale] += gz[(c * big + i) * big + j];
                        }
                    }
                }
            }
        }
    }
}

/// Maps a padded coordinate (0 = top padding) to an unpadded index.
fn tap(padded: usize, side: usize) -> Option<usize> {
    (padded >= 1 && padded <= side).then(|| padded - 1)
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bias = |b: bool| if b { "bias" } else { "nobias" };
        match self.kind {
            LayerKind::FullyConnected { inputs, outputs, bias: b } => {
                write!(f, "fc {inputs} {outputs} {} {}", bias(b), self.activation)
            }
            LayerKind::Conv { in_channels, filters, side, stride, bias: b } => {
                write!(f, "conv {in_channels} {filters} {side} {stride} {} {}", bias(b), self.activation)
            }
            LayerKind::Upsample { channels, side, scale } => {
                write!(f, "upsample {channels} {side} {scale} {}", self.activation)
            }
        }
    }
}

impl std::str::FromStr for LayerSpec {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let tok: Vec<&str> = s.split_whitespace().collect();
        let num = |i: usize| -> Result<usize> {
            tok.get(i)
                .ok_or_else(|| invalid(format!("layer '{s}' is missing field {i}")))?
                .parse()
                .map_err(|_| invalid(format!("layer '{s}': field {i} is not an integer")))
        };
        let flag = |i: usize| -> Result<bool> {
            match tok.get(i).copied() {
                Some("bias") => Ok(true),
                Some("nobias") => Ok(false),
                _ => Err(invalid(format!("layer '{s}': field {i} must be bias or nobias"))),
            }
        };
        let act = |i: usize| -> Result<Activation> {
            tok.get(i).ok_or_else(|| invalid(format!("layer '{s}' is missing its activation")))?.parse()
        };
        let (kind, nfields, act_at) = match tok.first().copied() {
            Some("fc") => (LayerKind::FullyConnected { inputs: num(1)?, outputs: num(2)?, bias: flag(3)? }, 5, 4),
            Some("conv") => (
                LayerKind::Conv { in_channels: num(1)?, filters: num(2)?, side: num(3)?, stride: num(4)?, bias: flag(5)? },
                7,
                6,
            ),
            Some("upsample") => (LayerKind::Upsample { channels: num(1)?, side: num(2)?, scale: num(3)? }, 5, 4),
            _ => return Err(invalid(format!("unknown layer kind in '{s}'"))),
        };
        if tok.len() != nfields {
            return Err(invalid(format!("layer '{s}' has {} fields, expected {nfields}", tok.len())));
        }
        let spec = LayerSpec { kind, activation: act(act_at)? };
        spec.validate()?;
        Ok(spec)
    }
}
