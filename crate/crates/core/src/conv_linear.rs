//! Matrix forms of 3×3 convolution (padding 1) and nearest-neighbour
//! upsampling on zero-padded, channel-major vectorized images, plus
//! structural-zero and spectrum analysis of their products.

use crate::error::{invalid, shape, Result};
use crate::net_engine::{LayerKind, Network, KERNEL, KERNEL_LEN};
use crate::numkit::{eigenvalue_magnitudes, numerical_rank, Matrix, DEFAULT_RANK_TOL};

pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-2;

/// Weights of one conv layer, `filters × in_channels × 9`, each kernel
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFilterParams {
    pub weights: Vec<f64>,
    pub filters: usize,
    pub in_channels: usize,
    pub side: usize,
    pub stride: usize,
}

impl ConvFilterParams {
    pub fn new(weights: Vec<f64>, filters: usize, in_channels: usize, side: usize, stride: usize) -> Result<Self> {
        if filters == 0 || in_channels == 0 || side == 0 || stride == 0 {
            return Err(invalid("filter count, depth, side and stride must be positive"));
        }
        if weights.len() != filters * in_channels * KERNEL_LEN {
            return Err(shape(format!(
                "expected {} kernel weights ({filters} filters × {in_channels} channels × 9), got {}",
                filters * in_channels * KERNEL_LEN,
                weights.len()
            )));
        }
        if !side.is_multiple_of(stride) {
            return Err(invalid(format!("side {side} is not divisible by stride {stride}")));
        }
        Ok(Self { weights, filters, in_channels, side, stride })
    }

    /// One filter over one channel.
    pub fn single(kernel: [f64; 9], side: usize, stride: usize) -> Result<Self> {
        Self::new(kernel.to_vec(), 1, 1, side, stride)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedOp {
    pub matrix: Matrix,
    /// Row-major over `matrix`; `Some(k)` names the parameter index feeding
    /// that entry, `None` a forced zero. Composed operators carry no sources.
    pub source: Option<Vec<Option<usize>>>,
    /// Structural non-zero pattern, row-major over `matrix`.
    pub mask: Vec<bool>,
    pub in_channels: usize,
    pub in_side: usize,
    pub out_channels: usize,
    pub out_side: usize,
}

pub fn padded_len(channels: usize, side: usize) -> usize {
    channels * (side + 2) * (side + 2)
}

/// Indices of the non-padding coordinates in a padded vectorization.
pub fn interior_indices(channels: usize, side: usize) -> Vec<usize> {
    let p = side + 2;
    let mut out = Vec::with_capacity(channels * side * side);
    for c in 0..channels {
        for i in 0..side {
            for j in 0..side {
                out.push(c * p * p + (i + 1) * p + j + 1);
            }
        }
    }
    out
}

/// Zero-pads a channel-major image.
pub fn pad(x: &[f64], channels: usize, side: usize) -> Result<Vec<f64>> {
    if x.len() != channels * side * side {
        return Err(shape(format!("image has {} values, expected {}", x.len(), channels * side * side)));
    }
    let mut out = vec![0.0; padded_len(channels, side)];
    for (k, idx) in interior_indices(channels, side).into_iter().enumerate() {
        out[idx] = x[k];
    }
    Ok(out)
}

pub fn unpad(v: &[f64], channels: usize, side: usize) -> Result<Vec<f64>> {
    if v.len() != padded_len(channels, side) {
        return Err(shape(format!("padded vector has {} values, expected {}", v.len(), padded_len(channels, side))));
    }
    Ok(interior_indices(channels, side).into_iter().map(|i| v[i]).collect())
}

/// Output pixel `(i, j)` of filter `f` sits on padded output row
/// `f·(R+2)² + (i+1)(R+2) + j+1` with `R = s/stride`; kernel entry `(r, q)`
/// over channel `c` reads padded input column `c·P² + (stride·i + r)·P +
/// stride·j + q` with `P = s + 2`. Filters are stacked as row blocks and
/// input channels as column blocks.
pub fn create_filter_matrix(p: &ConvFilterParams) -> Result<LinearizedOp> {
    let p = ConvFilterParams::new(p.weights.clone(), p.filters, p.in_channels, p.side, p.stride)?;
    let (s, stride) = (p.side, p.stride);
    let padded = s + 2;
    let resized = s / stride;
    let out_p = resized + 2;
    let rows = p.filters * out_p * out_p;
    let cols = p.in_channels * padded * padded;
    let mut data = vec![0.0; rows * cols];
    let mut source = vec![None; rows * cols];
    for f in 0..p.filters {
        for i in 0..resized {
            for j in 0..resized {
                let row = f * out_p * out_p + (i + 1) * out_p + j + 1;
                for c in 0..p.in_channels {
                    for k in 0..KERNEL_LEN {
                        let (r, q) = (k / KERNEL, k % KERNEL);
                        let col = c * padded * padded + (stride * i + r) * padded + stride * j + q;
                        let pidx = (f * p.in_channels + c) * KERNEL_LEN + k;
                        data[row * cols + col] = p.weights[pidx];
                        source[row * cols + col] = Some(pidx);
                    }
                }
            }
        }
    }
    let mask = source.iter().map(Option::is_some).collect();
    Ok(LinearizedOp {
        matrix: Matrix::new(rows, cols, data)?,
        source: Some(source),
        mask,
        in_channels: p.in_channels,
        in_side: s,
        out_channels: p.filters,
        out_side: resized,
    })
}

/// Nearest-neighbour upsampling of an `f × s × s` padded image by `scale`.
pub fn create_upsampling_matrix(s: usize, f: usize, scale: usize) -> Result<LinearizedOp> {
    if s == 0 || f == 0 || scale == 0 {
        return Err(invalid("upsampling needs positive side, depth and scale"));
    }
    let in_p = s + 2;
    let out_side = s * scale;
    let out_p = out_side + 2;
    let rows = f * out_p * out_p;
    let cols = f * in_p * in_p;
    let mut data = vec![0.0; rows * cols];
    for c in 0..f {
        for i in 0..out_side {
            for j in 0..out_side {
                let row = c * out_p * out_p + (i + 1) * out_p + j + 1;
                let col = c * in_p * in_p + (i / scale + 1) * in_p + j / scale + 1;
                data[row * cols + col] = 1.0;
            }
        }
    }
    let mask = data.iter().map(|&v| v != 0.0).collect();
    Ok(LinearizedOp {
        matrix: Matrix::new(rows, cols, data)?,
        source: None,
        mask,
        in_channels: f,
        in_side: s,
        out_channels: f,
        out_side,
    })
}

impl LinearizedOp {
    pub fn input_len(&self) -> usize {
        padded_len(self.in_channels, self.in_side)
    }

    pub fn output_len(&self) -> usize {
        padded_len(self.out_channels, self.out_side)
    }

    /// Submatrix between non-padding coordinates.
    pub fn interior(&self) -> Matrix {
        self.matrix
            .select(&interior_indices(self.out_channels, self.out_side), &interior_indices(self.in_channels, self.in_side))
            .expect("interior indices in range")
    }

    pub fn interior_mask(&self) -> Vec<Vec<bool>> {
        let cols = self.matrix.cols();
        let ci = interior_indices(self.in_channels, self.in_side);
        interior_indices(self.out_channels, self.out_side)
            .into_iter()
            .map(|r| ci.iter().map(|&c| self.mask[r * cols + c]).collect())
            .collect()
    }

    /// Applies the operator to an unpadded image.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let padded = pad(x, self.in_channels, self.in_side)?;
        unpad(&self.matrix.mul_vec(&padded)?, self.out_channels, self.out_side)
    }

    /// Matrix text format followed by the 0/1 structural pattern.
    pub fn dump(&self) -> (String, String) {
        let (rows, cols) = self.matrix.shape();
        let mut mask = format!("{rows} {cols}\n");
        for r in 0..rows {
            let line: Vec<&str> = (0..cols).map(|c| if self.mask[r * cols + c] { "1" } else { "0" }).collect();
            mask.push_str(&line.join(" "));
            mask.push('\n');
        }
        (self.matrix.to_text(), mask)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    /// Full product on padded coordinates, last op applied last.
    pub full: LinearizedOp,
    /// Restriction to non-padding coordinates.
    pub interior: Matrix,
}

/// Multiplies the operators in application order.
pub fn compose(ops: &[LinearizedOp]) -> Result<Composed> {
    let first = ops.first().ok_or_else(|| invalid("compose needs at least one operator"))?;
    let mut acc = first.clone();
    for (k, op) in ops.iter().enumerate().skip(1) {
        if op.in_channels != acc.out_channels || op.in_side != acc.out_side {
            return Err(shape(format!(
                "operator {k} expects {}×{}×{} input but receives {}×{}×{}",
                op.in_channels, op.in_side, op.in_side, acc.out_channels, acc.out_side, acc.out_side
            )));
        }
        let matrix = op.matrix.matmul(&acc.matrix)?;
        let mask = bool_product(&op.mask, op.matrix.rows(), op.matrix.cols(), &acc.mask, acc.matrix.cols());
        acc = LinearizedOp {
            matrix,
            source: None,
            mask,
            in_channels: acc.in_channels,
            in_side: acc.in_side,
            out_channels: op.out_channels,
            out_side: op.out_side,
        };
    }
    let interior = acc.interior();
    Ok(Composed { full: acc, interior })
}

fn bool_product(a: &[bool], rows: usize, inner: usize, b: &[bool], cols: usize) -> Vec<bool> {
    let mut out = vec![false; rows * cols];
    for r in 0..rows {
        for k in 0..inner {
            if a[r * inner + k] {
                for c in 0..cols {
                    out[r * cols + c] |= b[k * cols + c];
                }
            }
        }
    }
    out
}

/// Linearizes a network made of bias-free conv/upsample layers with identity
/// activations.
pub fn linearize_network(net: &Network) -> Result<Composed> {
    let mut ops = Vec::with_capacity(net.layers().len());
    if net.skip_every().is_some() {
        return Err(invalid("networks with skip connections are linearized via their Jacobian"));
    }
    for (l, spec) in net.layers().iter().enumerate() {
        if spec.activation != crate::Activation::Identity {
            return Err(invalid(format!("layer {l} is nonlinear ({})", spec.activation)));
        }
        let op = match spec.kind {
            LayerKind::Conv { in_channels, filters, side, stride, bias: false } => create_filter_matrix(
                &ConvFilterParams::new(net.layer_params(l).to_vec(), filters, in_channels, side, stride)?,
            )?,
            LayerKind::Upsample { channels, side, scale } => create_upsampling_matrix(side, channels, scale)?,
            _ => return Err(invalid(format!("layer {l} is not a bias-free conv or upsample layer"))),
        };
        ops.push(op);
    }
    compose(&ops)
}

/// Structural zeros in the interior of a product of `layer_count` generic
/// single-channel stride-1 conv matrices on `s × s` images.
pub fn forced_zero_count(layer_count: usize, s: usize) -> Result<usize> {
    if layer_count == 0 || s == 0 {
        return Err(invalid("layer count and side must be positive"));
    }
    let op = create_filter_matrix(&ConvFilterParams::single([1.0; 9], s, 1)?)?;
    let ops = vec![op; layer_count];
    let composed = compose(&ops)?;
    Ok(composed.full.interior_mask().iter().flatten().filter(|&&m| !m).count())
}

/// `⌈s⁴ / 9⌉`: depth at which a single-filter stack has as many parameters as
/// a fully connected layer on `s × s` images.
pub fn heuristic_depth(s: usize) -> Result<usize> {
    if s == 0 {
        return Err(invalid("side must be positive"));
    }
    Ok((s.pow(4)).div_ceil(KERNEL_LEN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Eigenvalue magnitudes above the tail threshold, descending.
    pub leading: Vec<f64>,
    /// Largest magnitude below the threshold (0 when there is none).
    pub tail_bound: f64,
    pub rank_estimate: usize,
    pub magnitudes: Vec<f64>,
    pub tail_threshold: f64,
}

impl SpectrumReport {
    /// Leading magnitudes followed by `[< tail]`.
    pub fn bracket(&self) -> String {
        let lead: Vec<String> = self.leading.iter().map(|v| format!("{v:.3}")).collect();
        let mut s = lead.join(", ");
        if self.leading.len() < self.magnitudes.len() {
            if !s.is_empty() {
                s.push_str(", ");
            }
            s.push_str(&format!("[< {:.0e}]", self.tail_threshold));
        }
        s
    }
}

pub fn spectrum(op: &Matrix, tail_threshold: f64) -> Result<SpectrumReport> {
    spectrum_with_rank_tol(op, tail_threshold, DEFAULT_RANK_TOL)
}

pub fn spectrum_with_rank_tol(op: &Matrix, tail_threshold: f64, rank_tol: f64) -> Result<SpectrumReport> {
    if !op.is_square() {
        return Err(shape(format!("spectrum needs a square operator, got {:?}", op.shape())));
    }
    let mut magnitudes = eigenvalue_magnitudes(op)?;
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let split = magnitudes.iter().position(|&m| m <= tail_threshold).unwrap_or(magnitudes.len());
    Ok(SpectrumReport {
        leading: magnitudes[..split].to_vec(),
        tail_bound: magnitudes[split..].first().copied().unwrap_or(0.0),
        rank_estimate: numerical_rank(op, rank_tol)?,
        magnitudes,
        tail_threshold,
    })
}
