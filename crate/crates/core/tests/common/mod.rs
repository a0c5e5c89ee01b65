//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use memolab_core::numkit::Matrix;
use memolab_core::rng::Rng64;
use rand::Rng;

pub fn uniform_vec(rng: &mut Rng64, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

/// Zero-padded 3×3 cross-correlation on unpadded channel-major images.
pub fn direct_conv(
    weights: &[f64],
    filters: usize,
    in_channels: usize,
    side: usize,
    stride: usize,
    x: &[f64],
) -> Vec<f64> {
    let out = side / stride;
    let px = |c: usize, r: isize, q: isize| -> f64 {
        if r < 0 || q < 0 || r >= side as isize || q >= side as isize {
            0.0
        } else {
            x[c * side * side + r as usize * side + q as usize]
        }
    };
    let mut y = vec![0.0; filters * out * out];
    for f in 0..filters {
        for i in 0..out {
            for j in 0..out {
                let mut acc = 0.0;
                for c in 0..in_channels {
                    for r in 0..3 {
                        for q in 0..3 {
                            let w = weights[(f * in_channels + c) * 9 + r * 3 + q];
                            acc += w * px(c, (stride * i + r) as isize - 1, (stride * j + q) as isize - 1);
                        }
                    }
                }
                y[f * out * out + i * out + j] = acc;
            }
        }
    }
    y
}

pub fn direct_upsample(x: &[f64], channels: usize, side: usize, scale: usize) -> Vec<f64> {
    let out = side * scale;
    let mut y = vec![0.0; channels * out * out];
    for c in 0..channels {
        for i in 0..out {
            for j in 0..out {
                y[c * out * out + i * out + j] = x[c * side * side + (i / scale) * side + j / scale];
            }
        }
    }
    y
}

pub fn to_na(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}
