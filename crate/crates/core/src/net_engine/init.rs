use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::layer::LayerSpec;
use crate::error::{invalid, Result};
use crate::rng::Rng64;

/// Constant used when an initializer is described only as "close to zero".
pub const DEFAULT_SMALL_CONSTANT: f64 = 1e-3;
/// Constant for deep single-filter conv stacks.
pub const DEEP_CONV_CONSTANT: f64 = 1e-1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initializer {
    Zeros,
    Constant(f64),
    XavierUniform,
    XavierNormal,
    KaimingUniform,
    KaimingNormal,
    /// Uniform on `±1/√fan_in` for weights and biases.
    FrameworkDefault,
}

impl Initializer {
    /// Fills `out` (weights then bias) for one layer.
    pub(crate) fn fill(self, layer: &LayerSpec, rng: &mut Rng64, out: &mut [f64]) {
        let nw = layer.weight_count();
        let (fi, fo) = (layer.fan_in() as f64, layer.fan_out() as f64);
        let (w, b) = out.split_at_mut(nw);
        match self {
            Initializer::Zeros => out.iter_mut().for_each(|v| *v = 0.0),
            Initializer::Constant(c) => out.iter_mut().for_each(|v| *v = c),
            Initializer::XavierUniform => {
                uniform(rng, w, (6.0 / (fi + fo)).sqrt());
                b.iter_mut().for_each(|v| *v = 0.0);
            }
            Initializer::XavierNormal => {
                normal(rng, w, (2.0 / (fi + fo)).sqrt());
                b.iter_mut().for_each(|v| *v = 0.0);
            }
            Initializer::KaimingUniform => {
                uniform(rng, w, (6.0 / fi).sqrt());
                b.iter_mut().for_each(|v| *v = 0.0);
            }
            Initializer::KaimingNormal => {
                normal(rng, w, (2.0 / fi).sqrt());
                b.iter_mut().for_each(|v| *v = 0.0);
            }
            Initializer::FrameworkDefault => {
                let bound = 1.0 / fi.sqrt();
                uniform(rng, w, bound);
                uniform(rng, b, bound);
            }
        }
    }
}

fn uniform(rng: &mut Rng64, out: &mut [f64], bound: f64) {
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    out.iter_mut().for_each(|v| *v = dist.sample(rng));
}

fn normal(rng: &mut Rng64, out: &mut [f64], std: f64) {
    let dist = Normal::new(0.0, std).expect("finite std");
    out.iter_mut().for_each(|v| *v = dist.sample(rng));
}

/// Draws i.i.d. standard normal entries.
pub(crate) fn standard_normal(rng: &mut impl Rng, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = rng.sample(rand_distr::StandardNormal));
}

impl fmt::Display for Initializer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initializer::Zeros => write!(f, "zeros"),
            Initializer::Constant(c) => write!(f, "constant:{c}"),
            Initializer::XavierUniform => write!(f, "xavier_uniform"),
            Initializer::XavierNormal => write!(f, "xavier_normal"),
            Initializer::KaimingUniform => write!(f, "kaiming_uniform"),
            Initializer::KaimingNormal => write!(f, "kaiming_normal"),
            Initializer::FrameworkDefault => write!(f, "framework_default"),
        }
    }
}

impl std::str::FromStr for Initializer {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zeros" => Initializer::Zeros,
            "constant" => Initializer::Constant(DEFAULT_SMALL_CONSTANT),
            "xavier_uniform" => Initializer::XavierUniform,
            "xavier_normal" => Initializer::XavierNormal,
            "kaiming_uniform" => Initializer::KaimingUniform,
            "kaiming_normal" => Initializer::KaimingNormal,
            "framework_default" => Initializer::FrameworkDefault,
            other => {
                let c = other
                    .strip_prefix("constant:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|c| c.is_finite())
                    .ok_or_else(|| invalid(format!("unknown initializer '{other}'")))?;
                Initializer::Constant(c)
            }
        })
    }
}
