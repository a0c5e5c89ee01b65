//! Element-wise nonlinearities with derivative and minimum-norm pre-image.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Slope of the negative branch of leaky ReLU unless configured otherwise.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    Sigmoid,
    Tanh,
    Relu,
    LeakyRelu(f64),
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu(a) => {
                if z >= 0.0 {
                    z
                } else {
                    a * z
                }
            }
        }
    }

    /// Derivative; at the ReLU kink the right derivative (1) is used.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(a) => {
                if z >= 0.0 {
                    1.0
                } else {
                    a
                }
            }
        }
    }

    /// Whether `y` is attained by the activation.
    pub fn in_range(self, y: f64) -> bool {
        match self {
            Activation::Identity => y.is_finite(),
            Activation::Sigmoid => y > 0.0 && y < 1.0,
            Activation::Tanh => y > -1.0 && y < 1.0,
            Activation::Relu => y >= 0.0 && y.is_finite(),
            Activation::LeakyRelu(a) => y.is_finite() && (y >= 0.0 || a > 0.0),
        }
    }

    /// The pre-image of `y` with the smallest absolute value.
    ///
    /// For ReLU the pre-image of 0 is the whole half-line (-∞, 0], whose
    /// minimum-norm element is 0.
    pub fn min_norm_preimage(self, y: f64) -> Result<f64> {
        if !self.in_range(y) {
            return Err(invalid(format!("{y} is outside the range of {self}")));
        }
        Ok(match self {
            Activation::Identity | Activation::Relu => y,
            Activation::Sigmoid => y.ln() - (-y).ln_1p(),
            Activation::Tanh => y.atanh(),
            Activation::LeakyRelu(a) => {
                if y >= 0.0 {
                    y
                } else {
                    y / a
                }
            }
        })
    }

    pub fn preimage_vec(self, ys: &[f64]) -> Result<Vec<f64>> {
        ys.iter().map(|&y| self.min_norm_preimage(y)).collect()
    }

    pub fn apply_vec(self, zs: &[f64]) -> Vec<f64> {
        zs.iter().map(|&z| self.apply(z)).collect()
    }

    pub fn is_smooth(self) -> bool {
        matches!(self, Activation::Identity | Activation::Sigmoid | Activation::Tanh)
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Identity => write!(f, "identity"),
            Activation::Sigmoid => write!(f, "sigmoid"),
            Activation::Tanh => write!(f, "tanh"),
            Activation::Relu => write!(f, "relu"),
            Activation::LeakyRelu(a) => write!(f, "leaky_relu:{a}"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(slope) = s.strip_prefix("leaky_relu:") {
            let a: f64 = slope.parse().map_err(|_| invalid(format!("bad leaky_relu slope `{slope}`")))?;
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid(format!("leaky_relu slope must lie in (0, 1), got {a}")));
            }
            return Ok(Activation::LeakyRelu(a));
        }
        match s {
            "identity" | "none" | "linear" => Ok(Activation::Identity),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "leaky_relu" => Ok(Activation::LeakyRelu(DEFAULT_LEAKY_SLOPE)),
            other => Err(invalid(format!("unknown activation `{other}`"))),
        }
    }
}
