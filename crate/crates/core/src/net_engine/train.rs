use super::Network;
use crate::error::{invalid, Error, Result};
use crate::linear_fc::TrainingSet;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Gd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam(lr: f64) -> Self {
        Optimizer::Adam { lr, beta1: ADAM_BETA1, beta2: ADAM_BETA2, eps: ADAM_EPS }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            Optimizer::Gd { lr } | Optimizer::Adam { lr, .. } => lr,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Optimizer::Gd { lr } => lr > 0.0 && lr.is_finite(),
            Optimizer::Adam { lr, beta1, beta2, eps } => {
                lr > 0.0 && lr.is_finite() && (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid optimizer settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub stop_loss: f64,
    pub max_steps: usize,
}

impl TrainConfig {
    pub fn new(optimizer: Optimizer, stop_loss: f64, max_steps: usize) -> Self {
        Self { optimizer, stop_loss, max_steps }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_loss: f64,
    pub steps: usize,
    /// Loss before each update, followed by the loss of `trained`.
    pub loss_history: Vec<f64>,
    pub trained: Network,
    pub converged: bool,
}

pub fn train(net: &Network, ts: &TrainingSet, cfg: &TrainConfig) -> Result<TrainReport> {
    train_observed(net, ts, cfg, |_, _| {})
}

/// Full-batch training. `observe(step, loss)` is called with the loss
/// before every update and once more at the end.
pub fn train_observed(
    net: &Network,
    ts: &TrainingSet,
    cfg: &TrainConfig,
    mut observe: impl FnMut(usize, f64),
) -> Result<TrainReport> {
    cfg.optimizer.validate()?;
    let mut net = net.clone();
    let np = net.param_count();
    let mut m = vec![0.0; np];
    let mut v = vec![0.0; np];
    let mut history = Vec::new();
    let mut steps = 0;
    let mut p1 = 1.0;
    let mut p2 = 1.0;
    loop {
        let (loss, grad) = net.loss_and_gradient(ts)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            let last = history.last().copied().unwrap_or(f64::NAN);
            return Err(Error::Divergence {
                steps,
                detail: format!("non-finite loss or gradient (last finite loss {last:e}, lr {})", cfg.optimizer.lr()),
            });
        }
        history.push(loss);
        observe(steps, loss);
        if loss < cfg.stop_loss || steps >= cfg.max_steps {
            return Ok(TrainReport {
                final_loss: loss,
                steps,
                loss_history: history,
                converged: loss < cfg.stop_loss,
                trained: net,
            });
        }
        let mut params = net.params().to_vec();
        match cfg.optimizer {
            Optimizer::Gd { lr } => params.iter_mut().zip(&grad).for_each(|(p, g)| *p -= lr * g),
            Optimizer::Adam { lr, beta1, beta2, eps } => {
                p1 *= beta1;
                p2 *= beta2;
                for k in 0..np {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
                    v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
                    let mh = m[k] / (1.0 - p1);
                    let vh = v[k] / (1.0 - p2);
                    params[k] -= lr * mh / (vh.sqrt() + eps);
                }
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { steps, detail: format!("parameters became non-finite (lr {})", cfg.optimizer.lr()) });
        }
        net.set_params(params)?;
        steps += 1;
    }
}
