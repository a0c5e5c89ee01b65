//! Linear single-layer autoencoders `f(x) = A x` trained by full-batch
//! gradient descent on `½ Σ ‖A x⁽ⁱ⁾ − x⁽ⁱ⁾‖²`.
//!
//! From `A⁽⁰⁾ = 0` the iterates obey `A⁽ᵗ⁺¹⁾ = A⁽ᵗ⁾(I − γS) + γS` with
//! `S = Σ x⁽ⁱ⁾x⁽ⁱ⁾ᵀ`, which solves to `A⁽ᵗ⁾ = I − (I − γS)ᵗ` and converges to
//! the orthogonal projector onto the span of the examples when `γ < 1/λ₁(S)`.

use crate::error::{invalid, shape, Error, Result};
use crate::numkit::{self, check_positive, dot, parse_f64s, parse_usizes, svd, sym_eig, Matrix};

/// A non-empty set of examples of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    examples: Vec<Vec<f64>>,
    dim: usize,
}

/// Relative tolerance used to decide the dimension of the example span.
pub const SPAN_RANK_TOL: f64 = 1e-8;

impl TrainingSet {
    pub fn new(examples: Vec<Vec<f64>>) -> Result<Self> {
        let dim = examples.first().map(Vec::len).ok_or_else(|| invalid("training set needs at least one example"))?;
        if dim == 0 {
            return Err(invalid("examples must have positive dimension"));
        }
        if let Some(i) = examples.iter().position(|x| x.len() != dim) {
            return Err(shape(format!("example {i} has dimension {} instead of {dim}", examples[i].len())));
        }
        if examples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("training example entry".into()));
        }
        Ok(Self { examples, dim })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn examples(&self) -> &[Vec<f64>] {
        &self.examples
    }

    pub fn example(&self, i: usize) -> &[f64] {
        &self.examples[i]
    }

    /// `d × n` matrix with the examples as columns.
    pub fn as_columns(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.len(), |r, c| self.examples[c][r])
    }

    /// Dimension of the span of the examples (SVD rank at [`SPAN_RANK_TOL`]).
    pub fn span_dim(&self) -> usize {
        numkit::numerical_rank(&self.as_columns(), SPAN_RANK_TOL).expect("finite by construction")
    }

    /// Text form: an `n d` header followed by one example per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.len(), self.dim);
        for x in &self.examples {
            let line: Vec<String> = x.iter().map(|v| numkit::fmt_f64(*v)).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty input".into() })?;
        let dims = parse_usizes(header, hl + 1)?;
        if dims.len() != 2 {
            return Err(Error::Parse { line: hl + 1, message: "expected `n d` header".into() });
        }
        let (n, d) = (dims[0], dims[1]);
        let mut examples = Vec::with_capacity(n);
        for (idx, line) in lines {
            let x = parse_f64s(line, idx + 1)?;
            if x.len() != d {
                return Err(Error::Parse { line: idx + 1, message: format!("expected {d} values, found {}", x.len()) });
            }
            examples.push(x);
        }
        if examples.len() != n {
            return Err(Error::Parse {
                line: hl + 1,
                message: format!("header declares {n} examples, found {}", examples.len()),
            });
        }
        Self::new(examples)
    }
}

/// `S = Σ x⁽ⁱ⁾ x⁽ⁱ⁾ᵀ`.
pub fn covariance(ts: &TrainingSet) -> Matrix {
    let d = ts.dim();
    let mut s = Matrix::zeros(d, d);
    for x in ts.examples() {
        for r in 0..d {
            if x[r] == 0.0 {
                continue;
            }
            for (c, xc) in x.iter().enumerate() {
                s[(r, c)] += x[r] * xc;
            }
        }
    }
    s
}

/// `½ Σ ‖A x⁽ⁱ⁾ − x⁽ⁱ⁾‖²`.
pub fn reconstruction_loss(a: &Matrix, ts: &TrainingSet) -> f64 {
    ts.examples()
        .iter()
        .map(|x| {
            let ax = a.mul_vec(x).expect("shape checked by caller");
            0.5 * ax.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()
        })
        .sum()
}

/// Largest eigenvalue of `S`.
pub fn top_eigenvalue(ts: &TrainingSet) -> f64 {
    sym_eig(&covariance(ts), 1e-9).expect("covariance is symmetric").values[0]
}

/// Learning rate `0.9 / λ₁(S)`.
pub fn default_learning_rate(ts: &TrainingSet) -> f64 {
    0.9 / top_eigenvalue(ts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    /// Loss fell below the stop threshold or the weights stopped moving.
    Converged,
    MaxSteps,
    /// Loss rose for [`DIVERGENCE_WINDOW`] consecutive steps; the weights are
    /// the last iterate before the rise started.
    Diverged,
}

/// Consecutive loss increases that count as divergence.
pub const DIVERGENCE_WINDOW: usize = 10;

/// Default relative weight-change threshold for declaring convergence.
pub const DEFAULT_MIN_REL_CHANGE: f64 = 1e-10;

/// Default loss threshold for the linear trainer.
pub const DEFAULT_STOP_LOSS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LinearGdRun {
    pub weights: Matrix,
    pub learning_rate: f64,
    pub steps_taken: usize,
    /// Loss of `A⁽ᵗ⁾` for `t = 0..=steps_taken`.
    pub loss_history: Vec<f64>,
    pub status: GdStatus,
}

/// Stopping rule for [`gd_linear_with`].
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub max_steps: usize,
    pub stop_loss: f64,
    /// Stop once `‖A⁽ᵗ⁺¹⁾ − A⁽ᵗ⁾‖_F ≤ min_rel_change · ‖A⁽ᵗ⁺¹⁾‖_F`; zero disables.
    pub min_rel_change: f64,
}

impl StopRule {
    /// Runs exactly `steps` updates.
    pub fn fixed(steps: usize) -> Self {
        Self { max_steps: steps, stop_loss: 0.0, min_rel_change: 0.0 }
    }
}

/// Gradient descent from `A⁽⁰⁾ = 0`, stopping at `stop_loss`, at relative
/// weight change [`DEFAULT_MIN_REL_CHANGE`], or after `max_steps`.
pub fn gd_linear(ts: &TrainingSet, gamma: f64, max_steps: usize, stop_loss: f64) -> Result<LinearGdRun> {
    gd_linear_with(ts, gamma, StopRule { max_steps, stop_loss, min_rel_change: DEFAULT_MIN_REL_CHANGE })
}

pub fn gd_linear_with(ts: &TrainingSet, gamma: f64, rule: StopRule) -> Result<LinearGdRun> {
    let d = ts.dim();
    run_recurrence(ts, Matrix::zeros(d, d), gamma, rule, |_, _| {})
}

fn run_recurrence(
    ts: &TrainingSet,
    init: Matrix,
    gamma: f64,
    rule: StopRule,
    mut observe: impl FnMut(usize, &Matrix),
) -> Result<LinearGdRun> {
    check_positive("learning rate", gamma)?;
    let d = ts.dim();
    if init.shape() != (d, d) {
        return Err(shape(format!("initial matrix must be {d}x{d}, got {:?}", init.shape())));
    }
    let s = covariance(ts);
    // A ← A + γ (I − A) S; I·S is hoisted out of the loop.
    let gamma_s = s.scale(gamma);
    let mut a = init;
    let mut history = vec![reconstruction_loss(&a, ts)];
    let mut rising = 0;
    let mut last_stable = a.clone();
    let mut status = GdStatus::MaxSteps;
    observe(0, &a);
    let mut steps = 0;
    while steps < rule.max_steps {
        if history[steps] < rule.stop_loss {
            status = GdStatus::Converged;
            break;
        }
        let as_ = a.matmul(&gamma_s)?;
        let next = a.add(&gamma_s)?.sub(&as_)?;
        next.ensure_finite().map_err(|_| Error::Divergence { steps, detail: "non-finite iterate".into() })?;
        let change = next.sub(&a)?.frobenius_norm();
        let norm = next.frobenius_norm();
        let prev = std::mem::replace(&mut a, next);
        steps += 1;
        observe(steps, &a);
        let loss = reconstruction_loss(&a, ts);
        if loss > history[steps - 1] {
            if rising == 0 {
                last_stable = prev;
            }
            rising += 1;
        } else {
            rising = 0;
        }
        history.push(loss);
        if rising >= DIVERGENCE_WINDOW {
            return Ok(LinearGdRun {
                weights: last_stable,
                learning_rate: gamma,
                steps_taken: steps,
                loss_history: history,
                status: GdStatus::Diverged,
            });
        }
        if rule.min_rel_change > 0.0 && change <= rule.min_rel_change * norm.max(f64::MIN_POSITIVE) {
            status = GdStatus::Converged;
            break;
        }
    }
    if steps == rule.max_steps && history[steps] < rule.stop_loss {
        status = GdStatus::Converged;
    }
    Ok(LinearGdRun { weights: a, learning_rate: gamma, steps_taken: steps, loss_history: history, status })
}

/// Exact `t`-step iterate from zero, `Q (I − (I − γΛ)ᵗ) Qᵀ`.
pub fn gd_linear_closed_form(ts: &TrainingSet, gamma: f64, t: u64) -> Result<Matrix> {
    check_positive("learning rate", gamma)?;
    let eig = sym_eig(&covariance(ts), 1e-9)?;
    let factors: Vec<f64> = eig.values.iter().map(|&l| 1.0 - powu(1.0 - gamma * l, t)).collect();
    let q = &eig.vectors;
    let d = ts.dim();
    Ok(Matrix::from_fn(d, d, |r, c| (0..d).map(|k| q[(r, k)] * factors[k] * q[(c, k)]).sum()))
}

fn powu(base: f64, exp: u64) -> f64 {
    if exp <= i32::MAX as u64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp as f64)
    }
}

/// Orthogonal projector onto the span of the examples, i.e. the
/// minimum-Frobenius-norm `A` with `A x⁽ⁱ⁾ = x⁽ⁱ⁾`.
pub fn min_norm_projection(ts: &TrainingSet, rel_tol: f64) -> Result<Matrix> {
    let dec = svd(&ts.as_columns())?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> =
        (0..dec.singular_values.len()).filter(|&k| smax > 0.0 && dec.singular_values[k] > rel_tol * smax).collect();
    let d = ts.dim();
    let u = &dec.u;
    Ok(Matrix::from_fn(d, d, |r, c| keep.iter().map(|&k| u[(r, k)] * u[(c, k)]).sum()))
}

/// Minimum-norm solution of `B x⁽ⁱ⁾ = y⁽ⁱ⁾` for all `i`, i.e.
/// `B = Y (XᵀX)⁺ Xᵀ` with examples and targets as columns.
pub fn min_norm_solve(ts: &TrainingSet, targets: &[Vec<f64>], rel_tol: f64) -> Result<Matrix> {
    if targets.len() != ts.len() {
        return Err(shape("one target per example required"));
    }
    let d_out = targets.first().map_or(0, Vec::len);
    let x = ts.as_columns();
    let dec = svd(&x)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let y = Matrix::from_columns(targets)?;
    if y.rows() != d_out {
        return Err(shape("ragged targets"));
    }
    // X⁺ = V Σ⁻¹ Uᵀ, B = Y X⁺.
    let (d, n) = x.shape();
    let mut pinv = Matrix::zeros(n, d);
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if smax == 0.0 || s <= rel_tol * smax {
            continue;
        }
        for r in 0..n {
            for c in 0..d {
                pinv[(r, c)] += dec.v[(r, k)] * dec.u[(c, k)] / s;
            }
        }
    }
    y.matmul(&pinv)
}

/// Gradient descent from an arbitrary initial matrix.
///
/// Updates are right-multiplied by `S`, so `A w = init · w` for every `w`
/// orthogonal to the span of the examples.
pub fn gd_linear_from(ts: &TrainingSet, init: &Matrix, gamma: f64, steps: usize) -> Result<Matrix> {
    gd_linear_from_observed(ts, init, gamma, steps, |_, _| {})
}

/// As [`gd_linear_from`], calling `observe(t, A⁽ᵗ⁾)` after every step
/// (and once for `t = 0`).
pub fn gd_linear_from_observed(
    ts: &TrainingSet,
    init: &Matrix,
    gamma: f64,
    steps: usize,
    observe: impl FnMut(usize, &Matrix),
) -> Result<Matrix> {
    let run = run_recurrence(ts, init.clone(), gamma, StopRule::fixed(steps), observe)?;
    match run.status {
        GdStatus::Diverged => {
            Err(Error::Divergence { steps: run.steps_taken, detail: format!("learning rate {gamma} too large") })
        }
        _ => Ok(run.weights),
    }
}

/// Inner products `⟨x⁽ⁱ⁾, x⁽ʲ⁾⟩`.
pub fn gram(ts: &TrainingSet) -> Matrix {
    let n = ts.len();
    Matrix::from_fn(n, n, |i, j| dot(ts.example(i), ts.example(j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(d: usize, idx: &[usize]) -> TrainingSet {
        TrainingSet::new(idx.iter().map(|&i| (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect())
            .unwrap()
    }

    #[test]
    fn training_set_validation() {
        assert!(TrainingSet::new(vec![]).is_err());
        assert!(TrainingSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(TrainingSet::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn covariance_of_basis_vectors() {
        let s = covariance(&basis(3, &[0]));
        assert_eq!(s.data(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s = covariance(&basis(4, &[0, 1]));
        assert_eq!(s, Matrix::diag(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn first_step_is_gamma_s() {
        let ts = basis(3, &[0, 1, 2]);
        let run = gd_linear_with(&ts, 0.3, StopRule::fixed(1)).unwrap();
        assert_eq!(run.weights, Matrix::identity(3).scale(0.3));
        assert_eq!(gd_linear_closed_form(&ts, 0.3, 0).unwrap(), Matrix::zeros(3, 3));
    }

    #[test]
    fn single_axis_converges_to_axis_projector() {
        let ts = basis(3, &[0]);
        let run = gd_linear(&ts, 0.5, 10_000, 1e-30).unwrap();
        assert_eq!(run.status, GdStatus::Converged);
        let target = Matrix::outer(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]);
        assert!(run.weights.sub(&target).unwrap().max_abs() < 1e-9);
        assert!(run.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn orthonormal_examples_give_identity() {
        let p = min_norm_projection(&basis(3, &[0, 1, 2]), 1e-8).unwrap();
        assert!(p.sub(&Matrix::identity(3)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn large_rate_is_reported_as_divergence() {
        let ts = TrainingSet::new(vec![vec![1.0, 2.0]]).unwrap();
        let run = gd_linear(&ts, 1.0, 1000, 1e-12).unwrap();
        assert_eq!(run.status, GdStatus::Diverged);
        assert!(run.weights.max_abs().is_finite());
        assert!(gd_linear_from(&ts, &Matrix::zeros(2, 2), 1.0, 1000).is_err());
    }

    #[test]
    fn text_format() {
        let ts = TrainingSet::new(vec![vec![0.5, 0.25], vec![1.0, -2.0]]).unwrap();
        let text = ts.to_text();
        assert!(text.starts_with("2 2\n"));
        assert_eq!(TrainingSet::from_text(&text).unwrap(), ts);
        assert!(TrainingSet::from_text("2 2\n1 2\n").is_err());
    }
}
