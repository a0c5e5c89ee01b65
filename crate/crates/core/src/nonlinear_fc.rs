//! Nonlinear single-layer autoencoders `f(x) = φ(A x)` without bias.
//!
//! Under Assumption-1-style data conditions, gradient descent from zero with
//! a per-example adaptive learning rate converges to the minimum-norm `A`
//! solving `A x⁽ⁱ⁾ = φ⁻¹(x⁽ⁱ⁾)`. Consequently every training example is a
//! φ-eigenvector with eigenvalue 1 and `φ(A y)` lies in the φ-span of the
//! training set for any `y`.

pub use crate::activation::Activation;
use crate::error::{invalid, shape, Error, Result};
use crate::linear_fc::TrainingSet;
use crate::numkit::{dot, norm, orthonormal_basis, Matrix};

/// Sample count for the convexity/monotonicity check of clause (c).
pub const CURVATURE_SAMPLES: usize = 1000;
/// Floor of the second-difference tolerance; the rounding bound takes over on short intervals.
pub const CURVATURE_TOL: f64 = 1e-9;
/// Reconstruction residual at which the trainers stop.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Which side of `φ(0)` the entries of a coordinate lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClauseReport {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl ClauseReport {
    fn from_failures(failures: Vec<String>) -> Self {
        Self { passed: failures.is_empty(), failures }
    }
}

/// Shape of φ on the interval between 0 and the extreme pre-image of a
/// coordinate, matching one of the four admissible cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureCase {
    ConvexDecreasing,
    ConcaveIncreasing,
    ConvexIncreasing,
    ConcaveDecreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assumption1Report {
    /// (a) all entries strictly inside (0, 1).
    pub range: ClauseReport,
    /// (b) per coordinate, all entries on one side of φ(0).
    pub side: ClauseReport,
    /// (c) φ strictly convex/concave and monotone on the relevant interval.
    pub curvature: ClauseReport,
    pub sides: Vec<Option<Side>>,
    pub cases: Vec<Option<CurvatureCase>>,
}

impl Assumption1Report {
    pub fn passed(&self) -> bool {
        self.range.passed && self.side.passed && self.curvature.passed
    }
}

pub fn check_assumption1(ts: &TrainingSet, phi: Activation) -> Assumption1Report {
    let d = ts.dim();
    let mut range_fail = Vec::new();
    for (i, x) in ts.examples().iter().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                range_fail.push(format!("x[{i}][{j}] = {v} not in (0, 1)"));
            }
        }
    }

    let phi0 = phi.apply(0.0);
    let mut side_fail = Vec::new();
    let mut sides = vec![None; d];
    for (j, side) in sides.iter_mut().enumerate() {
        let col: Vec<f64> = ts.examples().iter().map(|x| x[j]).collect();
        if col.iter().all(|&v| v < phi0) {
            *side = Some(Side::Below);
        } else if col.iter().all(|&v| v > phi0) {
            *side = Some(Side::Above);
        } else {
            side_fail.push(format!("coordinate {j} straddles φ(0) = {phi0}"));
        }
    }

    let mut curv_fail = Vec::new();
    let mut cases = vec![None; d];
    for (j, case) in cases.iter_mut().enumerate() {
        let pre: Result<Vec<f64>> = ts.examples().iter().map(|x| phi.min_norm_preimage(x[j])).collect();
        let pre = match pre {
            Ok(p) => p,
            Err(_) => {
                curv_fail.push(format!("coordinate {j} has entries outside range({phi})"));
                continue;
            }
        };
        let extreme = pre.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if extreme == 0.0 {
            curv_fail.push(format!("coordinate {j}: extreme pre-image is 0"));
            continue;
        }
        let shape = sample_shape(phi, extreme.min(0.0), extreme.max(0.0));
        let found = match (extreme > 0.0, shape) {
            (true, Shape { convex: true, decreasing: true, .. }) => Some(CurvatureCase::ConvexDecreasing),
            (true, Shape { concave: true, increasing: true, .. }) => Some(CurvatureCase::ConcaveIncreasing),
            (false, Shape { convex: true, increasing: true, .. }) => Some(CurvatureCase::ConvexIncreasing),
            (false, Shape { concave: true, decreasing: true, .. }) => Some(CurvatureCase::ConcaveDecreasing),
            _ => None,
        };
        match found {
            Some(c) => *case = Some(c),
            None => curv_fail.push(format!(
                "coordinate {j}: {phi} is not strictly convex/concave and monotone on the interval to {extreme}"
            )),
        }
    }

    Assumption1Report {
        range: ClauseReport::from_failures(range_fail),
        side: ClauseReport::from_failures(side_fail),
        curvature: ClauseReport::from_failures(curv_fail),
        sides,
        cases,
    }
}

#[derive(Debug, Clone, Copy)]
struct Shape {
    convex: bool,
    concave: bool,
    increasing: bool,
    decreasing: bool,
}

/// Samples first and second differences of φ on `[lo, hi]`.
///
/// Strictness is read as "no sign flips beyond the tolerance and a
/// non-degenerate second difference on at least 99% of the samples"; an
/// isolated inflection at an endpoint is allowed.
fn sample_shape(phi: Activation, lo: f64, hi: f64) -> Shape {
    let n = CURVATURE_SAMPLES;
    let h = (hi - lo) / n as f64;
    // Rounding in the second difference is about ε/h², which dominates on short intervals.
    let tol = CURVATURE_TOL.max(8.0 * f64::EPSILON / (h * h));
    let mut pos = 0;
    let mut neg = 0;
    let mut flips_convex = false;
    let mut flips_concave = false;
    for k in 0..=n {
        let z = lo + h * k as f64;
        let c = (phi.apply(z + h) - 2.0 * phi.apply(z) + phi.apply(z - h)) / (h * h);
        if c > tol {
            pos += 1;
        } else if c < -tol {
            neg += 1;
        }
        flips_convex |= c < -tol;
        flips_concave |= c > tol;
    }
    let strict = (0.99 * (n + 1) as f64) as usize;
    let mut increasing = true;
    let mut decreasing = true;
    for k in 0..n {
        let z = lo + h * k as f64;
        let step = phi.apply(z + h) - phi.apply(z);
        increasing &= step > 0.0;
        decreasing &= step < 0.0;
    }
    Shape {
        convex: !flips_convex && pos >= strict,
        concave: !flips_concave && neg >= strict,
        increasing,
        decreasing,
    }
}

/// Learning-rate parameters of the adaptive trainer.
#[derive(Debug, Clone)]
pub struct AdaptiveGdConfig {
    /// Base rate γ; must satisfy `γ < 1/(n L d)`.
    pub gamma: f64,
    /// `L = max x_j⁽ⁱ⁾ / x_k⁽ⁱ⁾ ≥ 1`.
    pub ratio_bound: f64,
    /// `slopes[r][i] = −(φ(0) − x_r⁽ⁱ⁾) / φ⁻¹(x_r⁽ⁱ⁾)`: secant slope of φ between
    /// 0 and the pre-image of coordinate `r` of example `i`.
    pub slopes: Vec<Vec<f64>>,
    pub max_steps: usize,
    pub residual_tol: f64,
}

impl AdaptiveGdConfig {
    /// Derives `L` and the slope table from the data and sets
    /// `γ = fraction / (n L d)`, `fraction ∈ (0, 1)`.
    pub fn from_data(ts: &TrainingSet, phi: Activation, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(invalid(format!("rate fraction must lie in (0, 1), got {fraction}")));
        }
        let ratio_bound = ratio_bound(ts)?;
        let slopes = slope_table(ts, phi)?;
        let (n, d) = (ts.len() as f64, ts.dim() as f64);
        Ok(Self {
            gamma: fraction / (n * ratio_bound * d),
            ratio_bound,
            slopes,
            max_steps: DEFAULT_MAX_STEPS,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        })
    }

    pub fn rate_limit(&self, ts: &TrainingSet) -> f64 {
        1.0 / (ts.len() as f64 * self.ratio_bound * ts.dim() as f64)
    }

    /// Per-(row, example) rate `γ_{ri} = −γ / s_{ri}` in the update
    /// `a_r ← a_r + Σᵢ γ_{ri} (φ(a_r·x⁽ⁱ⁾) − x_r⁽ⁱ⁾) x⁽ⁱ⁾`.
    pub fn example_rate(&self, row: usize, example: usize) -> f64 {
        -self.gamma / self.slopes[row][example]
    }
}

/// `max_{i,j,k} x_j⁽ⁱ⁾ / x_k⁽ⁱ⁾` over strictly positive data.
pub fn ratio_bound(ts: &TrainingSet) -> Result<f64> {
    let mut l: f64 = 1.0;
    for x in ts.examples() {
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        if lo <= 0.0 {
            return Err(invalid("ratio bound needs strictly positive entries"));
        }
        l = l.max(hi / lo);
    }
    Ok(l)
}

/// `s[r][i] = −(φ(0) − x_r⁽ⁱ⁾) / φ⁻¹(x_r⁽ⁱ⁾)`.
pub fn slope_table(ts: &TrainingSet, phi: Activation) -> Result<Vec<Vec<f64>>> {
    let phi0 = phi.apply(0.0);
    (0..ts.dim())
        .map(|r| {
            ts.examples()
                .iter()
                .map(|x| {
                    let z = phi.min_norm_preimage(x[r])?;
                    if z == 0.0 {
                        return Err(invalid(format!("coordinate {r} has an entry equal to φ(0)")));
                    }
                    Ok(-(phi0 - x[r]) / z)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct NonlinearRun {
    pub weights: Matrix,
    pub steps: usize,
    pub converged: bool,
    /// `max_i ‖φ(A x⁽ⁱ⁾) − x⁽ⁱ⁾‖∞` at the returned weights.
    pub max_residual: f64,
    /// `max_i ‖A x⁽ⁱ⁾ − φ⁻¹(x⁽ⁱ⁾)‖∞` at the returned weights.
    pub max_preimage_residual: f64,
}

fn residuals(a: &Matrix, ts: &TrainingSet, phi: Activation) -> (f64, f64) {
    let mut rec: f64 = 0.0;
    let mut pre: f64 = 0.0;
    for x in ts.examples() {
        let z = a.mul_vec(x).expect("square weights");
        for (r, &zr) in z.iter().enumerate() {
            rec = rec.max((phi.apply(zr) - x[r]).abs());
            if let Ok(t) = phi.min_norm_preimage(x[r]) {
                pre = pre.max((zr - t).abs());
            }
        }
    }
    (rec, pre)
}

/// Stepper for the adaptive-learning-rate gradient descent. Rows of `A` are
/// updated independently.
#[derive(Debug, Clone)]
pub struct AdaptiveGd<'a> {
    ts: &'a TrainingSet,
    phi: Activation,
    cfg: AdaptiveGdConfig,
    weights: Matrix,
    steps: usize,
}

impl<'a> AdaptiveGd<'a> {
    pub fn new(ts: &'a TrainingSet, phi: Activation, cfg: AdaptiveGdConfig) -> Result<Self> {
        if ts.len() >= ts.dim() {
            return Err(invalid(format!(
                "adaptive GD needs n < d (overparameterized), got n = {}, d = {}",
                ts.len(),
                ts.dim()
            )));
        }
        let report = check_assumption1(ts, phi);
        if !report.passed() {
            let all: Vec<String> = [&report.range, &report.side, &report.curvature]
                .iter()
                .flat_map(|c| c.failures.iter().cloned())
                .collect();
            return Err(invalid(format!("Assumption 1 violated: {}", all.join("; "))));
        }
        if cfg.slopes.len() != ts.dim() || cfg.slopes.iter().any(|r| r.len() != ts.len()) {
            return Err(shape("slope table must be d × n"));
        }
        if !(cfg.gamma > 0.0 && cfg.gamma < cfg.rate_limit(ts)) {
            return Err(invalid(format!(
                "γ = {} must lie in (0, 1/(nLd)) = (0, {})",
                cfg.gamma,
                cfg.rate_limit(ts)
            )));
        }
        let d = ts.dim();
        Ok(Self { ts, phi, cfg, weights: Matrix::zeros(d, d), steps: 0 })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self) {
        let d = self.ts.dim();
        for r in 0..d {
            let mut delta = vec![0.0; d];
            for (i, x) in self.ts.examples().iter().enumerate() {
                let z = dot(self.weights.row(r), x);
                let coef = self.cfg.example_rate(r, i) * (self.phi.apply(z) - x[r]);
                delta.iter_mut().zip(x).for_each(|(dj, xj)| *dj += coef * xj);
            }
            self.weights.row_mut(r).iter_mut().zip(&delta).for_each(|(a, dj)| *a += dj);
        }
        self.steps += 1;
    }

    pub fn residuals(&self) -> (f64, f64) {
        residuals(&self.weights, self.ts, self.phi)
    }

    pub fn run(mut self) -> Result<NonlinearRun> {
        let (mut rec, mut pre) = self.residuals();
        while rec >= self.cfg.residual_tol && self.steps < self.cfg.max_steps {
            self.step();
            (rec, pre) = self.residuals();
            if !rec.is_finite() {
                return Err(Error::Divergence { steps: self.steps, detail: "non-finite residual".into() });
            }
        }
        Ok(NonlinearRun {
            converged: rec < self.cfg.residual_tol,
            weights: self.weights,
            steps: self.steps,
            max_residual: rec,
            max_preimage_residual: pre,
        })
    }
}

/// Adaptive-rate gradient descent from `A = 0`; rejects data violating
/// Assumption 1 and underparameterized sets.
pub fn adaptive_gd(ts: &TrainingSet, phi: Activation, cfg: AdaptiveGdConfig) -> Result<NonlinearRun> {
    AdaptiveGd::new(ts, phi, cfg)?.run()
}

/// Linear regression iterate `B⁽ᵗ⁾` on the targets `φ⁻¹(x⁽ⁱ⁾)` with constant
/// rate `γ`; the coordinate-wise comparison sequence for [`AdaptiveGd`].
#[derive(Debug, Clone)]
pub struct PreimageRegression<'a> {
    ts: &'a TrainingSet,
    targets: Vec<Vec<f64>>,
    gamma: f64,
    weights: Matrix,
}

impl<'a> PreimageRegression<'a> {
    pub fn new(ts: &'a TrainingSet, phi: Activation, gamma: f64) -> Result<Self> {
        let targets = ts.examples().iter().map(|x| phi.preimage_vec(x)).collect::<Result<Vec<_>>>()?;
        let d = ts.dim();
        Ok(Self { ts, targets, gamma, weights: Matrix::zeros(d, d) })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn step(&mut self) {
        let d = self.ts.dim();
        for r in 0..d {
            let mut delta = vec![0.0; d];
            for (x, t) in self.ts.examples().iter().zip(&self.targets) {
                let coef = -self.gamma * (dot(self.weights.row(r), x) - t[r]);
                delta.iter_mut().zip(x).for_each(|(dj, xj)| *dj += coef * xj);
            }
            self.weights.row_mut(r).iter_mut().zip(&delta).for_each(|(a, dj)| *a += dj);
        }
    }
}

/// Plain gradient descent with constant rate on `½ Σ ‖x⁽ⁱ⁾ − φ(A x⁽ⁱ⁾)‖²`
/// from `A = 0`, stopping at [`DEFAULT_RESIDUAL_TOL`] or `max_steps`.
pub fn constant_lr_gd(ts: &TrainingSet, phi: Activation, gamma: f64, max_steps: usize) -> Result<NonlinearRun> {
    if ts.is_empty() {
        return Err(invalid("empty training set"));
    }
    if !(gamma > 0.0) {
        return Err(invalid("learning rate must be positive"));
    }
    let d = ts.dim();
    let mut a = Matrix::zeros(d, d);
    let (mut rec, mut pre) = residuals(&a, ts, phi);
    let mut steps = 0;
    while rec >= DEFAULT_RESIDUAL_TOL && steps < max_steps {
        for r in 0..d {
            let mut grad = vec![0.0; d];
            for x in ts.examples() {
                let z = dot(a.row(r), x);
                let coef = (phi.apply(z) - x[r]) * phi.derivative(z);
                grad.iter_mut().zip(x).for_each(|(g, xj)| *g += coef * xj);
            }
            a.row_mut(r).iter_mut().zip(&grad).for_each(|(w, g)| *w -= gamma * g);
        }
        steps += 1;
        (rec, pre) = residuals(&a, ts, phi);
        if !rec.is_finite() {
            return Err(Error::Divergence { steps, detail: "non-finite residual".into() });
        }
    }
    Ok(NonlinearRun { converged: rec < DEFAULT_RESIDUAL_TOL, weights: a, steps, max_residual: rec, max_preimage_residual: pre })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiEigenResult {
    pub is_eigenvector: bool,
    /// λ when `u` passes the test.
    pub eigenvalue: Option<f64>,
    /// Least-squares scalar `⟨φ(Au), u⟩ / ⟨u, u⟩`, reported either way.
    pub best_scalar: f64,
    /// `‖φ(Au) − λu‖ / ‖u‖`.
    pub residual: f64,
}

/// Tests whether `φ(A u)` is a scalar multiple of `u`.
pub fn phi_eigencheck(a: &Matrix, phi: Activation, u: &[f64], tol: f64) -> Result<PhiEigenResult> {
    let uu = dot(u, u);
    if uu == 0.0 {
        return Err(invalid("u must be nonzero"));
    }
    let img = phi.apply_vec(&a.mul_vec(u)?);
    let lambda = dot(&img, u) / uu;
    let residual = img.iter().zip(u).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt() / uu.sqrt();
    let is_eigenvector = residual < tol;
    Ok(PhiEigenResult { is_eigenvector, eigenvalue: is_eigenvector.then_some(lambda), best_scalar: lambda, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanMembership {
    pub member: bool,
    /// `‖φ⁻¹(y) − Π φ⁻¹(y)‖ / ‖φ⁻¹(y)‖`, with Π the orthogonal projector onto
    /// `span{φ⁻¹(x⁽ⁱ⁾)}`.
    pub distance: f64,
}

/// Tests whether `y` lies in the φ-span of the training set.
pub fn phi_span_membership(train: &TrainingSet, phi: Activation, y: &[f64], tol: f64) -> Result<SpanMembership> {
    if y.len() != train.dim() {
        return Err(shape("probe dimension differs from training dimension"));
    }
    let target = phi.preimage_vec(y)?;
    let spanning: Vec<Vec<f64>> = train.examples().iter().map(|x| phi.preimage_vec(x)).collect::<Result<_>>()?;
    let basis = orthonormal_basis(&spanning, 1e-10);
    let mut resid = target.clone();
    for b in &basis {
        let p = dot(&resid, b);
        resid.iter_mut().zip(b).for_each(|(r, bi)| *r -= p * bi);
    }
    let scale = norm(&target);
    let distance = if scale == 0.0 { 0.0 } else { norm(&resid) / scale };
    Ok(SpanMembership { member: distance < tol, distance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_set() -> TrainingSet {
        TrainingSet::new(vec![vec![0.1, 0.2, 0.3, 0.4, 0.15], vec![0.35, 0.05, 0.25, 0.1, 0.3]]).unwrap()
    }

    #[test]
    fn entries_close_to_half_pass() {
        // Pre-image interval [-0.23, 0]: short enough for rounding noise to exceed the fixed floor.
        let ts = TrainingSet::new(vec![vec![0.133, 0.265, 0.15, 0.442]]).unwrap();
        let r = check_assumption1(&ts, Activation::Sigmoid);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sigmoid_below_half_passes() {
        let r = check_assumption1(&small_set(), Activation::Sigmoid);
        assert!(r.passed(), "{r:?}");
        assert!(r.sides.iter().all(|s| *s == Some(Side::Below)));
        assert!(r.cases.iter().all(|c| *c == Some(CurvatureCase::ConvexIncreasing)));
    }

    #[test]
    fn entry_equal_to_one_fails_clause_a() {
        let ts = TrainingSet::new(vec![vec![0.2, 1.0, 0.3]]).unwrap();
        let r = check_assumption1(&ts, Activation::Sigmoid);
        assert!(!r.range.passed);
        assert!(!r.passed());
    }

    #[test]
    fn straddling_coordinate_fails_clause_b() {
        let ts = TrainingSet::new(vec![vec![0.2, 0.3], vec![0.7, 0.3]]).unwrap();
        let r = check_assumption1(&ts, Activation::Sigmoid);
        assert!(!r.side.passed);
        assert_eq!(r.sides[1], Some(Side::Below));
    }

    #[test]
    fn identity_is_not_strictly_convex() {
        let ts = TrainingSet::new(vec![vec![0.2, 0.3]]).unwrap();
        assert!(!check_assumption1(&ts, Activation::Identity).curvature.passed);
    }

    #[test]
    fn adaptive_first_step_matches_substitution() {
        let ts = small_set();
        let phi = Activation::Sigmoid;
        let cfg = AdaptiveGdConfig::from_data(&ts, phi, 0.9).unwrap();
        let mut gd = AdaptiveGd::new(&ts, phi, cfg.clone()).unwrap();
        gd.step();
        // a_rj⁽¹⁾ = Σᵢ γ_{ri} x_j⁽ⁱ⁾ (φ(0) − x_r⁽ⁱ⁾)
        for r in 0..5 {
            for j in 0..5 {
                let expect: f64 =
                    (0..2).map(|i| cfg.example_rate(r, i) * ts.example(i)[j] * (0.5 - ts.example(i)[r])).sum();
                assert!((gd.weights()[(r, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn adaptive_rejects_bad_configs() {
        let ts = small_set();
        let mut cfg = AdaptiveGdConfig::from_data(&ts, Activation::Sigmoid, 0.5).unwrap();
        cfg.gamma = 2.0 * cfg.rate_limit(&ts);
        assert!(AdaptiveGd::new(&ts, Activation::Sigmoid, cfg).is_err());
        let square = TrainingSet::new(vec![vec![0.1, 0.2], vec![0.3, 0.1]]).unwrap();
        let cfg = AdaptiveGdConfig::from_data(&square, Activation::Sigmoid, 0.5).unwrap();
        assert!(AdaptiveGd::new(&square, Activation::Sigmoid, cfg).is_err());
        let bad = TrainingSet::new(vec![vec![0.1, 0.7, 0.2], vec![0.1, 0.3, 0.2]]).unwrap();
        assert!(AdaptiveGdConfig::from_data(&bad, Activation::Sigmoid, 0.5)
            .and_then(|c| AdaptiveGd::new(&bad, Activation::Sigmoid, c).map(|_| ()))
            .is_err());
    }

    #[test]
    fn zero_matrix_eigencheck() {
        let r = phi_eigencheck(&Matrix::zeros(4, 4), Activation::Sigmoid, &[1.0; 4], 1e-12).unwrap();
        assert!(r.is_eigenvector);
        assert_eq!(r.eigenvalue, Some(0.5));
        assert_eq!(r.residual, 0.0);
        assert!(phi_eigencheck(&Matrix::zeros(2, 2), Activation::Sigmoid, &[0.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn span_membership_by_definition() {
        let ts = small_set();
        let phi = Activation::Sigmoid;
        let m = phi_span_membership(&ts, phi, ts.example(0), 1e-10).unwrap();
        assert!(m.member && m.distance < 1e-15);
        let p0 = phi.preimage_vec(ts.example(0)).unwrap();
        let p1 = phi.preimage_vec(ts.example(1)).unwrap();
        let mix: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| phi.apply(0.5 * a + 0.5 * b)).collect();
        assert!(phi_span_membership(&ts, phi, &mix, 1e-10).unwrap().member);
        assert!(phi_span_membership(&ts, phi, &[0.5, 0.5, 0.5, 0.5, 1.0], 1e-3).is_err());
    }
}
