//! A piecewise-linear autoencoder that reconstructs `[0, 1]` within `ε`
//! everywhere while making every training point an attractor.

use rand::Rng;

use crate::activation::Activation;
use crate::error::{invalid, shape, Result};
use crate::net_engine::{LayerSpec, Network};
use crate::rng::seeded;

pub const ATTRACTOR_STARTS: usize = 200;
pub const ATTRACTOR_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// `x < x₁ − δ`
    Left,
    /// `[xᵢ − δ, xᵢ + δ)`
    Training(usize),
    /// `[xᵢ + δ, xᵢ₊₁ − δ)`
    Gap(usize),
    /// `x ≥ xₙ + δ`
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Left end; the first segment extends to −∞.
    pub start: f64,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear1D {
    pub points: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    /// Slope on every training segment, `(2δ − 2ε) / (2δ)`.
    pub a: f64,
    pub segments: Vec<Segment>,
}

/// `δ = ¼ · min(x₁, min gap, 1 − xₙ)`; including the distances to 0 and 1
/// keeps both boundary ramps well defined (and gives single points a scale).
pub fn interpolant_delta(sorted: &[f64]) -> f64 {
    let mut m = sorted[0].min(1.0 - sorted[sorted.len() - 1]);
    for w in sorted.windows(2) {
        m = m.min(w[1] - w[0]);
    }
    0.25 * m
}

pub fn construct_interpolant(train_points: &[f64], epsilon: f64) -> Result<PiecewiseLinear1D> {
    if train_points.is_empty() {
        return Err(invalid("need at least one training point"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon must be positive"));
    }
    let mut x = train_points.to_vec();
    if x.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(invalid("training points must lie strictly inside (0, 1)"));
    }
    x.sort_by(f64::total_cmp);
    if x.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("training points must be distinct"));
    }
    let delta = interpolant_delta(&x);
    let eps = epsilon.min(delta);
    let a = (2.0 * delta - 2.0 * eps) / (2.0 * delta);
    let n = x.len();
    let mut segments = Vec::with_capacity(2 * n + 1);
    let left = (x[0] - delta + eps) / (x[0] - delta);
    segments.push(Segment { kind: SegmentKind::Left, start: f64::NEG_INFINITY, slope: left, intercept: 0.0 });
    for i in 0..n {
        segments.push(Segment {
            kind: SegmentKind::Training(i),
            start: x[i] - delta,
            slope: a,
            intercept: (1.0 - a) * (x[i] - delta) + eps,
        });
        if i + 1 < n {
            let g = x[i + 1] - x[i] - 2.0 * delta;
            let b = (g + 2.0 * eps) / g;
            segments.push(Segment {
                kind: SegmentKind::Gap(i),
                start: x[i] + delta,
                slope: b,
                intercept: (1.0 - b) * (x[i] + delta) - eps,
            });
        }
    }
    let edge = x[n - 1] + delta;
    let right = (1.0 - (edge - eps)) / (1.0 - edge);
    segments.push(Segment { kind: SegmentKind::Right, start: edge, slope: right, intercept: 1.0 - right });
    Ok(PiecewiseLinear1D { points: x, delta, epsilon: eps, a, segments })
}

impl PiecewiseLinear1D {
    fn segment_at(&self, x: f64) -> &Segment {
        let k = self.segments.partition_point(|s| s.start <= x);
        &self.segments[k.saturating_sub(1)]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = self.segment_at(x);
        s.slope * x + s.intercept
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        self.segment_at(x).slope
    }

    /// Interior changepoints, in increasing order.
    pub fn changepoints(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.start).collect()
    }

    /// Largest mismatch between the two one-sided limits at each changepoint.
    pub fn continuity_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let c = w[1].start;
                ((w[0].slope * c + w[0].intercept) - (w[1].slope * c + w[1].intercept)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `∫₀¹ (f(x) − x)² dx` by composite Simpson with `panels` (rounded up
    /// to even) subintervals.
    pub fn expected_squared_error(&self, panels: usize) -> f64 {
        self.simpson(panels, |e| e * e)
    }

    /// `∫₀¹ |f(x) − x| dx`.
    pub fn expected_abs_error(&self, panels: usize) -> f64 {
        self.simpson(panels, f64::abs)
    }

    fn simpson(&self, panels: usize, g: impl Fn(f64) -> f64) -> f64 {
        let m = panels.max(2).div_ceil(2) * 2;
        let h = 1.0 / m as f64;
        let val = |k: usize| {
            let x = k as f64 * h;
            g(self.eval(x) - x)
        };
        let mut acc = val(0) + val(m);
        for k in 1..m {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * val(k);
        }
        acc * h / 3.0
    }

    /// `max |f(x) − x|` over a uniform grid of `[lo, hi]`.
    pub fn max_deviation(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / samples as f64;
                (self.eval(x) - x).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `(x, f(x))` on a uniform grid of `[0, 1]`.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut out = String::from("x,f_x\n");
        for k in 0..=samples {
            let x = k as f64 / samples.max(1) as f64;
            out.push_str(&format!("{x:e},{:e}\n", self.eval(x)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub x: f64,
    pub slope: f64,
    /// `f(x) − x` at the training point.
    pub offset: f64,
    pub attractor: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorCheck {
    pub points: Vec<PointReport>,
    pub left_slope: f64,
    pub right_slope: f64,
    pub gap_slopes: Vec<f64>,
    pub starts: usize,
    /// Starts whose final iterate lies within δ of a training point.
    pub converged: usize,
    /// Largest distance from a final iterate to its nearest training point.
    pub worst_final_distance: f64,
}

/// Slope test at each training point plus iteration from uniform starts.
pub fn interpolant_attractor_check(f: &PiecewiseLinear1D, seed: u64) -> AttractorCheck {
    let points = f
        .points
        .iter()
        .map(|&x| {
            let slope = f.slope_at(x);
            PointReport { x, slope, offset: f.eval(x) - x, attractor: slope.abs() < 1.0 }
        })
        .collect();
    let gap_slopes =
        f.segments.iter().filter(|s| matches!(s.kind, SegmentKind::Gap(_))).map(|s| s.slope).collect();
    let mut rng = seeded(seed);
    let mut converged = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..ATTRACTOR_STARTS {
        let mut x: f64 = rng.random();
        for _ in 0..ATTRACTOR_STEPS {
            x = f.eval(x);
        }
        let d = f.points.iter().map(|p| (p - x).abs()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        if d < f.delta {
            converged += 1;
        }
    }
    AttractorCheck {
        points,
        left_slope: f.segments[0].slope,
        right_slope: f.segments.last().unwrap().slope,
        gap_slopes,
        starts: ATTRACTOR_STARTS,
        converged,
        worst_final_distance: worst,
    }
}

/// One-hidden-layer ReLU network computing `f` coordinatewise on `[0, ∞)ᵈ`:
/// per coordinate, `s₀ relu(x) + Σₖ (sₖ₊₁ − sₖ) relu(x − cₖ)` over the `2n`
/// changepoints, i.e. `2n + 1` hidden units.
pub fn to_relu_network(fs: &[PiecewiseLinear1D]) -> Result<Network> {
    if fs.is_empty() {
        return Err(shape("need one interpolant per coordinate"));
    }
    let d = fs.len();
    let units: Vec<usize> = fs.iter().map(|f| f.segments.len()).collect();
    let h: usize = units.iter().sum();
    let mut w1 = vec![0.0; h * d];
    let mut b1 = vec![0.0; h];
    let mut w2 = vec![0.0; d * h];
    let mut u = 0;
    for (j, f) in fs.iter().enumerate() {
        for (k, seg) in f.segments.iter().enumerate() {
            w1[u * d + j] = 1.0;
            let (bias, coef) = if k == 0 { (0.0, seg.slope) } else { (-seg.start, seg.slope - f.segments[k - 1].slope) };
            b1[u] = bias;
            w2[j * h + u] = coef;
            u += 1;
        }
    }
    let mut params = w1;
    params.extend(b1);
    params.extend(w2);
    Network::from_params(
        vec![LayerSpec::fc(d, h, Activation::Relu).with_bias(), LayerSpec::fc(h, d, Activation::Identity)],
        None,
        params,
    )
}

/// Builds one interpolant per coordinate of `d`-dimensional training points.
pub fn coordinatewise(train: &[Vec<f64>], epsilon: f64) -> Result<Vec<PiecewiseLinear1D>> {
    let d = train.first().map(Vec::len).ok_or_else(|| invalid("empty training set"))?;
    if train.iter().any(|x| x.len() != d) {
        return Err(shape("ragged training points"));
    }
    (0..d).map(|j| construct_interpolant(&train.iter().map(|x| x[j]).collect::<Vec<_>>(), epsilon)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_flat() {
        let f = construct_interpolant(&[0.5], 1.0).unwrap();
        assert_eq!(f.delta, 0.125);
        assert_eq!(f.epsilon, 0.125);
        assert_eq!(f.a, 0.0);
        assert_eq!(f.slope_at(0.45), 0.0);
        assert_eq!(f.eval(0.4), 0.5);
    }

    #[test]
    fn two_points_half_slope() {
        let delta = interpolant_delta(&[0.25, 0.75]);
        let f = construct_interpolant(&[0.75, 0.25], delta / 2.0).unwrap();
        assert_eq!(f.points, vec![0.25, 0.75]);
        assert_eq!(f.a, 0.5);
        assert_eq!(f.slope_at(0.25), 0.5);
        assert_eq!(f.slope_at(0.75), 0.5);
        assert!(f.continuity_gap() < 1e-15);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(construct_interpolant(&[0.2, 0.2], 0.01).is_err());
        assert!(construct_interpolant(&[0.0, 0.5], 0.01).is_err());
        assert!(construct_interpolant(&[0.5, 1.2], 0.01).is_err());
        assert!(construct_interpolant(&[], 0.01).is_err());
    }

    #[test]
    fn full_epsilon_converges_in_one_step() {
        let f = construct_interpolant(&[0.3, 0.6], 1.0).unwrap();
        assert_eq!(f.eval(0.3 + 0.5 * f.delta), 0.3);
        let check = interpolant_attractor_check(&f, 1);
        assert!(check.points.iter().all(|p| p.attractor && p.slope == 0.0));
        assert!(check.left_slope > 1.0 && check.right_slope > 1.0);
        assert!(check.gap_slopes.iter().all(|&b| b > 1.0));
    }

    #[test]
    fn abs_kink_network() {
        // |x − ½| on [0, 1] as relu units: slope −1 then +1.
        let net = Network::from_params(
            vec![LayerSpec::fc(1, 2, Activation::Relu).with_bias(), LayerSpec::fc(2, 1, Activation::Identity)],
            None,
            vec![1.0, 1.0, 0.0, -0.5, -1.0, 2.0],
        )
        .unwrap();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!((net.forward(&[x]).unwrap()[0] - ((x - 0.5).abs() - 0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_has_grid() {
        let f = construct_interpolant(&[0.5], 0.1).unwrap();
        let csv = f.to_csv(4);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("x,f_x\n0e0,0e0\n"));
    }
}
