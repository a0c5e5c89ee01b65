//! Discrete dynamical systems `x_{t+1} = f(x_t)` driven by an autoencoder.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, shape, Result};
use crate::linear_fc::TrainingSet;
use crate::net_engine::Network;
use crate::numkit::{distance, eigenvalue_magnitudes, spectral_radius_or_full, Matrix};
use crate::rng::{gaussian_vec, seeded};

pub const DEFAULT_MARGIN: f64 = 0.05;
/// Fraction of the median pairwise training distance used as the recovery
/// radius.
pub const DEFAULT_EPS_FRACTION: f64 = 0.05;
/// Residual `‖f(x) − x‖ / max(1, ‖x‖)` below which a point counts as fixed.
pub const FIXED_POINT_TOL: f64 = 1e-3;
/// Above this dimension the spectral radius is found by power iteration.
const FULL_EIGEN_MAX_DIM: usize = 256;

/// A map `ℝᵈ → ℝᵈ` with a Jacobian.
pub trait Map: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> Result<Matrix>;
}

impl Map for Network {
    fn dim(&self) -> usize {
        self.input_len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward(x)
    }

    fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        Network::jacobian(self, x)
    }
}

/// `x ↦ A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap(pub Matrix);

impl Map for LinearMap {
    fn dim(&self) -> usize {
        self.0.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.mul_vec(x)
    }

    fn jacobian(&self, _x: &[f64]) -> Result<Matrix> {
        Ok(self.0.clone())
    }
}

/// A map given by closures for the value and the Jacobian.
pub struct FnMap<F, J> {
    pub dim: usize,
    pub f: F,
    pub jac: J,
}

impl<F, J> Map for FnMap<F, J>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    J: Fn(&[f64]) -> Matrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(shape(format!("map expects {} values, got {}", self.dim, x.len())));
        }
        Ok((self.f)(x))
    }

    fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        Ok((self.jac)(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x₀, f(x₀), …`; shorter than requested when an iterate became
    /// non-finite.
    pub points: Vec<Vec<f64>>,
    /// `distances[t][i] = ‖points[t] − x⁽ⁱ⁾‖`.
    pub distances: Vec<Vec<f64>>,
    /// Training example within the recovery radius of the final point.
    pub converged_to: Option<usize>,
    pub truncated: bool,
}

impl Trajectory {
    /// `(index, distance)` of the training example nearest to `points[t]`.
    pub fn nearest(&self, t: usize) -> (usize, f64) {
        nearest(&self.distances[t])
    }

    pub fn final_point(&self) -> &[f64] {
        self.points.last().expect("trajectory has its start point")
    }
}

fn nearest(d: &[f64]) -> (usize, f64) {
    d.iter().copied().enumerate().fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}

pub fn iterate(map: &impl Map, x0: &[f64], steps: usize, train: &TrainingSet, eps: f64) -> Result<Trajectory> {
    if x0.len() != map.dim() || train.dim() != map.dim() {
        return Err(shape("start point, map and training set dimensions differ"));
    }
    let dists = |p: &[f64]| train.examples().iter().map(|x| distance(p, x)).collect::<Vec<_>>();
    let mut points = vec![x0.to_vec()];
    let mut distances = vec![dists(x0)];
    let mut truncated = false;
    for _ in 0..steps {
        let next = map.apply(points.last().unwrap())?;
        if next.iter().any(|v| !v.is_finite()) {
            truncated = true;
            break;
        }
        distances.push(dists(&next));
        points.push(next);
    }
    let (idx, d) = nearest(distances.last().unwrap());
    Ok(Trajectory { points, distances, converged_to: (d < eps).then_some(idx), truncated })
}

/// Iterates every start in parallel.
pub fn iterate_many(
    map: &impl Map,
    starts: &[Vec<f64>],
    steps: usize,
    train: &TrainingSet,
    eps: f64,
) -> Result<Vec<Trajectory>> {
    starts.par_iter().map(|x0| iterate(map, x0, steps, train, eps)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Attractor,
    Repeller,
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Attractor => "attractor",
            Classification::Repeller => "repeller",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub point: Vec<f64>,
    pub residual: f64,
    pub top_jacobian_eigenvalue_magnitude: f64,
    pub classification: Classification,
    /// Whether the residual is small enough for the point to count as fixed.
    pub fixed_point: bool,
}

pub fn classify_spectral_radius(rho: f64, margin: f64) -> Classification {
    if rho < 1.0 - margin {
        Classification::Attractor
    } else if rho > 1.0 + margin {
        Classification::Repeller
    } else {
        Classification::Inconclusive
    }
}

fn spectral_radius_of(j: &Matrix) -> Result<f64> {
    if j.rows() <= FULL_EIGEN_MAX_DIM {
        Ok(eigenvalue_magnitudes(j)?.into_iter().fold(0.0, f64::max))
    } else {
        spectral_radius_or_full(j, 2000, 1e-10, 0)
    }
}

pub fn classify_fixed_point(map: &impl Map, x: &[f64], margin: f64) -> Result<FixedPointReport> {
    if !(0.0..1.0).contains(&margin) {
        return Err(invalid("margin must lie in [0, 1)"));
    }
    let fx = map.apply(x)?;
    let residual = distance(&fx, x);
    let rho = spectral_radius_of(&map.jacobian(x)?)?;
    let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    Ok(FixedPointReport {
        point: x.to_vec(),
        residual,
        top_jacobian_eigenvalue_magnitude: rho,
        classification: classify_spectral_radius(rho, margin),
        fixed_point: residual / scale < FIXED_POINT_TOL,
    })
}

pub fn attractor_census(map: &impl Map, train: &TrainingSet, margin: f64) -> Result<Vec<FixedPointReport>> {
    train.examples().par_iter().map(|x| classify_fixed_point(map, x, margin)).collect()
}

pub fn median_pairwise_distance(train: &TrainingSet) -> f64 {
    let mut d = Vec::new();
    for i in 0..train.len() {
        for j in (i + 1)..train.len() {
            d.push(distance(train.example(i), train.example(j)));
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    }
}

/// `DEFAULT_EPS_FRACTION × median pairwise distance`; errors for a single
/// example, which has no pairwise scale.
pub fn default_recovery_eps(train: &TrainingSet) -> Result<f64> {
    let m = median_pairwise_distance(train);
    if m == 0.0 {
        return Err(invalid("recovery radius needs at least two distinct training examples; pass eps explicitly"));
    }
    Ok(DEFAULT_EPS_FRACTION * m)
}

fn check_recovery_args(map: &impl Map, train: &TrainingSet, test_set: &[Vec<f64>], eps: f64) -> Result<()> {
    if test_set.is_empty() {
        return Err(invalid("recovery probability needs a non-empty test set"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    if train.dim() != map.dim() || test_set.iter().any(|x| x.len() != map.dim()) {
        return Err(shape("test points, training set and map must share a dimension"));
    }
    Ok(())
}

/// Fraction of training examples `x₀` with `min_x̃ ‖fᵗ(x̃) − x₀‖ < eps`.
pub fn recovery_probability(map: &impl Map, train: &TrainingSet, test_set: &[Vec<f64>], eps: f64, t: usize) -> Result<f64> {
    check_recovery_args(map, train, test_set, eps)?;
    let finals: Vec<Vec<f64>> = test_set.par_iter().map(|x| apply_n(map, x, t)).collect::<Result<_>>()?;
    Ok(recovered_fraction(train, &finals, eps))
}

fn apply_n(map: &impl Map, x: &[f64], t: usize) -> Result<Vec<f64>> {
    let mut p = x.to_vec();
    for _ in 0..t {
        p = map.apply(&p)?;
    }
    Ok(p)
}

fn recovered_fraction(train: &TrainingSet, points: &[Vec<f64>], eps: f64) -> f64 {
    let hit = train
        .examples()
        .iter()
        .filter(|x0| points.iter().any(|p| p.iter().all(|v| v.is_finite()) && distance(p, x0) < eps))
        .count();
    hit as f64 / train.len() as f64
}

/// `R_t` for `t = 1..=t_max`, computed along shared trajectories.
pub fn recovery_curve(map: &impl Map, train: &TrainingSet, test_set: &[Vec<f64>], eps: f64, t_max: usize) -> Result<Vec<f64>> {
    check_recovery_args(map, train, test_set, eps)?;
    let mut points = test_set.to_vec();
    let mut curve = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        points = points.par_iter().map(|p| map.apply(p)).collect::<Result<_>>()?;
        curve.push(recovered_fraction(train, &points, eps));
    }
    Ok(curve)
}

/// I.i.d. `N(center, scale² I)` start points.
pub fn gaussian_starts(count: usize, center: &[f64], scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| gaussian_vec(&mut rng, center.len()).iter().zip(center).map(|(g, c)| c + scale * g).collect())
        .collect()
}

fn random_offset(rng: &mut crate::rng::Rng64, d: usize, radius: f64) -> Vec<f64> {
    let dir = gaussian_vec(rng, d);
    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = radius * rng.random::<f64>();
    dir.iter().map(|v| r * v / n).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperattractorReport {
    pub example: usize,
    pub starts: usize,
    /// Starts landing within eps of the example after one application.
    pub captured_in_one_step: usize,
    pub flagged: bool,
}

pub const SUPERATTRACTOR_STARTS: usize = 50;

/// One-step capture test: starts uniform in radius up to
/// `0.5 × median pairwise distance` around the example.
pub fn superattractor_diagnostic(map: &impl Map, train: &TrainingSet, example: usize, eps: f64, seed: u64) -> Result<SuperattractorReport> {
    let x = train.examples().get(example).ok_or_else(|| invalid(format!("no training example {example}")))?;
    let radius = 0.5 * median_pairwise_distance(train);
    let mut rng = seeded(seed);
    let mut captured = 0;
    for _ in 0..SUPERATTRACTOR_STARTS {
        let start: Vec<f64> = random_offset(&mut rng, x.len(), radius).iter().zip(x).map(|(o, v)| o + v).collect();
        if distance(&map.apply(&start)?, x) < eps {
            captured += 1;
        }
    }
    Ok(SuperattractorReport {
        example,
        starts: SUPERATTRACTOR_STARTS,
        captured_in_one_step: captured,
        flagged: captured == SUPERATTRACTOR_STARTS,
    })
}

/// Fraction of `count` perturbations of size `size` (uniform on the sphere)
/// that return within `tol` of `x` after `steps` iterations.
pub fn perturbation_return(map: &impl Map, x: &[f64], count: usize, size: f64, steps: usize, tol: f64, seed: u64) -> Result<f64> {
    if count == 0 {
        return Err(invalid("count must be positive"));
    }
    let mut rng = seeded(seed);
    let starts: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            let dir = gaussian_vec(&mut rng, x.len());
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            dir.iter().zip(x).map(|(d, v)| v + size * d / n).collect()
        })
        .collect();
    let ends: Vec<Vec<f64>> = starts.par_iter().map(|s| apply_n(map, s, steps)).collect::<Result<_>>()?;
    Ok(ends.iter().filter(|e| distance(e, x) < tol).count() as f64 / count as f64)
}

/// CSV with columns `start_id,step,nearest_train_id,nearest_train_distance`.
pub fn trajectories_csv(trajectories: &[Trajectory]) -> String {
    let mut out = String::from("start_id,step,nearest_train_id,nearest_train_distance\n");
    for (s, tr) in trajectories.iter().enumerate() {
        for t in 0..tr.points.len() {
            let (i, d) = tr.nearest(t);
            out.push_str(&format!("{s},{t},{i},{d:e}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halving() -> FnMap<impl Fn(&[f64]) -> Vec<f64>, impl Fn(&[f64]) -> Matrix> {
        FnMap { dim: 1, f: |x: &[f64]| vec![x[0] / 2.0], jac: |_: &[f64]| Matrix::diag(&[0.5]) }
    }

    #[test]
    fn identity_trajectory_is_constant() {
        let id = LinearMap(Matrix::identity(2));
        let ts = TrainingSet::new(vec![vec![0.0, 0.0]]).unwrap();
        let tr = iterate(&id, &[0.3, 0.4], 5, &ts, 0.1).unwrap();
        assert!(tr.points.iter().all(|p| p == &vec![0.3, 0.4]));
        assert_eq!(tr.converged_to, None);
        assert!((tr.distances[5][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn halving_map_values() {
        let ts = TrainingSet::new(vec![vec![0.0]]).unwrap();
        let tr = iterate(&halving(), &[1.0], 3, &ts, 0.2).unwrap();
        let xs: Vec<f64> = tr.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(tr.converged_to, Some(0));
    }

    #[test]
    fn blow_up_truncates() {
        let m = LinearMap(Matrix::diag(&[1e200]));
        let ts = TrainingSet::new(vec![vec![0.0]]).unwrap();
        let tr = iterate(&m, &[1e200], 5, &ts, 0.1).unwrap();
        assert!(tr.truncated && tr.points.len() == 1);
    }

    #[test]
    fn scaled_identity_classification() {
        let r = classify_fixed_point(&LinearMap(Matrix::identity(3).scale(0.5)), &[0.0; 3], DEFAULT_MARGIN).unwrap();
        assert_eq!(r.classification, Classification::Attractor);
        assert!((r.top_jacobian_eigenvalue_magnitude - 0.5).abs() < 1e-12);
        let r = classify_fixed_point(&LinearMap(Matrix::identity(3).scale(2.0)), &[0.0; 3], DEFAULT_MARGIN).unwrap();
        assert_eq!(r.classification, Classification::Repeller);
    }

    #[test]
    fn projector_census_is_inconclusive() {
        let ts = TrainingSet::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let p = crate::linear_fc::min_norm_projection(&ts, 1e-10).unwrap();
        for r in attractor_census(&LinearMap(p), &ts, DEFAULT_MARGIN).unwrap() {
            assert!(r.residual < 1e-14 && r.fixed_point);
            assert_eq!(r.classification, Classification::Inconclusive);
        }
    }

    #[test]
    fn recovery_trivial_cases() {
        let ts = TrainingSet::new(vec![vec![0.7, 0.2]]).unwrap();
        let constant = FnMap { dim: 2, f: |_: &[f64]| vec![0.7, 0.2], jac: |_: &[f64]| Matrix::zeros(2, 2) };
        let test = gaussian_starts(10, &[0.0, 0.0], 1.0, 1);
        for t in 1..4 {
            assert_eq!(recovery_probability(&constant, &ts, &test, 1e-9, t).unwrap(), 1.0);
        }
        let far = vec![vec![5.0, 5.0]];
        assert_eq!(recovery_probability(&LinearMap(Matrix::identity(2)), &ts, &far, 0.1, 7).unwrap(), 0.0);
        assert!(recovery_probability(&constant, &ts, &[], 0.1, 1).is_err());
        assert_eq!(recovery_curve(&constant, &ts, &test, 1e-9, 3).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn median_and_default_eps() {
        let ts = TrainingSet::new(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(median_pairwise_distance(&ts), 2.0);
        assert!((default_recovery_eps(&ts).unwrap() - 0.1).abs() < 1e-15);
        assert!(default_recovery_eps(&TrainingSet::new(vec![vec![1.0]]).unwrap()).is_err());
    }

    #[test]
    fn csv_rows() {
        let ts = TrainingSet::new(vec![vec![0.0]]).unwrap();
        let tr = iterate(&halving(), &[1.0], 2, &ts, 0.1).unwrap();
        let csv = trajectories_csv(&[tr]);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().nth(2).unwrap(), "0,1,0,5e-1");
    }
}
