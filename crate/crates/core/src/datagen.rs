//! Synthetic datasets standing in for image corpora at desk scale.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::linear_fc::TrainingSet;
use crate::rng::{gaussian, seeded};

/// Bounds of the roll parameter `t` and the height `y`.
pub const SWISS_ROLL_T: (f64, f64) = (1.5 * PI, 4.5 * PI);
pub const SWISS_ROLL_HEIGHT: f64 = 21.0;
/// Target interval for data fed to sigmoid single-layer experiments.
pub const SIGMOID_MARGIN_RANGE: (f64, f64) = (0.05, 0.45);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    UpperLeft,
    UpperRight,
    LowerLeft,
    LowerRight,
}

impl std::str::FromStr for Corner {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper_left" | "upper-left" => Ok(Corner::UpperLeft),
            "upper_right" | "upper-right" => Ok(Corner::UpperRight),
            "lower_left" | "lower-left" => Ok(Corner::LowerLeft),
            "lower_right" | "lower-right" => Ok(Corner::LowerRight),
            _ => Err(invalid(format!("unknown corner '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetKind {
    SwissRoll3d { n: usize, noise: f64 },
    /// One `s×s` image, white `side×side` square in `corner`, black elsewhere.
    WhiteSquareImage { s: usize, side: usize, corner: Corner },
    /// `n` images of side `s` with i.i.d. standard normal pixels, squashed
    /// into `[0, 1]` by min-max scaling over the whole set.
    GaussianImages { s: usize, n: usize },
    /// Uniform image pixels in `[0, 1]`.
    UniformImages { s: usize, n: usize },
    UnitIntervalPoints { n: usize },
    /// Regular grid over a box: per axis `(lo, hi)` and a point count.
    GridProbes { ranges: Vec<(f64, f64)>, counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// Swiss-roll parametrization before scaling.
pub fn swiss_roll_point(t: f64, y: f64) -> [f64; 3] {
    [t * t.cos(), y, t * t.sin()]
}

/// Affine map from the raw roll's bounding box onto `[0, 1]³`; returns per-axis
/// `(offset, scale)` with `scaled = (raw - offset) / scale`.
pub fn swiss_roll_box() -> [(f64, f64); 3] {
    // x = t cos t and z = t sin t over [1.5π, 4.5π]: extremes found by dense
    // sampling of the closed curve are stable to machine precision at this
    // resolution, and the box only needs to be fixed, not tight.
    let (t0, t1) = SWISS_ROLL_T;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let samples = 100_000;
    for k in 0..=samples {
        let t = t0 + (t1 - t0) * k as f64 / samples as f64;
        let p = swiss_roll_point(t, 0.0);
        for (a, v) in [p[0], p[2]].into_iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    [(lo[0], hi[0] - lo[0]), (0.0, SWISS_ROLL_HEIGHT), (lo[1], hi[1] - lo[1])]
}

pub fn generate(spec: &DatasetSpec) -> Result<TrainingSet> {
    let mut rng = seeded(spec.seed);
    let examples = match &spec.kind {
        DatasetKind::SwissRoll3d { n, noise } => {
            positive(*n, "n")?;
            if !(*noise >= 0.0 && noise.is_finite()) {
                return Err(invalid("noise must be a non-negative finite number"));
            }
            let bx = swiss_roll_box();
            (0..*n)
                .map(|_| {
                    let t = rng.random_range(SWISS_ROLL_T.0..SWISS_ROLL_T.1);
                    let y = rng.random_range(0.0..SWISS_ROLL_HEIGHT);
                    let p = swiss_roll_point(t, y);
                    (0..3).map(|a| (p[a] - bx[a].0) / bx[a].1 + noise * gaussian(&mut rng)).collect()
                })
                .collect()
        }
        DatasetKind::WhiteSquareImage { s, side, corner } => {
            positive(*s, "s")?;
            if *side == 0 || side > s {
                return Err(invalid(format!("square side must be in 1..={s}, got {side}")));
            }
            vec![white_square(*s, *side, *corner)]
        }
        DatasetKind::GaussianImages { s, n } => {
            positive(*s, "s")?;
            positive(*n, "n")?;
            let raw: Vec<Vec<f64>> = (0..*n).map(|_| (0..s * s).map(|_| gaussian(&mut rng)).collect()).collect();
            let lo = raw.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            let hi = raw.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            raw.into_iter().map(|x| x.into_iter().map(|v| (v - lo) / span).collect()).collect()
        }
        DatasetKind::UniformImages { s, n } => {
            positive(*s, "s")?;
            positive(*n, "n")?;
            (0..*n).map(|_| (0..s * s).map(|_| rng.random::<f64>()).collect()).collect()
        }
        DatasetKind::UnitIntervalPoints { n } => {
            positive(*n, "n")?;
            let mut pts: Vec<f64> = Vec::with_capacity(*n);
            while pts.len() < *n {
                let v: f64 = rng.random();
                if v > 0.0 && !pts.contains(&v) {
                    pts.push(v);
                }
            }
            pts.into_iter().map(|v| vec![v]).collect()
        }
        DatasetKind::GridProbes { ranges, counts } => grid(ranges, counts)?,
    };
    TrainingSet::new(examples)
}

fn positive(v: usize, name: &str) -> Result<()> {
    if v == 0 {
        return Err(invalid(format!("{name} must be positive")));
    }
    Ok(())
}

pub fn white_square(s: usize, side: usize, corner: Corner) -> Vec<f64> {
    let (r0, c0) = match corner {
        Corner::UpperLeft => (0, 0),
        Corner::UpperRight => (0, s - side),
        Corner::LowerLeft => (s - side, 0),
        Corner::LowerRight => (s - side, s - side),
    };
    let mut img = vec![0.0; s * s];
    for r in r0..r0 + side {
        for c in c0..c0 + side {
            img[r * s + c] = 1.0;
        }
    }
    img
}

/// The two orthogonal `2×2` images with a white pixel in opposite corners.
pub fn opposite_corner_pair() -> TrainingSet {
    TrainingSet::new(vec![white_square(2, 1, Corner::UpperLeft), white_square(2, 1, Corner::LowerRight)])
        .expect("fixed preset")
}

fn grid(ranges: &[(f64, f64)], counts: &[usize]) -> Result<Vec<Vec<f64>>> {
    if ranges.is_empty() || ranges.len() != counts.len() {
        return Err(invalid("grid needs one count per range"));
    }
    for (&(lo, hi), &c) in ranges.iter().zip(counts) {
        if c == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(invalid(format!("bad grid axis [{lo}, {hi}] with {c} points")));
        }
    }
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    for mut k in 0..total {
        let mut p = vec![0.0; ranges.len()];
        for a in (0..ranges.len()).rev() {
            let i = k % counts[a];
            k /= counts[a];
            let (lo, hi) = ranges[a];
            p[a] = if counts[a] == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (counts[a] - 1) as f64 };
        }
        out.push(p);
    }
    Ok(out)
}

/// Affinely maps every entry from `[0, 1]` into `(lo, hi)`.
pub fn rescale(ts: &TrainingSet, lo: f64, hi: f64) -> Result<TrainingSet> {
    if !(lo < hi) {
        return Err(invalid("rescale needs lo < hi"));
    }
    TrainingSet::new(ts.examples().iter().map(|x| x.iter().map(|v| lo + (hi - lo) * v).collect()).collect())
}

/// `n` points of dimension `d` uniform in the open sigmoid-compatible range.
pub fn sigmoid_compatible(n: usize, d: usize, seed: u64) -> Result<TrainingSet> {
    positive(n, "n")?;
    positive(d, "d")?;
    let mut rng = seeded(seed);
    let (lo, hi) = SIGMOID_MARGIN_RANGE;
    TrainingSet::new((0..n).map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect()).collect())
}
