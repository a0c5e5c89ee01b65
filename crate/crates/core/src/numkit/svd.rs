use super::matrix::{dot, norm, Matrix};
use crate::error::Result;

/// Thin SVD `m = u diag(singular_values) vᵀ` with `k = min(rows, cols)`
/// columns in `u` and `v`.
#[derive(Debug, Clone)]
pub struct SingularValueDecomposition {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SingularValueDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        Matrix::from_fn(m, n, |r, c| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| self.u[(r, k)] * s * self.v[(c, k)])
                .sum()
        })
    }
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes column pairs directly instead of diagonalizing `mᵀm`, so
/// tiny singular values keep full relative accuracy.
pub fn svd(m: &Matrix) -> Result<SingularValueDecomposition> {
    m.ensure_finite()?;
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(SingularValueDecomposition { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    let (rows, n) = m.shape();
    // Work column-major: cols[j] is column j of the evolving matrix.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate_pair(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = vcols.split_at_mut(q);
                rotate_pair(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0));
    let smax = sv.first().map_or(0.0, |s| s.0);

    let mut u = Matrix::zeros(rows, n);
    let mut v = Matrix::zeros(n, n);
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    for (k, &(s, j)) in sv.iter().enumerate() {
        let ucol = if s > smax * 1e-300 && s > 0.0 {
            cols[j].iter().map(|x| x / s).collect()
        } else {
            orthonormal_completion(&ucols, rows)
        };
        u.set_column(k, &ucol);
        v.set_column(k, &vcols[j]);
        ucols.push(ucol);
        singular_values.push(s);
    }
    Ok(SingularValueDecomposition { u, singular_values, v })
}

fn rotate_pair(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

/// Unit vector orthogonal to `basis`, built from the standard basis by
/// Gram-Schmidt.
fn orthonormal_completion(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best = vec![0.0; dim];
    let mut best_norm = -1.0;
    for e in 0..dim {
        let mut w: Vec<f64> = (0..dim).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        for _ in 0..2 {
            for b in basis {
                let proj = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= proj * bi);
            }
        }
        let nw = norm(&w);
        if nw > best_norm {
            best_norm = nw;
            best = w;
        }
        if nw > 0.5 {
            break;
        }
    }
    best.iter().map(|x| x / best_norm).collect()
}

/// Count of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    let s = svd(m)?.singular_values;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * smax).count())
}

/// Largest singular value (operator 2-norm).
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    Ok(svd(m)?.singular_values.first().copied().unwrap_or(0.0))
}
