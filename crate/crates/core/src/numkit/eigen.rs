use num_complex::Complex64;
use rand::Rng;

use super::matrix::{norm, Matrix};
use crate::error::{invalid, shape, Error, Result};
use crate::rng::seeded;

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    /// `Q diag(values) Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let q = &self.vectors;
        let n = q.rows();
        Matrix::from_fn(n, n, |r, c| {
            (0..self.values.len()).map(|k| q[(r, k)] * self.values[k] * q[(c, k)]).sum()
        })
    }
}

const MAX_SWEEPS: usize = 100;

/// Symmetric eigensolver by cyclic Jacobi rotations.
///
/// The input must be square and symmetric within `tol` (absolute, entrywise);
/// the symmetrized matrix `(m + mᵀ)/2` is what gets diagonalized.
pub fn sym_eig(m: &Matrix, tol: f64) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(shape(format!("sym_eig needs a square matrix, got {:?}", m.shape())));
    }
    let asym = m.asymmetry();
    if asym > tol {
        return Err(invalid(format!("matrix is not symmetric: max |m_ij - m_ji| = {asym:e} > {tol:e}")));
    }
    let n = m.rows();
    let mut a = Matrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)]));
    let mut v = Matrix::identity(n);

    let total: f64 = a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)] * a[(r, c)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Applies the Jacobi rotation zeroing `a[p][q]` to both `a` and the
/// accumulated eigenvector matrix.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// All eigenvalues of a general real square matrix (balancing, Hessenberg
/// reduction by stabilized elimination, then shifted QR).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(shape(format!("eigenvalues need a square matrix, got {:?}", m.shape())));
    }
    m.ensure_finite()?;
    let n = m.rows();
    // 1-based working copy keeps the index arithmetic of the classic routines.
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for r in 0..n {
        for c in 0..n {
            a[r + 1][c + 1] = m[(r, c)];
        }
    }
    balance(&mut a, n);
    hessenberg(&mut a, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = 0.0;
        }
    }
    let (wr, wi) = hqr(&mut a, n)?;
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let tmp = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
}

#[allow(clippy::many_single_char_names)]
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const MAX_ITS: usize = 60;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    let (mut p, mut q, mut r, mut s, mut w, mut x, mut y, mut z): (f64, f64, f64, f64, f64, f64, f64, f64);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nnu = nn as usize;
            let mut l = nnu;
            while l >= 2 {
                s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nnu][nnu];
            if l == nnu {
                wr[nnu] = x + t;
                wi[nnu] = 0.0;
                nn -= 1;
            } else {
                y = a[nnu - 1][nnu - 1];
                w = a[nnu][nnu - 1] * a[nnu - 1][nnu];
                if l == nnu - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nnu - 1] = x + z;
                        wr[nnu] = x + z;
                        if z != 0.0 {
                            wr[nnu] = x - w / z;
                        }
                        wi[nnu - 1] = 0.0;
                        wi[nnu] = 0.0;
                    } else {
                        wr[nnu - 1] = x + p;
                        wr[nnu] = x + p;
                        wi[nnu - 1] = -z;
                        wi[nnu] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_ITS {
                        return Err(Error::NonConvergence { iterations: its, estimate: x + t });
                    }
                    if its == 10 || its == 20 || its == 40 {
                        t += x;
                        for i in 1..=nnu {
                            a[i][i] -= x;
                        }
                        s = a[nnu][nnu - 1].abs() + a[nnu - 1][nnu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nnu - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nnu {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nnu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nnu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nnu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nnu - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nnu - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l + 1 >= nn as usize {
                break;
            }
        }
    }
    Ok((wr, wi))
}

/// Eigenvalue magnitudes sorted descending.
pub fn eigenvalue_magnitudes(m: &Matrix) -> Result<Vec<f64>> {
    let mut mags: Vec<f64> = eigenvalues(m)?.iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

const RESTARTS: usize = 3;
const STABLE_STEPS: usize = 3;

/// Magnitude of the dominant eigenvalue by power iteration with random
/// restarts.
///
/// An estimate counts as converged once `‖A x‖` has changed by at most
/// `tol · max(1, ρ)` for several consecutive steps and the two-step growth
/// `‖A² x‖` agrees with `ρ²`. Complex dominant pairs of a non-normal matrix
/// usually fail this and yield [`Error::NonConvergence`]; use
/// [`spectral_radius_or_full`] to fall back to the full eigensolve.
pub fn spectral_radius(m: &Matrix, iters: usize, tol: f64, seed: u64) -> Result<f64> {
    if !m.is_square() {
        return Err(shape(format!("spectral radius needs a square matrix, got {:?}", m.shape())));
    }
    m.ensure_finite()?;
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let n = m.rows();
    let mut rng = seeded(seed);
    let mut best: Option<f64> = None;
    let mut last_estimate = 0.0;
    for _ in 0..RESTARTS {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut prev = f64::NAN;
        let mut stable = 0;
        for _ in 0..iters {
            let y = m.mul_vec(&x)?;
            let rho = norm(&y);
            last_estimate = rho;
            if rho == 0.0 {
                // Landed in the null space; the restart will pick a new direction.
                break;
            }
            if (rho - prev).abs() <= tol * rho.max(1.0) {
                stable += 1;
            } else {
                stable = 0;
            }
            prev = rho;
            x = y.into_iter().map(|v| v / rho).collect();
            if stable >= STABLE_STEPS {
                let two = norm(&m.mul_vec(&m.mul_vec(&x)?)?);
                if (two - rho * rho).abs() <= 10.0 * tol * (rho * rho).max(1.0) {
                    best = Some(best.map_or(rho, |b: f64| b.max(rho)));
                    break;
                }
                stable = 0;
            }
        }
    }
    best.ok_or(Error::NonConvergence { iterations: iters, estimate: last_estimate })
}

/// Power iteration first, full eigensolve when it does not converge.
pub fn spectral_radius_or_full(m: &Matrix, iters: usize, tol: f64, seed: u64) -> Result<f64> {
    match spectral_radius(m, iters, tol, seed) {
        Ok(r) => Ok(r),
        Err(Error::NonConvergence { .. }) => Ok(eigenvalue_magnitudes(m)?.first().copied().unwrap_or(0.0)),
        Err(e) => Err(e),
    }
}
