//! Dense linear algebra sized for desk-scale experiments: matrix arithmetic,
//! a Jacobi symmetric eigensolver, a general real eigenvalue solver, one-sided
//! Jacobi SVD, numerical rank and spectral radius.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{
    eigenvalue_magnitudes, eigenvalues, spectral_radius, spectral_radius_or_full, sym_eig, EigenDecomposition,
};
pub use matrix::{distance, dot, fmt_f64, norm, Matrix};
pub(crate) use matrix::{check_positive, parse_f64s, parse_usizes};
pub use svd::{numerical_rank, operator_norm, svd, SingularValueDecomposition};

/// Relative tolerance used for rank decisions unless a caller overrides it.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Orthonormal basis (as columns) of the span of `vectors`, by modified
/// Gram-Schmidt with re-orthogonalization. Vectors whose residual falls below
/// `rel_tol` times their norm are dropped.
pub fn orthonormal_basis(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= p * bi);
            }
        }
        let nw = norm(&w);
        if nw > rel_tol * scale {
            basis.push(w.into_iter().map(|x| x / nw).collect());
        }
    }
    basis
}
