//! Dense complex linear algebra.
//!
//! Everything here is a pure function over immutable values. Bipartite
//! vectors use the row-major product basis `|ij⟩ ↦ i·d_B + j`.

mod eigen;
mod lu;
mod matrix;
mod nonsym;
mod svd;
mod takagi;

pub use num_complex::Complex64 as C64;

pub use eigen::{
    classify, default_zero_tol, eig_hermitian, eigvals_hermitian, inertia_of, inertia_report, is_psd,
    EigenDecomposition, Inertia, InertiaReport, PsdCertificate,
};
pub use lu::{all_principal_minors, det, hermitian_det, leading_principal_minors, solve, Lu};
pub use matrix::ComplexMatrix;
pub use nonsym::{eigvals_general, poly_eval, polynomial_roots};
pub use svd::{matrix_rank, svd, Svd};
pub use takagi::{takagi, TakagiFactorization};

use crate::error::{Error, Result};

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// ⟨u|v⟩, conjugate-linear in the first argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &[C64]) -> Result<Vec<C64>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|z| z / n).collect())
}

/// Basis vector `e_k` of length `n`.
pub fn basis_vector(n: usize, k: usize) -> Vec<C64> {
    let mut v = vec![c64(0.0, 0.0); n];
    v[k] = c64(1.0, 0.0);
    v
}

/// Orthogonalize `v` against `basis` (twice, for stability) and append it
/// normalized when the remainder has norm above `tol · ‖v‖`. Returns whether
/// the vector was appended.
pub fn gram_schmidt_push(basis: &mut Vec<Vec<C64>>, v: Vec<C64>, tol: f64) -> bool {
    let n0 = norm(&v);
    if n0 == 0.0 {
        return false;
    }
    let mut w = v;
    for _ in 0..2 {
        for b in basis.iter() {
            let p = inner(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= p * bi;
            }
        }
    }
    let n = norm(&w);
    if n <= tol * n0 {
        return false;
    }
    basis.push(w.into_iter().map(|z| z / n).collect());
    true
}

/// Extend orthonormal columns to an n×n unitary using standard basis vectors.
pub fn complete_orthonormal(cols: &[Vec<C64>], n: usize) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = cols.to_vec();
    let mut k = 0;
    while basis.len() < n && k < n {
        gram_schmidt_push(&mut basis, basis_vector(n, k), 1e-8);
        k += 1;
    }
    ComplexMatrix::from_columns(&basis).expect("equal-length columns")
}

/// Orthonormal basis of the span of `vectors`.
pub fn orthonormal_span(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis = Vec::new();
    for v in vectors {
        gram_schmidt_push(&mut basis, v.clone(), tol);
    }
    basis
}

/// ‖v − Σ_b ⟨b|v⟩ b‖ for an orthonormal basis `basis`: the component of `v`
/// outside the span.
pub fn residual_outside(basis: &[Vec<C64>], v: &[C64]) -> f64 {
    let mut w = v.to_vec();
    for b in basis {
        let p = inner(b, &w);
        for (wi, bi) in w.iter_mut().zip(b) {
            *wi -= p * bi;
        }
    }
    norm(&w)
}

/// ‖Σ_b ⟨b|v⟩ b‖: the component of `v` inside the span.
pub fn component_inside(basis: &[Vec<C64>], v: &[C64]) -> f64 {
    basis.iter().map(|b| inner(b, v).norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn kron_vec(u: &[C64], w: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|&a| w.iter().map(move |&b| a * b)).collect()
}

/// Transpose on subsystem A: block (i, j) of the output is block (j, i) of
/// the input, blocks being dim_b × dim_b.
pub fn partial_transpose(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not {dim_a}·{dim_b} square",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, k) = (r / dim_b, r % dim_b);
        let (j, l) = (c / dim_b, c % dim_b);
        m[(j * dim_b + k, i * dim_b + l)]
    }))
}

/// SWAP on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        if c == j * d + i {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Reshape a bipartite vector into its dim_a × dim_b coefficient matrix.
pub fn coefficient_matrix(v: &[C64], dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if v.len() != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not {dim_a}x{dim_b}",
            v.len()
        )));
    }
    ComplexMatrix::from_vec(dim_a, dim_b, v.to_vec())
}

/// Coefficients (lowest degree first) of the degree-n polynomial
/// t ↦ det(t·A + B), recovered from samples on the (n+1)-th roots of unity.
pub fn det_pencil_coefficients(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = a.require_square()?;
    if b.rows() != n || b.cols() != n {
        return Err(Error::DimensionMismatch("pencil matrices differ in shape".into()));
    }
    let m = n + 1;
    let roots: Vec<C64> = (0..m)
        .map(|j| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64))
        .collect();
    let samples = roots
        .iter()
        .map(|&t| det(&(&a.scale(t) + b)))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..m)
        .map(|k| {
            let s: C64 = samples
                .iter()
                .zip(&roots)
                .map(|(p, w)| p * w.powu(k as u32).conj())
                .sum();
            s / m as f64
        })
        .collect())
}
