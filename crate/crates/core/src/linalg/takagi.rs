//! Takagi factorization `A = U diag(s) Uᵀ` of a complex symmetric matrix.
//!
//! Writing `A = X + iY`, the real symmetric matrix `H = [[X, Y], [Y, −X]]`
//! has eigenvalues `±s_j`. An eigenvector `[p; q]` for `+s_j` yields the
//! Takagi vector `u_j = p + iq` with `A ū_j = s_j u_j`. The map
//! `[p; q] ↦ [−q; p]` sends the `+s` eigenspace onto the `−s` one, so any
//! real-orthonormal basis of the positive eigenspace is already
//! complex-orthonormal; degenerate clusters need no extra step. `U` is unique
//! only up to real-orthogonal mixing inside a cluster, so callers should
//! check reconstruction rather than compare `U` entrywise.

use num_complex::Complex64 as C64;

use super::{complete_orthonormal, eig_hermitian, gram_schmidt_push, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TakagiFactorization {
    pub unitary: ComplexMatrix,
    /// Nonnegative, descending.
    pub singular_values: Vec<f64>,
}

impl TakagiFactorization {
    /// U diag(s) Uᵀ
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diag_real(&self.singular_values);
        &(&self.unitary * &d) * &self.unitary.transpose()
    }
}

pub fn takagi(a: &ComplexMatrix) -> Result<TakagiFactorization> {
    let n = a.require_square()?;
    let res = a.symmetric_residual();
    if res > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { residual: res });
    }
    if n == 0 {
        return Ok(TakagiFactorization {
            unitary: ComplexMatrix::zeros(0, 0),
            singular_values: vec![],
        });
    }

    let mut h = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // symmetrize against roundoff in the input
            let z = (a[(i, j)] + a[(j, i)]) * 0.5;
            h[(i, j)] = C64::new(z.re, 0.0);
            h[(i, j + n)] = C64::new(z.im, 0.0);
            h[(i + n, j)] = C64::new(z.im, 0.0);
            h[(i + n, j + n)] = C64::new(-z.re, 0.0);
        }
    }
    let eig = eig_hermitian(&h)?;
    let smax = eig.spectral_norm();
    let zero_tol = 1e-12 * smax.max(f64::MIN_POSITIVE);

    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut values: Vec<f64> = Vec::with_capacity(n);
    // positive eigenvalues, largest first
    for k in (0..2 * n).rev() {
        if vectors.len() == n {
            break;
        }
        let lambda = eig.eigenvalues[k];
        if lambda <= zero_tol {
            break;
        }
        let col = eig.eigenvectors.column(k);
        let u: Vec<C64> = (0..n).map(|i| C64::new(col[i].re, col[i + n].re)).collect();
        if gram_schmidt_push(&mut vectors, u, 1e-6) {
            values.push(lambda);
        }
    }
    // null space of A: complex Gram-Schmidt over the near-zero eigenvectors of H
    if vectors.len() < n {
        for k in 0..2 * n {
            if vectors.len() == n {
                break;
            }
            if eig.eigenvalues[k].abs() > zero_tol {
                continue;
            }
            let col = eig.eigenvectors.column(k);
            let u: Vec<C64> = (0..n).map(|i| C64::new(col[i].re, col[i + n].re)).collect();
            if gram_schmidt_push(&mut vectors, u, 1e-6) {
                values.push(0.0);
            }
        }
    }
    let filled = vectors.len();
    let unitary = complete_orthonormal(&vectors, n);
    values.resize(n, 0.0);
    debug_assert!(filled <= n);

    Ok(TakagiFactorization {
        unitary,
        singular_values: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd;

    #[test]
    fn identity() {
        let t = takagi(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(t.singular_values.len(), 3);
        for s in &t.singular_values {
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert!(t.reconstruct().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(t.unitary.is_unitary(1e-12));
    }

    #[test]
    fn off_diagonal_swap() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = takagi(&a).unwrap();
        assert!((t.singular_values[0] - 1.0).abs() < 1e-14);
        assert!((t.singular_values[1] - 1.0).abs() < 1e-14);
        assert!(t.reconstruct().max_abs_diff(&a) <= 1e-9);
    }

    #[test]
    fn e4_coefficients() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = ComplexMatrix::from_diag_real(&[h, -h, 0.0]);
        let t = takagi(&a).unwrap();
        let s = svd(&a).unwrap().s;
        for (x, y) in t.singular_values.iter().zip(&s) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((t.singular_values[0] - h).abs() < 1e-14);
        assert!(t.singular_values[2].abs() < 1e-14);
        assert!(t.reconstruct().max_abs_diff(&a) < 1e-12);
        assert!(t.unitary.is_unitary(1e-12));
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(matches!(takagi(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn zero_matrix() {
        let t = takagi(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert!(t.unitary.is_unitary(1e-12));
        assert_eq!(t.singular_values, vec![0.0; 3]);
    }
}
