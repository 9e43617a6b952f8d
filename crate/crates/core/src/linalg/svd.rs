//! One-sided (Hestenes) Jacobi SVD for complex matrices.

use num_complex::Complex64 as C64;

use super::{complete_orthonormal, inner, norm, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Svd {
    /// m×m unitary.
    pub u: ComplexMatrix,
    /// min(m, n) values, descending.
    pub s: Vec<f64>,
    /// n×n unitary.
    pub v: ComplexMatrix,
}

impl Svd {
    /// U Σ V†
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut sigma = ComplexMatrix::zeros(m, n);
        for (i, &s) in self.s.iter().enumerate() {
            sigma[(i, i)] = C64::new(s, 0.0);
        }
        &(&self.u * &sigma) * &self.v.adjoint()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    svd_tall(a)
}

fn svd_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols = a.columns();
    let mut v = ComplexMatrix::identity(n);
    let max_sweeps = 100;
    let mut converged = n < 2;
    let mut rotations = 0;
    let total: f64 = cols.iter().flatten().map(|z| z.norm_sqr()).sum();

    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        let mut changed = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                // the second test drops pairs of columns that are pure roundoff
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() || g <= 1e-32 * total {
                    continue;
                }
                changed = true;
                rotations += 1;
                // diagonalize the Gram block [[α, γ], [γ̄, β]]
                let u = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jpp = C64::new(c, 0.0);
                let jpq = u * s;
                let jqp = -u.conj() * s;
                let jqq = C64::new(c, 0.0);
                for k in 0..m {
                    let xp = cols[p][k];
                    let xq = cols[q][k];
                    cols[p][k] = xp * jpp + xq * jqp;
                    cols[q][k] = xp * jpq + xq * jqq;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * jpp + vq * jqp;
                    v[(k, q)] = vp * jpq + vq * jqq;
                }
            }
        }
        if !changed {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { rotations });
    }

    let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let v = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = smax * f64::EPSILON * (m.max(n) as f64);
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(m);
    for (j, &idx) in order.iter().enumerate() {
        if s[j] > cutoff && s[j] > 0.0 {
            ucols.push(cols[idx].iter().map(|z| z / s[j]).collect());
        } else {
            break;
        }
    }
    let u = complete_orthonormal(&ucols, m);
    Ok(Svd { u, s, v })
}

/// Number of singular values above `tol` (default 1e-9 · s_max).
pub fn matrix_rank(a: &ComplexMatrix, tol: Option<f64>) -> Result<usize> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0);
    }
    let s = svd(a)?.s;
    let smax = s.first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or(1e-9 * smax);
    Ok(s.iter().filter(|&&x| x > tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_values() {
        let a = ComplexMatrix::from_diag_real(&[2.0, 1.0]);
        let d = svd(&a).unwrap();
        assert_eq!(d.s, vec![2.0, 1.0]);
    }

    #[test]
    fn rank_one_outer() {
        let u = vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)];
        let w = vec![C64::new(0.5, 0.0), C64::new(0.0, -1.0)];
        let a = ComplexMatrix::outer(&u, &w);
        let d = svd(&a).unwrap();
        assert!((d.s[0] - norm(&u) * norm(&w)).abs() < 1e-14);
        assert!(d.s[1].abs() < 1e-14);
        assert!(d.u.is_unitary(1e-12) && d.v.is_unitary(1e-12));
        assert!(d.reconstruct().max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn wide_matrix() {
        let a = ComplexMatrix::from_fn(2, 4, |i, j| C64::new((i * 3 + j) as f64, (j as f64) - 1.0));
        let d = svd(&a).unwrap();
        assert_eq!(d.s.len(), 2);
        assert!(d.reconstruct().max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn ranks() {
        assert_eq!(matrix_rank(&ComplexMatrix::zeros(3, 3), None).unwrap(), 0);
        let bell = ComplexMatrix::from_diag_real(&[1.0, 1.0]);
        assert_eq!(matrix_rank(&bell, None).unwrap(), 2);
        let third = 1.0 / 3.0f64;
        let diag = ComplexMatrix::from_diag_real(&[third.sqrt(); 3]);
        assert_eq!(matrix_rank(&diag, None).unwrap(), 3);
    }
}
