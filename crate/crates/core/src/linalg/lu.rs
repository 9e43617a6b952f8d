use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`, packed in one matrix.
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.require_square()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != C64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            sign,
            singular,
        })
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return C64::new(0.0, 0.0);
        }
        let n = self.lu.rows();
        (0..n).fold(C64::new(self.sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch("rhs length".into()));
        }
        if self.singular {
            return Err(Error::DimensionMismatch("singular system".into()));
        }
        let mut y: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                y[i] = y[i] - l * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                y[i] = y[i] - u * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        Ok(y)
    }
}

pub fn det(a: &ComplexMatrix) -> Result<C64> {
    Ok(Lu::new(a)?.det())
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    Lu::new(a)?.solve(b)
}

/// Imaginary-residue tolerance for a k×k minor of a Hermitian matrix.
fn minor_tol(m: &ComplexMatrix, k: usize) -> f64 {
    1e-10 * m.max_abs().max(1.0).powi(k as i32)
}

/// Determinant of a Hermitian (sub)matrix, checked to be real.
pub fn hermitian_det(m: &ComplexMatrix) -> Result<f64> {
    let n = m.require_square()?;
    let d = det(m)?;
    if d.im.abs() > minor_tol(m, n) {
        return Err(Error::NonRealMinor {
            order: n,
            imag: d.im,
        });
    }
    Ok(d.re)
}

/// Determinants of the k×k top-left blocks, k = 1..n.
pub fn leading_principal_minors(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = m.require_hermitian()?;
    (1..=n)
        .map(|k| {
            let d = det(&m.leading(k))?;
            if d.im.abs() > minor_tol(m, k) {
                return Err(Error::NonRealMinor { order: k, imag: d.im });
            }
            Ok(d.re)
        })
        .collect()
}

/// All 2^n − 1 principal minors, indexed by the bitmask of the retained rows.
pub fn all_principal_minors(m: &ComplexMatrix) -> Result<Vec<(u32, f64)>> {
    let n = m.require_hermitian()?;
    assert!(n < 31, "exhaustive minors limited to small matrices");
    (1u32..(1 << n))
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub = m.principal(&idx);
            let d = det(&sub)?;
            if d.im.abs() > minor_tol(m, idx.len()) {
                return Err(Error::NonRealMinor {
                    order: idx.len(),
                    imag: d.im,
                });
            }
            Ok((mask, d.re))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_minors_of_identity_and_diag() {
        let i4 = ComplexMatrix::identity(4);
        assert_eq!(leading_principal_minors(&i4).unwrap(), vec![1.0; 4]);
        let d = ComplexMatrix::from_diag_real(&[2.0, 3.0, -1.0]);
        assert_eq!(leading_principal_minors(&d).unwrap(), vec![2.0, 6.0, -6.0]);
    }

    #[test]
    fn det_needs_pivoting() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(det(&a).unwrap(), C64::new(-1.0, 0.0));
    }

    #[test]
    fn solve_complex_system() {
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(2.0, 1.0), C64::new(0.0, -1.0)],
            vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0)],
        ])
        .unwrap();
        let x = vec![C64::new(1.0, -2.0), C64::new(0.5, 0.25)];
        let b = a.matvec(&x).unwrap();
        let got = solve(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_det_is_zero() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        assert_eq!(det(&a).unwrap(), C64::new(0.0, 0.0));
    }
}
