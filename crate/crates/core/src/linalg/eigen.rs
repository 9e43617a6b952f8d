//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal pair `(p, q)`. The complex
//! entry `a_pq = |a_pq| u` is first made real by the phase `u`, after which a
//! classical real Jacobi rotation applies. Sweeps visit pairs in row-major
//! order so results are reproducible bit-for-bit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// V diag(λ) V†
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diag_real(&self.eigenvalues);
        let v = &self.eigenvectors;
        &(v * &d) * &v.adjoint()
    }

    /// Spectral norm ‖M‖₂ of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Inertia {
    pub fn new(negative: usize, zero: usize, positive: usize) -> Self {
        Self {
            negative,
            zero,
            positive,
        }
    }

    pub fn dimension(&self) -> usize {
        self.negative + self.zero + self.positive
    }
}

impl std::fmt::Display for Inertia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.negative, self.zero, self.positive)
    }
}

/// Inertia together with the tolerance used and the distance of the closest
/// eigenvalue to a ±tol boundary.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InertiaReport {
    pub inertia: Inertia,
    pub tol: f64,
    pub margin: f64,
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = m.require_hermitian()?;
    let mut a = m.clone();
    // symmetrize exactly so roundoff in the input cannot bias the diagonal
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius();
    let budget = 100 * n * n;
    let mut rotations = 0usize;

    if n > 1 && scale > 0.0 {
        loop {
            let off: f64 = off_diagonal_norm(&a);
            if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
                break;
            }
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g == 0.0 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    // skip pairs already negligible relative to both diagonals
                    if g <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) || g <= 1e-20 * scale {
                        a[(p, q)] = C64::new(0.0, 0.0);
                        a[(q, p)] = C64::new(0.0, 0.0);
                        continue;
                    }
                    if rotations >= budget {
                        return Err(Error::NoConvergence { rotations });
                    }
                    rotate(&mut a, &mut v, p, q, apq / g, g, app, aqq);
                    rotations += 1;
                    rotated = true;
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

pub fn eigvals_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eig_hermitian(m)?.eigenvalues)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[allow(clippy::too_many_arguments)]
fn rotate(
    a: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    u: C64,
    g: f64,
    app: f64,
    aqq: f64,
) {
    let n = a.rows();
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = [[c, s u], [-s ū, c]] on the (p, q) plane; A ← J† A J
    let jpp = C64::new(c, 0.0);
    let jpq = u * s;
    let jqp = -u.conj() * s;
    let jqq = C64::new(c, 0.0);

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Default zero tolerance for rank and inertia decisions: 1e-10 · ‖M‖₂.
pub fn default_zero_tol(spectral_norm: f64) -> f64 {
    1e-10 * spectral_norm
}

pub fn classify(eigenvalues: &[f64], tol: f64) -> InertiaReport {
    let mut inertia = Inertia::new(0, 0, 0);
    let mut margin = f64::INFINITY;
    for &l in eigenvalues {
        if l < -tol {
            inertia.negative += 1;
        } else if l > tol {
            inertia.positive += 1;
        } else {
            inertia.zero += 1;
        }
        margin = margin.min((l.abs() - tol).abs());
    }
    InertiaReport {
        inertia,
        tol,
        margin,
    }
}

/// Counts of eigenvalues below −tol, within ±tol and above +tol.
/// `zero_tol = None` uses 1e-10 · ‖M‖₂.
pub fn inertia_of(m: &ComplexMatrix, zero_tol: Option<f64>) -> Result<Inertia> {
    Ok(inertia_report(m, zero_tol)?.inertia)
}

pub fn inertia_report(m: &ComplexMatrix, zero_tol: Option<f64>) -> Result<InertiaReport> {
    let eig = eig_hermitian(m)?;
    let tol = zero_tol.unwrap_or_else(|| default_zero_tol(eig.spectral_norm()));
    Ok(classify(&eig.eigenvalues, tol))
}

/// PSD verdict with the minimum eigenpair as certificate; when not PSD the
/// eigenvector is a witness `v` with ⟨v|M|v⟩ < −tol.
#[derive(Clone, Debug)]
pub struct PsdCertificate {
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub eigenvector: Vec<C64>,
    /// `min_eigenvalue + tol`; the verdict flips if this crosses zero.
    pub margin: f64,
}

pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<PsdCertificate> {
    let eig = eig_hermitian(m)?;
    let min_eigenvalue = eig.eigenvalues[0];
    Ok(PsdCertificate {
        psd: min_eigenvalue >= -tol,
        min_eigenvalue,
        eigenvector: eig.vector(0),
        margin: min_eigenvalue + tol,
    })
}
