//! Eigenvalues of small general complex matrices (shifted Hessenberg QR) and
//! polynomial roots through the companion matrix.

use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // H ← (I − 2vv†) H (I − 2vv†) on the trailing block
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..v.len() {
                h[(i, k + 1 + j)] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalues of a general square matrix, in deflation order.
pub fn eigvals_general(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.require_square()?;
    if n == 0 {
        return Ok(vec![]);
    }
    let mut h = hessenberg(m);
    let mut eigs = vec![C64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = 100 * n;

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if total >= budget {
            return Err(Error::NoConvergence { rotations: total });
        }
        iter += 1;
        total += 1;

        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mu = if iter % 11 == 10 {
            d + h[(hi, hi - 1)].norm()
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots: Vec<(C64, C64)> = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let hk = h[(k, j)];
                let hk1 = h[(k + 1, j)];
                h[(k, j)] = cs.conj() * hk + sn.conj() * hk1;
                h[(k + 1, j)] = -sn * hk + cs * hk1;
            }
            rots.push((cs, sn));
        }
        for (idx, &(cs, sn)) in rots.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hi) {
                let hk = h[(i, k)];
                let hk1 = h[(i, k + 1)];
                h[(i, k)] = hk * cs + hk1 * sn;
                h[(i, k + 1)] = -hk * sn.conj() + hk1 * cs.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    eigs[0] = h[(0, 0)];
    Ok(eigs)
}

/// Evaluate Σ c_k t^k (coefficients lowest degree first).
pub fn poly_eval(coeffs: &[C64], t: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * t + c)
}

fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Roots of a polynomial (lowest degree first) from its companion matrix,
/// each polished by `newton_steps` Newton iterations. Leading coefficients
/// below `1e-14 · max|c|` are dropped, lowering the degree.
pub fn polynomial_roots(coeffs: &[C64], newton_steps: usize) -> Result<Vec<C64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![]);
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = coeffs[deg];
    let mut comp = ComplexMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let mut roots = eigvals_general(&comp)?;
    let p = &coeffs[..=deg];
    let dp = poly_derivative(p);
    for r in &mut roots {
        for _ in 0..newton_steps {
            let d = poly_eval(&dp, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = poly_eval(p, *r) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            let cand = *r - step;
            if poly_eval(p, cand).norm() <= poly_eval(p, *r).norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cubic_roots() {
        // (t − 1)(t + 2)(t − i) = t³ + (1 − i)t² + (−2 − i)t + 2i
        let coeffs = [c(0.0, 2.0), c(-2.0, -1.0), c(1.0, -1.0), c(1.0, 0.0)];
        let mut roots = polynomial_roots(&coeffs, 2).unwrap();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let expected = [c(-2.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn triple_root() {
        let coeffs = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let roots = polynomial_roots(&coeffs, 2).unwrap();
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn general_eigs_of_rotation() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let mut e = eigvals_general(&m).unwrap();
        e.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn general_eigs_trace_and_det() {
        let m = ComplexMatrix::from_fn(5, 5, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let e = eigvals_general(&m).unwrap();
        let tr: C64 = e.iter().sum();
        assert!((tr - m.trace()).norm() < 1e-10);
        let prod = e.iter().fold(c(1.0, 0.0), |a, &b| a * b);
        let d = super::super::det(&m).unwrap();
        assert!((prod - d).norm() < 1e-9 * d.norm().max(1.0));
    }
}
