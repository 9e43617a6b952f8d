//! The symmetric two-qutrit basis, the five one-parameter eigenvalue
//! families built on it, and local operations on states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::Sig17;
use crate::linalg::{
    self, c64, coefficient_matrix, eig_hermitian, kron, matrix_rank, norm, orthonormal_span, svd, ComplexMatrix,
    C64,
};

pub const QUTRIT: usize = 3;
pub const PAIR: usize = QUTRIT * QUTRIT;

const ZERO_TOL: f64 = 1e-10;

/// Which eigenvector carries the free eigenvalue `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyCase {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
    #[serde(rename = "iv")]
    IV,
    #[serde(rename = "v")]
    V,
}

impl FamilyCase {
    pub const ALL: [FamilyCase; 5] = [Self::I, Self::II, Self::III, Self::IV, Self::V];

    /// Zero-based index into e₁..e₅ of the distinguished eigenvector.
    pub fn distinguished(self) -> usize {
        match self {
            Self::I => 0,
            Self::II => 3,
            Self::III => 1,
            Self::IV => 2,
            Self::V => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::I => "i",
            Self::II => "ii",
            Self::III => "iii",
            Self::IV => "iv",
            Self::V => "v",
        }
    }
}

impl fmt::Display for FamilyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FamilyCase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Self::I),
            "ii" | "2" => Ok(Self::II),
            "iii" | "3" => Ok(Self::III),
            "iv" | "4" => Ok(Self::IV),
            "v" | "5" => Ok(Self::V),
            other => Err(format!("unknown case '{other}', expected one of i, ii, iii, iv, v")),
        }
    }
}

/// |ij⟩ in C³⊗C³.
pub fn ket(i: usize, j: usize) -> Vec<C64> {
    linalg::basis_vector(PAIR, i * QUTRIT + j)
}

fn combo(terms: &[(f64, usize, usize)], scale: f64) -> Vec<C64> {
    let mut v = vec![c64(0.0, 0.0); PAIR];
    for &(w, i, j) in terms {
        v[i * QUTRIT + j] += c64(w * scale, 0.0);
    }
    v
}

/// The orthonormal symmetric vectors e₁..e₅.
#[derive(Clone, Debug)]
pub struct SymBasis {
    pub vectors: [Vec<C64>; 5],
}

impl SymBasis {
    pub fn standard() -> Self {
        let r2 = 1.0 / 2f64.sqrt();
        let r6 = 1.0 / 6f64.sqrt();
        Self {
            vectors: [
                combo(&[(1.0, 0, 1), (1.0, 1, 0)], r2),
                combo(&[(1.0, 1, 2), (1.0, 2, 1)], r2),
                combo(&[(1.0, 0, 2), (1.0, 2, 0)], r2),
                combo(&[(1.0, 0, 0), (-1.0, 1, 1)], r2),
                combo(&[(1.0, 0, 0), (1.0, 1, 1), (-2.0, 2, 2)], r6),
            ],
        }
    }

    /// e_k with k = 1..=5.
    pub fn e(&self, k: usize) -> &[C64] {
        &self.vectors[k - 1]
    }
}

/// Antisymmetric basis (|01⟩−|10⟩)/√2, (|12⟩−|21⟩)/√2, (|02⟩−|20⟩)/√2.
pub fn antisymmetric_basis() -> [Vec<C64>; 3] {
    let r2 = 1.0 / 2f64.sqrt();
    [
        combo(&[(1.0, 0, 1), (-1.0, 1, 0)], r2),
        combo(&[(1.0, 1, 2), (-1.0, 2, 1)], r2),
        combo(&[(1.0, 0, 2), (-1.0, 2, 0)], r2),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFamily {
    pub case: FamilyCase,
    pub x: f64,
}

impl SymmetricFamily {
    pub fn new(case: FamilyCase, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange {
                name: "x",
                value: x,
                range: "[0, 1]",
            });
        }
        Ok(Self { case, x })
    }

    /// λ₁..λ₅: `x` at the distinguished index and (1 − x)/4 elsewhere.
    pub fn eigenvalues(&self) -> [f64; 5] {
        let mut l = [(1.0 - self.x) / 4.0; 5];
        l[self.case.distinguished()] = self.x;
        l
    }
}

/// A two-qutrit density matrix together with the weights it was built from.
#[derive(Clone, Debug)]
pub struct QutritState {
    rho: ComplexMatrix,
    eigenvalues: Vec<f64>,
    family: Option<SymmetricFamily>,
    degenerate: bool,
}

impl QutritState {
    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn family(&self) -> Option<SymmetricFamily> {
        self.family
    }

    /// Set when some weight is zero, so the rank is below the family's five.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Σ λ_j |v_j⟩⟨v_j| for orthonormal `vectors`.
    pub fn from_spectral(vectors: &[Vec<C64>], weights: &[f64]) -> Result<Self> {
        if vectors.len() != weights.len() {
            return Err(Error::DimensionMismatch("one weight per vector required".into()));
        }
        let mut rho = ComplexMatrix::zeros(PAIR, PAIR);
        for (v, &w) in vectors.iter().zip(weights) {
            if v.len() != PAIR {
                return Err(Error::DimensionMismatch(format!("vector of length {}", v.len())));
            }
            rho = &rho + &ComplexMatrix::outer(v, v).scale_real(w);
        }
        Ok(Self {
            rho,
            eigenvalues: weights.to_vec(),
            family: None,
            degenerate: weights.iter().any(|&w| w.abs() <= ZERO_TOL),
        })
    }

    /// Normalized projector onto the span of `basis` (need not be orthonormal).
    pub fn from_range(basis: &[Vec<C64>]) -> Result<Self> {
        if basis.iter().any(|v| v.len() != PAIR) {
            return Err(Error::DimensionMismatch("range vectors must have length 9".into()));
        }
        let on = orthonormal_span(basis, 1e-10);
        if on.is_empty() {
            return Err(Error::ZeroVector);
        }
        let w = 1.0 / on.len() as f64;
        Self::from_spectral(&on, &vec![w; on.len()])
    }

    /// Wrap an arbitrary Hermitian 9×9 matrix; weights are its nonzero eigenvalues.
    pub fn from_matrix(rho: ComplexMatrix) -> Result<Self> {
        if rho.rows() != PAIR {
            return Err(Error::DimensionMismatch("state must be 9x9".into()));
        }
        let eig = eig_hermitian(&rho)?;
        let tol = ZERO_TOL * eig.spectral_norm();
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().rev().copied().filter(|l| l.abs() > tol).collect();
        Ok(Self {
            rho,
            eigenvalues,
            family: None,
            degenerate: false,
        })
    }

    pub fn partial_transpose(&self) -> ComplexMatrix {
        linalg::partial_transpose(&self.rho, QUTRIT, QUTRIT).expect("9x9 state")
    }

    pub fn rank(&self) -> Result<usize> {
        let eig = eig_hermitian(&self.rho)?;
        let tol = ZERO_TOL * eig.spectral_norm();
        Ok(eig.eigenvalues.iter().filter(|&&l| l > tol).count())
    }

    pub fn reduced_a(&self) -> ComplexMatrix {
        partial_trace_b(&self.rho, QUTRIT, QUTRIT)
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        partial_trace_a(&self.rho, QUTRIT, QUTRIT)
    }

    pub fn to_json(&self) -> StateJson {
        let grid = |f: fn(&C64) -> f64| -> Vec<Vec<Sig17>> {
            (0..PAIR)
                .map(|i| (0..PAIR).map(|j| Sig17(f(&self.rho[(i, j)]))).collect())
                .collect()
        };
        StateJson {
            case: self.family.map(|f| f.case),
            x: self.family.map(|f| Sig17(f.x)),
            rho_re: grid(|z| z.re),
            rho_im: grid(|z| z.im),
        }
    }
}

#[derive(Serialize)]
pub struct StateJson {
    pub case: Option<FamilyCase>,
    pub x: Option<Sig17>,
    pub rho_re: Vec<Vec<Sig17>>,
    pub rho_im: Vec<Vec<Sig17>>,
}

/// ρ = x|e_i⟩⟨e_i| + (1 − x)/4 Σ_{j≠i} |e_j⟩⟨e_j|.
pub fn build_family(case: FamilyCase, x: f64) -> Result<QutritState> {
    let family = SymmetricFamily::new(case, x)?;
    let basis = SymBasis::standard();
    let mut state = QutritState::from_spectral(&basis.vectors, &family.eigenvalues())?;
    state.family = Some(family);
    Ok(state)
}

pub fn partial_trace_b(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim_a, dim_a, |i, j| (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum())
}

pub fn partial_trace_a(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim_b, dim_b, |k, l| (0..dim_a).map(|i| m[(i * dim_b + k, i * dim_b + l)]).sum())
}

/// Trace-one copy, for display only; library operations keep states unnormalized.
pub fn normalize_trace(m: &ComplexMatrix) -> ComplexMatrix {
    let t = m.trace().re;
    if t == 0.0 {
        m.clone()
    } else {
        m.scale_real(1.0 / t)
    }
}

/// A local operator A ⊗ B.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    pub op_a: ComplexMatrix,
    pub op_b: ComplexMatrix,
    pub unitary: bool,
}

impl LocalOperator {
    pub fn new(op_a: ComplexMatrix, op_b: ComplexMatrix) -> Self {
        let unitary = op_a.is_unitary(1e-10) && op_b.is_unitary(1e-10);
        Self { op_a, op_b, unitary }
    }

    pub fn identity() -> Self {
        Self::new(ComplexMatrix::identity(QUTRIT), ComplexMatrix::identity(QUTRIT))
    }

    /// K ⊗ K with K the 2×2 Hadamard block ⊕ 1; maps case (i) to case (ii).
    pub fn hadamard_pair() -> Self {
        let k = hadamard_qutrit();
        Self::new(k.clone(), k)
    }

    /// Π ⊗ Π with Π exchanging |0⟩ and |1⟩; maps case (iii) to case (iv).
    pub fn level_swap_pair() -> Self {
        let p = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        Self::new(p.clone(), p)
    }

    /// K ⊗ K̄ with K = [[1, i], [1, −i]]/√2 ⊕ 1, the change of frame used for
    /// the x = 1/7 analysis.
    pub fn example_frame() -> Self {
        let k = example_k();
        Self::new(k.clone(), k.conj())
    }

    pub fn operator(&self) -> ComplexMatrix {
        kron(&self.op_a, &self.op_b)
    }
}

/// (1/√2)[[1, 1], [1, −1]] ⊕ 1.
pub fn hadamard_qutrit() -> ComplexMatrix {
    let h = 1.0 / 2f64.sqrt();
    ComplexMatrix::from_real_rows(&[&[h, h, 0.0], &[h, -h, 0.0], &[0.0, 0.0, 1.0]])
}

/// (1/√2)[[1, i], [1, −i]] ⊕ 1.
pub fn example_k() -> ComplexMatrix {
    let h = 1.0 / 2f64.sqrt();
    ComplexMatrix::from_rows(&[
        vec![c64(h, 0.0), c64(0.0, h), c64(0.0, 0.0)],
        vec![c64(h, 0.0), c64(0.0, -h), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
    ])
    .expect("3x3")
}

/// (A ⊗ B) ρ (A ⊗ B)†, not renormalized.
pub fn apply_local(state: &QutritState, op: &LocalOperator) -> Result<ComplexMatrix> {
    apply_local_matrix(state.rho(), op)
}

pub fn apply_local_matrix(rho: &ComplexMatrix, op: &LocalOperator) -> Result<ComplexMatrix> {
    let full = op.operator();
    if full.cols() != rho.rows() {
        return Err(Error::DimensionMismatch(format!(
            "local operator acts on dimension {}, state has {}",
            full.cols(),
            rho.rows()
        )));
    }
    full.conjugate(rho)
}

/// Orthonormal bases of 𝓡(ρ) and ker ρ, split at 1e-10 · ‖ρ‖₂.
pub fn range_kernel(state: &QutritState) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let eig = eig_hermitian(state.rho())?;
    let tol = ZERO_TOL * eig.spectral_norm();
    let mut range = Vec::new();
    let mut kernel = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > tol {
            range.push(eig.vector(k));
        } else {
            kernel.push(eig.vector(k));
        }
    }
    Ok((range, kernel))
}

/// Rank of the dim_a × dim_b coefficient matrix of `v / ‖v‖`, counting
/// singular values above `tol`.
pub fn schmidt_rank(v: &[C64], dim_a: usize, dim_b: usize, tol: f64) -> Result<usize> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let unit: Vec<C64> = v.iter().map(|z| z / n).collect();
    matrix_rank(&coefficient_matrix(&unit, dim_a, dim_b)?, Some(tol))
}

/// Schmidt coefficients (singular values of the normalized coefficient matrix).
pub fn schmidt_coefficients(v: &[C64], dim_a: usize, dim_b: usize) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let unit: Vec<C64> = v.iter().map(|z| z / n).collect();
    Ok(svd(&coefficient_matrix(&unit, dim_a, dim_b)?)?.s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvals_hermitian, inner, swap_operator};

    #[test]
    fn basis_is_orthonormal_and_symmetric() {
        let b = SymBasis::standard();
        let swap = swap_operator(3);
        for i in 0..5 {
            for j in 0..5 {
                let ip = inner(&b.vectors[i], &b.vectors[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c64(expected, 0.0)).norm() < 1e-14);
            }
            assert_eq!(swap.matvec(&b.vectors[i]).unwrap(), b.vectors[i]);
        }
    }

    #[test]
    fn pure_e5_at_x_one() {
        let s = build_family(FamilyCase::V, 1.0).unwrap();
        assert_eq!(s.rank().unwrap(), 1);
        assert!(s.is_degenerate());
        let e5 = SymBasis::standard().e(5).to_vec();
        assert!(s.rho().max_abs_diff(&ComplexMatrix::outer(&e5, &e5)) < 1e-15);
    }

    #[test]
    fn flat_spectrum_at_one_fifth_is_ppt() {
        let s = build_family(FamilyCase::V, 0.2).unwrap();
        let ev = eigvals_hermitian(&s.partial_transpose()).unwrap();
        assert!(ev[0] > 1e-3, "min eig {}", ev[0]);
    }

    #[test]
    fn case_one_half_is_npt() {
        let s = build_family(FamilyCase::I, 0.5).unwrap();
        let ev = eigvals_hermitian(&s.partial_transpose()).unwrap();
        assert!(ev[0] < -0.1);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(build_family(FamilyCase::V, 1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(build_family(FamilyCase::V, -0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rank_four_at_zero_is_flagged() {
        let s = build_family(FamilyCase::III, 0.0).unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.rank().unwrap(), 4);
    }

    #[test]
    fn hadamard_maps_e1_to_e4() {
        let b = SymBasis::standard();
        let kk = LocalOperator::hadamard_pair().operator();
        let v = kk.matvec(b.e(1)).unwrap();
        for (a, e) in v.iter().zip(b.e(4)) {
            assert!((a - e).norm() < 1e-15);
        }
        let v5 = kk.matvec(b.e(5)).unwrap();
        for (a, e) in v5.iter().zip(b.e(5)) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_operator_is_noop() {
        let s = build_family(FamilyCase::II, 0.3).unwrap();
        let r = apply_local(&s, &LocalOperator::identity()).unwrap();
        assert!(r.max_abs_diff(s.rho()) < 1e-16);
    }

    #[test]
    fn case_i_maps_to_case_ii() {
        for &x in &[0.05, 0.3, 0.77] {
            let a = build_family(FamilyCase::I, x).unwrap();
            let b = build_family(FamilyCase::II, x).unwrap();
            let r = apply_local(&a, &LocalOperator::hadamard_pair()).unwrap();
            assert!(r.max_abs_diff(b.rho()) <= 1e-12);
        }
    }

    #[test]
    fn example_frame_keeps_spectrum() {
        let s = build_family(FamilyCase::V, 1.0 / 7.0).unwrap();
        let op = LocalOperator::example_frame();
        assert!(op.unitary);
        let t = apply_local(&s, &op).unwrap();
        assert!(t.hermitian_residual() < 1e-15);
        let a = eigvals_hermitian(s.rho()).unwrap();
        let b = eigvals_hermitian(&t).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_dimension_operator() {
        let s = build_family(FamilyCase::V, 0.3).unwrap();
        let op = LocalOperator::new(ComplexMatrix::identity(2), ComplexMatrix::identity(3));
        assert!(matches!(apply_local(&s, &op), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn kernel_dimension_and_exact_cases() {
        let s = build_family(FamilyCase::V, 0.4).unwrap();
        let (range, kernel) = range_kernel(&s).unwrap();
        assert_eq!((range.len(), kernel.len()), (5, 4));
        for k in &kernel {
            assert!(norm(&s.rho().matvec(k).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn schmidt_ranks() {
        let b = SymBasis::standard();
        assert_eq!(schmidt_rank(&ket(1, 2), 3, 3, 1e-9).unwrap(), 1);
        assert_eq!(schmidt_rank(b.e(4), 3, 3, 1e-9).unwrap(), 2);
        assert_eq!(schmidt_rank(b.e(5), 3, 3, 1e-9).unwrap(), 3);
        assert!(matches!(schmidt_rank(&[c64(0.0, 0.0); 9], 3, 3, 1e-9), Err(Error::ZeroVector)));
        let s = schmidt_coefficients(b.e(5), 3, 3).unwrap();
        let r6 = 6f64.sqrt();
        for (x, e) in s.iter().zip([2.0 / r6, 1.0 / r6, 1.0 / r6]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn reduced_states_have_unit_trace() {
        let s = build_family(FamilyCase::IV, 0.6).unwrap();
        assert!((s.reduced_a().trace().re - 1.0).abs() < 1e-14);
        assert!((s.reduced_b().trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn json_fields() {
        let s = build_family(FamilyCase::V, 1.0 / 7.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(s.to_json()).unwrap();
        assert_eq!(v["case"], "v");
        assert_eq!(v["rho_re"].as_array().unwrap().len(), 9);
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert!(text.contains("\"x\":1.4285714285714285e-1"));
    }
}
