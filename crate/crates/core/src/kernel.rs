//! Product vectors in subspaces of bipartite spaces.
//!
//! Two routes are provided. In C²⊗C³ the vectors orthogonal to three given
//! vectors and of the form (m|0⟩ + n|1⟩)⊗|w⟩ are the roots of a binary cubic,
//! found exactly through a companion matrix. In C³⊗C³ a kernel is searched for
//! unit vectors whose coefficient matrix has all 2×2 minors zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distill::EvidenceLevel;
use crate::error::{Error, Result};
use crate::format::{complex_pairs, ser_f64, ser_opt_f64};
use crate::linalg::{
    c64, coefficient_matrix, det_pencil_coefficients, gram_schmidt_push, kron, kron_vec, norm, normalize,
    orthonormal_span, polynomial_roots, residual_outside, solve, svd, swap_operator, takagi, ComplexMatrix, C64,
};
use crate::states::{antisymmetric_basis, ket, range_kernel, schmidt_rank, QutritState, SymBasis};

/// Objective value below which a searched vector counts as a product vector.
pub const FOUND_OBJECTIVE: f64 = 1e-18;
/// Projection residual accepted for the explicit candidates |22⟩ and |01⟩.
pub const EXACT_TOL: f64 = 1e-12;
pub const DEFAULT_STARTS: usize = 64;

const FOUND_RESIDUAL: f64 = 1e-9;
const SPAN_TOL: f64 = 1e-10;

/// An orthonormal basis of a subspace of C^dA ⊗ C^dB.
#[derive(Clone, Debug)]
pub struct Subspace {
    dim_a: usize,
    dim_b: usize,
    basis: Vec<Vec<C64>>,
}

impl Subspace {
    /// Span of `vectors`, orthonormalized.
    pub fn new(dim_a: usize, dim_b: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim_a * dim_b) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in a {dim_a}x{dim_b} space",
                v.len()
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            basis: orthonormal_span(vectors, SPAN_TOL),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    pub fn complement(&self) -> Self {
        let n = self.dim_a * self.dim_b;
        let mut all = self.basis.clone();
        for k in 0..n {
            gram_schmidt_push(&mut all, crate::linalg::basis_vector(n, k), 1e-8);
        }
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            basis: all.split_off(self.basis.len()),
        }
    }

    /// ‖v − Πv‖ with Π the orthogonal projector onto the subspace.
    pub fn distance(&self, v: &[C64]) -> f64 {
        residual_outside(&self.basis, v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Factors {
    #[serde(serialize_with = "complex_pairs")]
    pub u: Vec<C64>,
    #[serde(serialize_with = "complex_pairs")]
    pub w: Vec<C64>,
}

/// Outcome of a product-vector search. `residual` is the distance of the
/// unit vector from the target subspace plus the sum of its squared 2×2
/// minors.
#[derive(Clone, Debug, Serialize)]
pub struct ProductVectorResult {
    pub found: bool,
    #[serde(skip)]
    pub vector: Option<Vec<C64>>,
    pub factors: Option<Factors>,
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub min_objective: Option<f64>,
    pub evidence_level: EvidenceLevel,
}

impl ProductVectorResult {
    fn from_vector(v: Vec<C64>, dim_a: usize, dim_b: usize, distance: f64) -> Result<Self> {
        let v = normalize(&v)?;
        let objective = minor_objective(&coefficient_matrix(&v, dim_a, dim_b)?);
        let residual = distance + objective;
        let found = residual <= FOUND_RESIDUAL;
        Ok(Self {
            found,
            factors: Some(factorize(&v, dim_a, dim_b)?),
            vector: Some(v),
            residual,
            min_objective: Some(objective),
            evidence_level: if found {
                EvidenceLevel::Certified
            } else {
                EvidenceLevel::Searched
            },
        })
    }

    fn not_found(residual: f64, min_objective: Option<f64>) -> Self {
        Self {
            found: false,
            vector: None,
            factors: None,
            residual,
            min_objective,
            evidence_level: EvidenceLevel::Searched,
        }
    }
}

/// Best rank-one factors u ⊗ w of a bipartite vector.
pub fn factorize(v: &[C64], dim_a: usize, dim_b: usize) -> Result<Factors> {
    let dec = svd(&coefficient_matrix(v, dim_a, dim_b)?)?;
    let s = dec.s[0];
    Ok(Factors {
        u: dec.u.column(0).into_iter().map(|z| z * s).collect(),
        w: dec.v.column(0).into_iter().map(|z| z.conj()).collect(),
    })
}

/// One 2×2 minor of a coefficient matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minor {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub value: C64,
}

#[derive(Clone, Debug)]
pub struct MinorSystem {
    pub minors: Vec<Minor>,
    /// Σ |minor|².
    pub residual: f64,
}

impl MinorSystem {
    pub fn get(&self, rows: (usize, usize), cols: (usize, usize)) -> Option<C64> {
        self.minors
            .iter()
            .find(|m| m.rows == rows && m.cols == cols)
            .map(|m| m.value)
    }
}

fn index_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn minors_of(a: &ComplexMatrix) -> Vec<Minor> {
    let rows = index_pairs(a.rows());
    let cols = index_pairs(a.cols());
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for &(r1, r2) in &rows {
        for &(c1, c2) in &cols {
            out.push(Minor {
                rows: (r1, r2),
                cols: (c1, c2),
                value: a[(r1, c1)] * a[(r2, c2)] - a[(r1, c2)] * a[(r2, c1)],
            });
        }
    }
    out
}

fn minor_objective(a: &ComplexMatrix) -> f64 {
    minors_of(a).iter().map(|m| m.value.norm_sqr()).sum()
}

/// The nine 2×2 minors of the 3×3 coefficient matrix of `v` (not normalized).
/// All vanish exactly when `v` is a product vector.
pub fn rank1_minor_system(v: &[C64]) -> Result<MinorSystem> {
    if norm(v) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let minors = minors_of(&coefficient_matrix(v, 3, 3)?);
    let residual = minors.iter().map(|m| m.value.norm_sqr()).sum();
    Ok(MinorSystem { minors, residual })
}

fn pencil_rows(basis: &[Vec<C64>]) -> (ComplexMatrix, ComplexMatrix) {
    let mut x = ComplexMatrix::zeros(3, 3);
    let mut y = ComplexMatrix::zeros(3, 3);
    for (k, v) in basis.iter().enumerate() {
        for j in 0..3 {
            x[(k, j)] = v[j].conj();
            y[(k, j)] = v[3 + j].conj();
        }
    }
    (x, y)
}

fn pencil_candidate(x: &ComplexMatrix, y: &ComplexMatrix, m: C64, n: C64, span: &[Vec<C64>]) -> Result<ProductVectorResult> {
    let s = (m.norm_sqr() + n.norm_sqr()).sqrt();
    let (m, n) = (m / s, n / s);
    let pencil = &x.scale(m) + &y.scale(n);
    let dec = svd(&pencil)?;
    let w = dec.v.column(2);
    let v = kron_vec(&[m, n], &w);
    let inside = crate::linalg::component_inside(span, &v);
    ProductVectorResult::from_vector(v, 2, 3, inside)
}

/// Every root of the cubic pencil for product vectors (m|0⟩ + n|1⟩)⊗|w⟩
/// orthogonal to `vs` ⊂ C²⊗C³, best residual first.
pub fn pencil_candidates(vs: &[Vec<C64>]) -> Result<Vec<ProductVectorResult>> {
    if vs.len() > 3 {
        return Err(Error::DimensionMismatch(format!(
            "at most three vectors constrain the pencil, got {}",
            vs.len()
        )));
    }
    if let Some(v) = vs.iter().find(|v| v.len() != 6) {
        return Err(Error::DimensionMismatch(format!("vector of length {} is not in C2xC3", v.len())));
    }
    let span = orthonormal_span(vs, SPAN_TOL);
    let (x, y) = pencil_rows(&span);
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);

    let coeffs = det_pencil_coefficients(&x, &y)?;
    if span.len() < 3 || coeffs.iter().all(|c| c.norm() <= 1e-12) {
        let result = pencil_candidate(&x, &y, one, zero, &span)?;
        return Err(Error::DegeneratePencil(Box::new(result)));
    }

    // both chart origins join the roots: a multiple root from the companion
    // matrix is only accurate to a power of the machine epsilon
    let mut out = vec![
        pencil_candidate(&x, &y, one, zero, &span)?,
        pencil_candidate(&x, &y, zero, one, &span)?,
    ];
    for t in polynomial_roots(&coeffs, 2)? {
        out.push(pencil_candidate(&x, &y, t, one, &span)?);
    }
    out.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    Ok(out)
}

/// A product vector in C²⊗C³ orthogonal to the (at most three) vectors `vs`.
/// Fails with `DegeneratePencil`, carrying a valid vector, when every
/// direction (m:n) admits one.
pub fn product_vector_in_2x3_complement(vs: &[Vec<C64>]) -> Result<ProductVectorResult> {
    Ok(pencil_candidates(vs)?.swap_remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMode {
    /// Check |22⟩ and |01⟩ directly.
    ExactCases,
    /// Multi-start minimization of the minor objective over the kernel.
    Search,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub starts: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            starts: DEFAULT_STARTS,
            seed: 0,
        }
    }
}

pub fn kernel_product_vector(state: &QutritState, mode: KernelMode, opts: SearchOptions) -> Result<ProductVectorResult> {
    let (range, kernel) = range_kernel(state)?;
    if kernel.is_empty() {
        return Err(Error::EmptyKernel);
    }
    match mode {
        KernelMode::ExactCases => {
            let mut best = f64::INFINITY;
            for v in [ket(2, 2), ket(0, 1)] {
                let r = crate::linalg::component_inside(&range, &v);
                if r <= EXACT_TOL {
                    let mut res = ProductVectorResult::from_vector(v, 3, 3, r)?;
                    res.found = true;
                    res.evidence_level = EvidenceLevel::Certified;
                    return Ok(res);
                }
                best = best.min(r);
            }
            Ok(ProductVectorResult::not_found(best, None))
        }
        KernelMode::Search => search_product_vector(&Subspace::new(3, 3, &kernel)?, opts),
    }
}

struct MinorProblem {
    mats: Vec<ComplexMatrix>,
    dim_a: usize,
    dim_b: usize,
}

impl MinorProblem {
    fn combine(&self, c: &[C64]) -> ComplexMatrix {
        let mut a = ComplexMatrix::zeros(self.dim_a, self.dim_b);
        for (k, ck) in self.mats.iter().zip(c) {
            a = &a + &k.scale(*ck);
        }
        a
    }

    /// Real residual vector [Re minors, Im minors, ‖c‖² − 1] and its Jacobian
    /// with respect to [Re c, Im c]. The minors are holomorphic in c.
    fn residual_and_jacobian(&self, z: &[f64]) -> (Vec<f64>, ComplexMatrix) {
        let d = self.mats.len();
        let c: Vec<C64> = (0..d).map(|j| c64(z[j], z[d + j])).collect();
        let a = self.combine(&c);
        let rows = index_pairs(self.dim_a);
        let cols = index_pairs(self.dim_b);
        let nm = rows.len() * cols.len();
        let mut r = vec![0.0; 2 * nm + 1];
        let mut jac = ComplexMatrix::zeros(2 * nm + 1, 2 * d);
        let mut k = 0;
        for &(r1, r2) in &rows {
            for &(c1, c2) in &cols {
                let m = a[(r1, c1)] * a[(r2, c2)] - a[(r1, c2)] * a[(r2, c1)];
                r[k] = m.re;
                r[nm + k] = m.im;
                for (j, kj) in self.mats.iter().enumerate() {
                    let g = kj[(r1, c1)] * a[(r2, c2)] + a[(r1, c1)] * kj[(r2, c2)]
                        - kj[(r1, c2)] * a[(r2, c1)]
                        - a[(r1, c2)] * kj[(r2, c1)];
                    jac[(k, j)] = c64(g.re, 0.0);
                    jac[(k, d + j)] = c64(-g.im, 0.0);
                    jac[(nm + k, j)] = c64(g.im, 0.0);
                    jac[(nm + k, d + j)] = c64(g.re, 0.0);
                }
                k += 1;
            }
        }
        r[2 * nm] = z.iter().map(|t| t * t).sum::<f64>() - 1.0;
        for (j, t) in z.iter().enumerate() {
            jac[(2 * nm, j)] = c64(2.0 * t, 0.0);
        }
        (r, jac)
    }

    fn cost(&self, z: &[f64]) -> f64 {
        self.residual_and_jacobian(z).0.iter().map(|t| t * t).sum()
    }

    fn objective(&self, c: &[C64]) -> f64 {
        let n = norm(c);
        let unit: Vec<C64> = c.iter().map(|z| z / n).collect();
        minor_objective(&self.combine(&unit))
    }

    fn levenberg_marquardt(&self, mut z: Vec<f64>) -> Vec<f64> {
        let n = z.len();
        let mut mu = 1e-3;
        let (mut r, mut jac) = self.residual_and_jacobian(&z);
        let mut cost: f64 = r.iter().map(|t| t * t).sum();
        for _ in 0..200 {
            if cost < 1e-32 {
                break;
            }
            let jt = jac.transpose();
            let jtj = jt.matmul(&jac).expect("shapes");
            let rc: Vec<C64> = r.iter().map(|&t| c64(t, 0.0)).collect();
            let g = jt.matvec(&rc).expect("shapes");
            let mut accepted = false;
            while mu < 1e12 {
                let mut lhs = jtj.clone();
                for i in 0..n {
                    lhs[(i, i)] += c64(mu, 0.0);
                }
                let rhs: Vec<C64> = g.iter().map(|v| -v).collect();
                let Ok(step) = solve(&lhs, &rhs) else {
                    mu *= 4.0;
                    continue;
                };
                let cand: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a + s.re).collect();
                let c = self.cost(&cand);
                if c < cost {
                    let small = step.iter().map(|s| s.re.abs()).fold(0.0, f64::max) < 1e-16;
                    z = cand;
                    cost = c;
                    mu = (mu / 3.0).max(1e-15);
                    accepted = !small;
                    break;
                }
                mu *= 4.0;
            }
            if !accepted {
                break;
            }
            (r, jac) = self.residual_and_jacobian(&z);
        }
        z
    }
}

/// Minimize Σ|2×2 minors|² over unit vectors of `subspace` from
/// `opts.starts` seeded random starts. Found when the objective drops below
/// `FOUND_OBJECTIVE`; otherwise the best value is reported.
pub fn search_product_vector(subspace: &Subspace, opts: SearchOptions) -> Result<ProductVectorResult> {
    let (dim_a, dim_b) = subspace.dims();
    let d = subspace.dim();
    if d == 0 {
        return Err(Error::EmptyKernel);
    }
    let problem = MinorProblem {
        mats: subspace
            .basis()
            .iter()
            .map(|v| coefficient_matrix(v, dim_a, dim_b))
            .collect::<Result<_>>()?,
        dim_a,
        dim_b,
    };
    let starts = opts.starts.max(1);
    let runs: Vec<(f64, Vec<C64>)> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let z0: Vec<f64> = (0..2 * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = z0.iter().map(|t| t * t).sum::<f64>().sqrt();
            let z = problem.levenberg_marquardt(z0.iter().map(|t| t / s).collect());
            let c: Vec<C64> = (0..d).map(|j| c64(z[j], z[d + j])).collect();
            (problem.objective(&c), c)
        })
        .collect();
    let (best_f, best_c) = runs
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");

    let n = norm(&best_c);
    let mut v = vec![c64(0.0, 0.0); dim_a * dim_b];
    for (b, ck) in subspace.basis().iter().zip(&best_c) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += bi * (ck / n);
        }
    }
    if best_f < FOUND_OBJECTIVE {
        let dist = subspace.distance(&v);
        let mut res = ProductVectorResult::from_vector(v, dim_a, dim_b, dist)?;
        res.min_objective = Some(best_f);
        Ok(res)
    } else {
        Ok(ProductVectorResult::not_found(best_f + subspace.distance(&v), Some(best_f)))
    }
}

/// Range with a product vector |22⟩ in its kernel: |00⟩, |11⟩, |01⟩+|10⟩, |02⟩+|20⟩, |12⟩+|21⟩.
pub fn range_case_i() -> Vec<Vec<C64>> {
    let b = SymBasis::standard();
    vec![ket(0, 0), ket(1, 1), b.e(1).to_vec(), b.e(3).to_vec(), b.e(2).to_vec()]
}

/// Range with the product vector |01⟩ in its kernel: |00⟩, |11⟩, |22⟩, |02⟩+|20⟩, |12⟩+|21⟩.
pub fn range_case_ii() -> Vec<Vec<C64>> {
    let b = SymBasis::standard();
    vec![ket(0, 0), ket(1, 1), ket(2, 2), b.e(3).to_vec(), b.e(2).to_vec()]
}

/// Σ_j √s_j |jj⟩, normalized.
pub fn diagonal_symmetric(s: [f64; 3]) -> Result<Vec<C64>> {
    let mut v = vec![c64(0.0, 0.0); 9];
    for (j, &sj) in s.iter().enumerate() {
        if !(sj >= 0.0) {
            return Err(Error::OutOfRange {
                name: "s",
                value: sj,
                range: "[0, inf)",
            });
        }
        v[4 * j] = c64(sj.sqrt(), 0.0);
    }
    normalize(&v)
}

/// Kernel spanned by the antisymmetric subspace and the symmetric vector `a`.
pub fn antisymmetric_plus(a: &[C64]) -> Result<Subspace> {
    let mut vs: Vec<Vec<C64>> = antisymmetric_basis().to_vec();
    vs.push(a.to_vec());
    Subspace::new(3, 3, &vs)
}

/// Rank-five state whose range is the symmetric subspace minus the symmetric
/// vector `a`, so its kernel is the antisymmetric subspace plus `a`.
pub fn symmetric_state_with_kernel_vector(a: &[C64]) -> Result<QutritState> {
    let a = normalize(a)?;
    let b = SymBasis::standard();
    let mut basis = vec![a];
    for v in [ket(0, 0), ket(1, 1), ket(2, 2)].iter().chain(b.vectors.iter()) {
        gram_schmidt_push(&mut basis, v.clone(), 1e-8);
    }
    QutritState::from_range(&basis[1..])
}

/// One sign branch of α² = −√(s₀s₁), β² = −√(s₁s₂), γ² = −√(s₀s₂).
#[derive(Clone, Debug)]
pub struct BranchCheck {
    pub signs: [i8; 3],
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    /// Largest modulus among the three minors the branch is built to annihilate.
    pub diagonal_minors: f64,
    /// Minor of rows {0, 2} × columns {0, 1}, computed from the matrix.
    pub minor_direct: C64,
    /// The same minor from −β√s₀ + αγ.
    pub minor_formula: C64,
    /// α²γ² − β²s₀, which equals 2 s₀ √(s₁s₂).
    pub squared_gap: C64,
}

/// Enumerate the eight branches of the rank-one conditions for the vector
/// α(|01⟩−|10⟩) + β(|12⟩−|21⟩) + γ(|02⟩−|20⟩) + Σ√s_j|jj⟩ and evaluate the
/// remaining minor, which stays nonzero whenever every s_j > 0.
pub fn converse_branch_check(s: [f64; 3]) -> Result<Vec<BranchCheck>> {
    for &sj in &s {
        if !(sj > 0.0) {
            return Err(Error::OutOfRange {
                name: "s",
                value: sj,
                range: "(0, inf)",
            });
        }
    }
    let i = c64(0.0, 1.0);
    let (r0, r1, r2) = (s[0].sqrt(), s[1].sqrt(), s[2].sqrt());
    let mut out = Vec::with_capacity(8);
    for mask in 0..8u8 {
        let sign = |bit: u8| if mask >> bit & 1 == 0 { 1i8 } else { -1i8 };
        let signs = [sign(0), sign(1), sign(2)];
        let alpha = i * (signs[0] as f64) * (s[0] * s[1]).powf(0.25);
        let beta = i * (signs[1] as f64) * (s[1] * s[2]).powf(0.25);
        let gamma = i * (signs[2] as f64) * (s[0] * s[2]).powf(0.25);
        let a = ComplexMatrix::from_rows(&[
            vec![c64(r0, 0.0), alpha, gamma],
            vec![-alpha, c64(r1, 0.0), beta],
            vec![-gamma, -beta, c64(r2, 0.0)],
        ])?;
        let system = rank1_minor_system(a.as_slice())?;
        let diagonal_minors = [((0, 1), (0, 1)), ((1, 2), (1, 2)), ((0, 2), (0, 2))]
            .iter()
            .map(|&(r, c)| system.get(r, c).expect("3x3 minor").norm())
            .fold(0.0, f64::max);
        out.push(BranchCheck {
            signs,
            alpha,
            beta,
            gamma,
            diagonal_minors,
            minor_direct: system.get((0, 2), (0, 1)).expect("3x3 minor"),
            minor_formula: -beta * r0 + alpha * gamma,
            squared_gap: alpha * alpha * gamma * gamma - beta * beta * s[0],
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExclusionVerdict {
    /// Whether span{|00⟩, |01⟩} lies in the range.
    pub contained: bool,
    #[serde(serialize_with = "ser_f64")]
    pub residual_00: f64,
    #[serde(serialize_with = "ser_f64")]
    pub residual_01: f64,
    /// Kernel product vector built from the range when contained.
    pub product_vector: Option<ProductVectorResult>,
    /// ‖ρ v‖ for that vector.
    #[serde(serialize_with = "ser_opt_f64")]
    pub annihilation: Option<f64>,
}

/// Test span{|00⟩, |01⟩} ⊆ 𝓡(ρ). When it holds, restrict a completing range
/// basis to A-levels {1, 2} and use the cubic pencil to produce a product
/// vector (m|1⟩ + n|2⟩)⊗|w⟩ in ker ρ.
pub fn span_0001_exclusion_check(state: &QutritState) -> Result<ExclusionVerdict> {
    let (range, _) = range_kernel(state)?;
    let r00 = residual_outside(&range, &ket(0, 0));
    let r01 = residual_outside(&range, &ket(0, 1));
    let contained = r00 <= SPAN_TOL && r01 <= SPAN_TOL;
    if !contained {
        return Ok(ExclusionVerdict {
            contained,
            residual_00: r00,
            residual_01: r01,
            product_vector: None,
            annihilation: None,
        });
    }
    let mut basis = vec![ket(0, 0), ket(0, 1)];
    for v in &range {
        gram_schmidt_push(&mut basis, v.clone(), 1e-8);
    }
    let restricted: Vec<Vec<C64>> = basis[2..].iter().map(|v| v[3..].to_vec()).collect();
    let pv = match product_vector_in_2x3_complement(&restricted) {
        Ok(r) => r,
        Err(Error::DegeneratePencil(r)) => *r,
        Err(e) => return Err(e),
    };
    let small = pv.vector.clone().expect("pencil returns a vector");
    let mut v = vec![c64(0.0, 0.0); 3];
    v.extend(small);
    let annihilation = norm(&state.rho().matvec(&v)?);
    let dist = residual_outside(&range_kernel(state)?.1, &v);
    let mut full = ProductVectorResult::from_vector(v, 3, 3, dist)?;
    full.found = full.found && pv.found;
    Ok(ExclusionVerdict {
        contained,
        residual_00: r00,
        residual_01: r01,
        product_vector: Some(full),
        annihilation: Some(annihilation),
    })
}

#[derive(Clone, Debug)]
pub struct Canonicalized {
    /// (W⊗W) ρ (W⊗W)†.
    pub state: ComplexMatrix,
    /// (W⊗W)|a⟩ = Σ_j s_j |jj⟩ for the normalized input.
    pub canonical: Vec<C64>,
    pub unitary: ComplexMatrix,
    pub singular_values: Vec<f64>,
    /// Largest off-diagonal modulus of the canonical coefficient matrix.
    pub diagonal_residual: f64,
}

/// Rotate a symmetric kernel vector of Schmidt rank at most two into the
/// diagonal form s₀|00⟩ + s₁|11⟩ by a product unitary W ⊗ W and apply the
/// same rotation to ρ.
pub fn takagi_canonicalize_kernel_state(a: &[C64], state: &QutritState) -> Result<Canonicalized> {
    let a = normalize(a)?;
    let swapped = swap_operator(3).matvec(&a)?;
    let sym = a.iter().zip(&swapped).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if sym > 1e-12 {
        return Err(Error::NotSymmetric { residual: sym });
    }
    let rank = schmidt_rank(&a, 3, 3, 1e-9)?;
    if rank > 2 {
        return Err(Error::SchmidtRankTooHigh(rank));
    }
    let leak = norm(&state.rho().matvec(&a)?);
    if leak > 1e-10 {
        return Err(Error::NotInKernel { residual: leak });
    }
    let t = takagi(&coefficient_matrix(&a, 3, 3)?)?;
    let w = t.unitary.adjoint();
    let ww = kron(&w, &w);
    let canonical = ww.matvec(&a)?;
    let diagonal_residual = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| canonical[3 * i + j].norm())
        .fold(0.0, f64::max);
    Ok(Canonicalized {
        state: ww.conjugate(state.rho())?,
        canonical,
        unitary: w,
        singular_values: t.singular_values,
        diagonal_residual,
    })
}
