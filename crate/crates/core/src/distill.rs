//! NPT detection, necessary conditions for one-copy undistillability, witness
//! search over rank-two projections on subsystem A, and bisection of the
//! spectral thresholds of the partial transpose in the family parameter.
//!
//! A witness is a 2×3 matrix R with orthonormal rows such that
//! (R⊗I) ρ^Γ (R†⊗I) has a negative eigenvalue. Its negative eigenvector φ
//! lifts to ψ = (R†⊗I)φ, a vector of Schmidt rank at most two with
//! ⟨ψ|ρ^Γ|ψ⟩ < 0.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{complex_pairs, ser_f64, ser_opt_f64};
use crate::kernel::{kernel_product_vector, KernelMode, SearchOptions};
use crate::linalg::{
    c64, classify, coefficient_matrix, default_zero_tol, det_pencil_coefficients, eig_hermitian, gram_schmidt_push,
    kron, matrix_rank, norm, polynomial_roots, svd, ComplexMatrix, Inertia, C64,
};
use crate::states::{build_family, example_k, schmidt_rank, FamilyCase, QutritState, QUTRIT};

pub const NPT_TOL: f64 = 1e-10;
pub const WITNESS_TOL: f64 = 1e-12;
pub const DEFAULT_BUDGET: usize = 2000;
pub const DEFAULT_STARTS: usize = 16;
pub const THRESHOLD_WIDTH: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvidenceLevel {
    /// Backed by an explicit, re-verified object.
    Certified,
    /// Nothing found within the search budget.
    Searched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjectionForm {
    /// |0⟩⟨0| + |1⟩(⟨1| + y⟨2|).
    Ay,
    /// Rows (1, a, 0), (0, 0, 1), in the K ⊗ K̄ frame.
    P1a,
    /// Rows (1, 0, b), (0, 1, c), in the K ⊗ K̄ frame.
    P2bc,
    #[serde(rename = "general")]
    General,
}

impl fmt::Display for ProjectionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ay => "Ay",
            Self::P1a => "P1a",
            Self::P2bc => "P2bc",
            Self::General => "general",
        })
    }
}

fn orthonormal_rows(rows: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rows.rows());
    for i in 0..rows.rows() {
        gram_schmidt_push(&mut basis, rows.row(i).to_vec(), 1e-12);
    }
    if basis.len() != rows.rows() {
        return Err(Error::DimensionMismatch(format!(
            "projection rows span dimension {}, expected {}",
            basis.len(),
            rows.rows()
        )));
    }
    ComplexMatrix::from_rows(&basis)
}

/// A rank-two map on subsystem A, given by two rows in C³.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTwoProjection {
    form: ProjectionForm,
    params: Vec<C64>,
}

impl RankTwoProjection {
    pub fn ay(y: C64) -> Self {
        Self {
            form: ProjectionForm::Ay,
            params: vec![y],
        }
    }

    pub fn p1(a: C64) -> Self {
        Self {
            form: ProjectionForm::P1a,
            params: vec![a],
        }
    }

    pub fn p2(b: C64, c: C64) -> Self {
        Self {
            form: ProjectionForm::P2bc,
            params: vec![b, c],
        }
    }

    /// Two rows of a 2×3 matrix; stored with orthonormalized rows.
    pub fn general(rows: &ComplexMatrix) -> Result<Self> {
        if rows.rows() != 2 || rows.cols() != QUTRIT {
            return Err(Error::DimensionMismatch(format!(
                "general projection needs a 2x3 matrix, got {}x{}",
                rows.rows(),
                rows.cols()
            )));
        }
        let on = orthonormal_rows(rows)?;
        Ok(Self {
            form: ProjectionForm::General,
            params: on.as_slice().to_vec(),
        })
    }

    /// A projection whose lifted vectors include u ⊗ w for every w: the first
    /// row is ū and the second completes it.
    pub fn containing(u: &[C64]) -> Result<Self> {
        let u = crate::linalg::normalize(u)?;
        let mut rows = vec![u.iter().map(|z| z.conj()).collect::<Vec<_>>()];
        let mut k = 0;
        while rows.len() < 2 {
            gram_schmidt_push(&mut rows, crate::linalg::basis_vector(QUTRIT, k), 1e-6);
            k += 1;
        }
        Self::general(&ComplexMatrix::from_rows(&rows)?)
    }

    pub fn form(&self) -> ProjectionForm {
        self.form
    }

    pub fn params(&self) -> &[C64] {
        &self.params
    }

    /// The two defining rows as written for each form.
    pub fn rows(&self) -> ComplexMatrix {
        let o = c64(0.0, 0.0);
        let l = c64(1.0, 0.0);
        let p = &self.params;
        let rows = match self.form {
            ProjectionForm::Ay => vec![vec![l, o, o], vec![o, l, p[0]]],
            ProjectionForm::P1a => vec![vec![l, p[0], o], vec![o, o, l]],
            ProjectionForm::P2bc => vec![vec![l, o, p[0]], vec![o, l, p[1]]],
            ProjectionForm::General => vec![p[..3].to_vec(), p[3..].to_vec()],
        };
        ComplexMatrix::from_rows(&rows).expect("2x3 rows")
    }

    /// The 3×3 operator with the rows above and a zero third row.
    pub fn operator(&self) -> ComplexMatrix {
        let r = self.rows();
        ComplexMatrix::from_fn(QUTRIT, QUTRIT, |i, j| if i < 2 { r[(i, j)] } else { c64(0.0, 0.0) })
    }

    /// Rows acting on the untransformed state. P₁ and P₂ are defined on
    /// (K⊗K̄)ρ(K⊗K̄)†, whose partial transpose is (K̄⊗K̄)ρ^Γ(Kᵀ⊗Kᵀ), so on
    /// ρ^Γ they act as P·K̄ (the K̄ on B does not change the spectrum).
    pub fn state_rows(&self) -> ComplexMatrix {
        match self.form {
            ProjectionForm::P1a | ProjectionForm::P2bc => {
                self.rows().matmul(&example_k().conj()).expect("2x3 times 3x3")
            }
            _ => self.rows(),
        }
    }

    /// Orthonormal rows spanning `state_rows`.
    pub fn isometry(&self) -> Result<ComplexMatrix> {
        orthonormal_rows(&self.state_rows())
    }

    fn key(&self) -> Vec<f64> {
        self.params.iter().flat_map(|z| [z.re, z.im]).collect()
    }
}

/// (R⊗I) Γ (R†⊗I) for a 2×3 matrix R.
pub fn projected_matrix(gamma: &ComplexMatrix, rows: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron(rows, &ComplexMatrix::identity(QUTRIT)).conjugate(gamma)
}

/// Smallest eigenvalue of the projected partial transpose and its eigenvector.
pub fn projected_min(gamma: &ComplexMatrix, rows: &ComplexMatrix) -> Result<(f64, Vec<C64>)> {
    let eig = eig_hermitian(&projected_matrix(gamma, rows)?)?;
    Ok((eig.eigenvalues[0], eig.vector(0)))
}

/// ψ = (R†⊗I)φ.
pub fn lift(rows: &ComplexMatrix, phi: &[C64]) -> Result<Vec<C64>> {
    kron(&rows.adjoint(), &ComplexMatrix::identity(QUTRIT)).matvec(phi)
}

/// ∂λ/∂R̄ for λ the smallest eigenvalue of (R⊗I)Γ(R†⊗I) with eigenvector φ:
/// G_{ia} = Σ_b conj((Γψ)_{ab}) φ_{ib}, ψ = (R†⊗I)φ. For a real direction D
/// the derivative is 2 Re Σ G_{ia} conj(D_{ia}).
pub fn projected_min_gradient(gamma: &ComplexMatrix, rows: &ComplexMatrix, phi: &[C64]) -> Result<ComplexMatrix> {
    let psi = lift(rows, phi)?;
    let gpsi = gamma.matvec(&psi)?;
    Ok(ComplexMatrix::from_fn(rows.rows(), QUTRIT, |i, a| {
        (0..QUTRIT).map(|b| gpsi[a * QUTRIT + b].conj() * phi[i * QUTRIT + b]).sum()
    }))
}

/// A re-verified rank-two witness.
#[derive(Clone, Debug)]
pub struct Witness {
    pub projection: RankTwoProjection,
    pub value: f64,
    /// Negative eigenvector of the projected 6×6 matrix.
    pub phi: Vec<C64>,
    /// Its lift to C³⊗C³; Schmidt rank at most two.
    pub psi: Vec<C64>,
}

/// Materialize `proj` on Γ and return a witness when its projected minimum
/// eigenvalue is below −`tol`.
pub fn certify(gamma: &ComplexMatrix, proj: &RankTwoProjection, tol: f64) -> Result<Option<Witness>> {
    let r = proj.isometry()?;
    let (value, phi) = projected_min(gamma, &r)?;
    if value >= -tol {
        return Ok(None);
    }
    let psi = lift(&r, &phi)?;
    Ok(Some(Witness {
        projection: proj.clone(),
        value,
        phi,
        psi,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub form: ProjectionForm,
    #[serde(serialize_with = "complex_pairs")]
    pub params: Vec<C64>,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Precondition {
    pub id: &'static str,
    pub holds: bool,
    /// False when the verdict rests on a finite search.
    pub exact: bool,
    pub detail: String,
}

/// Necessary conditions for an NPT two-qutrit state to be one-copy
/// undistillable. A failed item on an NPT state proves distillability.
#[derive(Clone, Debug, Serialize)]
pub struct PreconditionReport {
    pub items: Vec<Precondition>,
    pub all_hold: bool,
    pub distillable_by_necessity: bool,
    /// Vector of Schmidt rank ≤ 2 found in the negative subspace, if any.
    #[serde(skip)]
    pub low_rank_negative_vector: Option<Vec<C64>>,
}

impl PreconditionReport {
    pub fn get(&self, id: &str) -> Option<&Precondition> {
        self.items.iter().find(|p| p.id == id)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistillReport {
    pub is_npt: bool,
    pub inertia: Inertia,
    #[serde(serialize_with = "ser_f64")]
    pub min_eig_gamma: f64,
    pub negative_count: usize,
    pub preconditions: Option<PreconditionReport>,
    pub witness: Option<WitnessReport>,
    pub evidence_level: Option<EvidenceLevel>,
    /// Smallest projected eigenvalue seen by the search.
    #[serde(serialize_with = "ser_opt_f64")]
    pub best_value: Option<f64>,
    pub evaluations: usize,
    #[serde(skip)]
    pub certified: Option<Witness>,
}

/// Partial-transpose spectrum summary; no witness search.
pub fn npt_check(state: &QutritState) -> Result<DistillReport> {
    let eig = eig_hermitian(&state.partial_transpose())?;
    let rep = classify(&eig.eigenvalues, default_zero_tol(eig.spectral_norm()));
    let min = eig.eigenvalues[0];
    Ok(DistillReport {
        is_npt: min < -NPT_TOL,
        inertia: rep.inertia,
        min_eig_gamma: min,
        negative_count: rep.inertia.negative,
        preconditions: None,
        witness: None,
        evidence_level: None,
        best_value: None,
        evaluations: 0,
        certified: None,
    })
}

fn hermitian_rank(m: &ComplexMatrix) -> Result<usize> {
    let eig = eig_hermitian(m)?;
    let tol = default_zero_tol(eig.spectral_norm());
    Ok(eig.eigenvalues.iter().filter(|l| l.abs() > tol).count())
}

/// A vector of Schmidt rank at most two in span{n₁, n₂}: det of the
/// coefficient matrix of t·n₁ + n₂ is a cubic in t and always has a root.
fn low_rank_in_plane(n1: &[C64], n2: &[C64]) -> Result<(Vec<C64>, f64)> {
    let a1 = coefficient_matrix(n1, QUTRIT, QUTRIT)?;
    let a2 = coefficient_matrix(n2, QUTRIT, QUTRIT)?;
    let coeffs = det_pencil_coefficients(&a1, &a2)?;
    let mut cands: Vec<Vec<C64>> = vec![n1.to_vec(), n2.to_vec()];
    for t in polynomial_roots(&coeffs, 2)? {
        cands.push(n1.iter().zip(n2).map(|(a, b)| a * t + b).collect());
    }
    let mut best = (f64::INFINITY, Vec::new());
    for v in cands {
        let v = crate::linalg::normalize(&v)?;
        let s = *svd(&coefficient_matrix(&v, QUTRIT, QUTRIT)?)?.s.last().expect("3 values");
        if s < best.0 {
            best = (s, v);
        }
    }
    Ok((best.1, best.0))
}

/// Evaluate the necessary conditions. The negative-subspace check is exact:
/// for one negative direction it is the Schmidt rank of the eigenvector; for
/// two or more a Schmidt-rank-≤2 combination always exists and is exhibited.
/// The kernel check tries |22⟩ and |01⟩ first and then a seeded search.
pub fn precondition_report(state: &QutritState, kernel_opts: SearchOptions) -> Result<PreconditionReport> {
    let mut items = Vec::new();
    items.push(Precondition {
        id: "local_dimension",
        holds: QUTRIT > 2,
        exact: true,
        detail: format!("smaller local dimension {QUTRIT}"),
    });

    let rank = state.rank()?;
    items.push(Precondition {
        id: "rank_above_four",
        holds: rank > 4,
        exact: true,
        detail: format!("rank {rank}"),
    });

    let ra = hermitian_rank(&state.reduced_a())?;
    let rb = hermitian_rank(&state.reduced_b())?;
    items.push(Precondition {
        id: "rank_above_marginals",
        holds: rank > ra.max(rb),
        exact: true,
        detail: format!("rank {rank}, marginal ranks ({ra}, {rb})"),
    });

    let eig = eig_hermitian(&state.partial_transpose())?;
    let tol = default_zero_tol(eig.spectral_norm());
    let negatives: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] < -tol).collect();
    let mut low_rank = None;
    let (holds, detail) = match negatives.len() {
        0 => (true, "no negative eigenvalues".to_string()),
        1 => {
            let r = schmidt_rank(&eig.vector(negatives[0]), QUTRIT, QUTRIT, 1e-9)?;
            (r == 3, format!("single negative eigenvector has Schmidt rank {r}"))
        }
        n => {
            let (v, smin) = low_rank_in_plane(&eig.vector(negatives[0]), &eig.vector(negatives[1]))?;
            let value = state.partial_transpose().expectation(&v)?;
            let detail = format!(
                "{n} negative directions; combination with smallest Schmidt coefficient {smin:.3e} has expectation {value:.6e}"
            );
            low_rank = Some(v);
            (false, detail)
        }
    };
    items.push(Precondition {
        id: "negative_subspace_schmidt_rank",
        holds,
        exact: true,
        detail,
    });

    let (holds, exact, detail) = match kernel_product_vector(state, KernelMode::ExactCases, kernel_opts) {
        Err(Error::EmptyKernel) => (true, true, "kernel is empty".to_string()),
        Err(e) => return Err(e),
        Ok(r) if r.found => (false, true, format!("|22> or |01> in kernel (residual {:.3e})", r.residual)),
        Ok(_) => {
            let r = kernel_product_vector(state, KernelMode::Search, kernel_opts)?;
            if r.found {
                (false, true, format!("product vector found (residual {:.3e})", r.residual))
            } else {
                (
                    true,
                    false,
                    format!(
                        "none found from {} starts; min objective {:.3e}",
                        kernel_opts.starts,
                        r.min_objective.unwrap_or(f64::NAN)
                    ),
                )
            }
        }
    };
    items.push(Precondition {
        id: "kernel_product_vector",
        holds,
        exact,
        detail,
    });

    let inertia = classify(&eig.eigenvalues, tol).inertia;
    items.push(Precondition {
        id: "inertia_one_zero_eight",
        holds: inertia == Inertia::new(1, 0, 8),
        exact: true,
        detail: format!("inertia {inertia}"),
    });

    let all_hold = items.iter().all(|p| p.holds);
    let is_npt = eig.eigenvalues[0] < -NPT_TOL;
    Ok(PreconditionReport {
        items,
        all_hold,
        distillable_by_necessity: is_npt && !all_hold,
        low_rank_negative_vector: low_rank,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Log-polar grid over y, then coordinate descent.
    Ay,
    /// Grids over P₁(a) and P₂(b, c), then coordinate descent.
    Canonical,
    /// Multi-start projected gradient over 2×3 isometries.
    Stiefel,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "ay" => Ok(Self::Ay),
            "b" | "p" | "canonical" => Ok(Self::Canonical),
            "c" | "general" | "stiefel" => Ok(Self::Stiefel),
            other => Err(format!("unknown strategy '{other}', expected a, b or c")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ay => "a",
            Self::Canonical => "b",
            Self::Stiefel => "c",
        })
    }
}

/// Parse "a", "a+b", "a,b,c".
pub fn parse_strategies(s: &str) -> std::result::Result<Vec<Strategy>, String> {
    s.split(['+', ','])
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Eigensolves allowed per strategy.
    pub budget: usize,
    pub seed: u64,
    pub tol: f64,
    pub starts: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            seed: 0,
            tol: WITNESS_TOL,
            starts: DEFAULT_STARTS,
        }
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    proj: RankTwoProjection,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        match self.value.total_cmp(&other.value) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => {
                let (a, b) = (self.proj.key(), other.proj.key());
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .map_or(a.len() < b.len(), |o| o.is_lt())
            }
        }
    }
}

fn pick(a: Candidate, b: Candidate) -> Candidate {
    if b.better_than(&a) {
        b
    } else {
        a
    }
}

fn evaluate(gamma: &ComplexMatrix, proj: RankTwoProjection) -> Result<Candidate> {
    let (value, _) = projected_min(gamma, &proj.isometry()?)?;
    Ok(Candidate { value, proj })
}

fn evaluate_all(gamma: &ComplexMatrix, projs: Vec<RankTwoProjection>) -> Result<Option<Candidate>> {
    let evaluated: Vec<Candidate> = projs
        .into_par_iter()
        .map(|p| evaluate(gamma, p))
        .collect::<Result<_>>()?;
    Ok(evaluated.into_iter().reduce(pick))
}

/// {0} ∪ {r e^{iφ}}: `radii` log-spaced values in [lo, hi] times `phases`
/// equally spaced phases.
pub fn log_polar_grid(radii: usize, phases: usize, lo: f64, hi: f64) -> Vec<C64> {
    let mut out = vec![c64(0.0, 0.0)];
    for k in 0..radii {
        let t = if radii == 1 { 0.0 } else { k as f64 / (radii - 1) as f64 };
        let r = lo * (hi / lo).powf(t);
        for j in 0..phases {
            out.push(C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / phases as f64));
        }
    }
    out
}

fn to_complex(p: &[f64]) -> Vec<C64> {
    p.chunks(2).map(|c| c64(c[0], c[1])).collect()
}

/// Coordinate descent over the real and imaginary parts of the parameters.
fn coordinate_descent(
    gamma: &ComplexMatrix,
    start: Candidate,
    make: &dyn Fn(&[C64]) -> RankTwoProjection,
    budget: usize,
) -> Result<(Candidate, usize)> {
    let mut p: Vec<f64> = start.proj.key();
    let mut best = start;
    let mut used = 0;
    let mut h = 0.1 * p.iter().fold(0.1f64, |m, v| m.max(v.abs()));
    while used < budget && h > 1e-12 {
        let mut improved = false;
        'coords: for i in 0..p.len() {
            for sign in [1.0, -1.0] {
                if used >= budget {
                    break 'coords;
                }
                let mut q = p.clone();
                q[i] += sign * h;
                let cand = evaluate(gamma, make(&to_complex(&q)))?;
                used += 1;
                if cand.value < best.value {
                    best = cand;
                    p = q;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok((best, used))
}

struct Outcome {
    best: Option<Candidate>,
    used: usize,
    exhausted: bool,
}

fn grid_then_descent(
    gamma: &ComplexMatrix,
    grids: Vec<(Vec<RankTwoProjection>, &dyn Fn(&[C64]) -> RankTwoProjection)>,
    budget: usize,
) -> Result<Outcome> {
    let total: usize = grids.iter().map(|g| g.0.len()).sum();
    if budget < total {
        let all: Vec<RankTwoProjection> = grids.into_iter().flat_map(|g| g.0).take(budget).collect();
        return Ok(Outcome {
            best: evaluate_all(gamma, all)?,
            used: budget,
            exhausted: true,
        });
    }
    let mut remaining = budget - total;
    let mut used = total;
    let mut best: Option<Candidate> = None;
    let parts = grids.len();
    for (k, (grid, make)) in grids.into_iter().enumerate() {
        let Some(start) = evaluate_all(gamma, grid)? else { continue };
        let share = remaining / (parts - k);
        let (refined, spent) = coordinate_descent(gamma, start, make, share)?;
        remaining -= spent;
        used += spent;
        best = Some(match best {
            Some(b) => pick(b, refined),
            None => refined,
        });
    }
    Ok(Outcome {
        best,
        used,
        exhausted: false,
    })
}

fn random_isometry(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    loop {
        let m = ComplexMatrix::from_fn(2, QUTRIT, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        if let Ok(r) = orthonormal_rows(&m) {
            return r;
        }
    }
}

fn stiefel_descent(gamma: &ComplexMatrix, mut w: ComplexMatrix, budget: usize) -> Result<(f64, ComplexMatrix, usize)> {
    let (mut value, mut phi) = projected_min(gamma, &w)?;
    let mut used = 1;
    let mut t = 0.5;
    while used < budget && t > 1e-10 {
        let g = projected_min_gradient(gamma, &w, &phi)?;
        let step = &w - &g.scale_real(t);
        let Ok(cand) = orthonormal_rows(&step) else {
            t *= 0.5;
            continue;
        };
        let (v, p) = projected_min(gamma, &cand)?;
        used += 1;
        if v < value {
            value = v;
            phi = p;
            w = cand;
            t = (2.0 * t).min(4.0);
        } else {
            t *= 0.5;
        }
    }
    Ok((value, w, used))
}

fn stiefel(gamma: &ComplexMatrix, cfg: &SearchConfig) -> Result<Outcome> {
    let starts = cfg.starts.clamp(1, cfg.budget);
    let per = cfg.budget / starts;
    let runs: Vec<(Candidate, usize)> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let (value, w, used) = stiefel_descent(gamma, random_isometry(&mut rng), per)?;
            Ok((
                Candidate {
                    value,
                    proj: RankTwoProjection::general(&w)?,
                },
                used,
            ))
        })
        .collect::<Result<_>>()?;
    let used = runs.iter().map(|r| r.1).sum();
    Ok(Outcome {
        best: runs.into_iter().map(|r| r.0).reduce(pick),
        used,
        exhausted: false,
    })
}

fn run_strategy(gamma: &ComplexMatrix, strategy: Strategy, cfg: &SearchConfig) -> Result<Outcome> {
    match strategy {
        Strategy::Ay => {
            let grid = log_polar_grid(16, 32, 1e-2, 1e2).into_iter().map(RankTwoProjection::ay).collect();
            grid_then_descent(gamma, vec![(grid, &|p: &[C64]| RankTwoProjection::ay(p[0]))], cfg.budget)
        }
        Strategy::Canonical => {
            let p1 = log_polar_grid(16, 32, 1e-2, 1e2).into_iter().map(RankTwoProjection::p1).collect();
            let axis = log_polar_grid(5, 6, 1e-1, 1e1);
            let p2 = axis
                .iter()
                .flat_map(|&b| axis.iter().map(move |&c| RankTwoProjection::p2(b, c)))
                .collect();
            grid_then_descent(
                gamma,
                vec![
                    (p1, &|p: &[C64]| RankTwoProjection::p1(p[0])),
                    (p2, &|p: &[C64]| RankTwoProjection::p2(p[0], p[1])),
                ],
                cfg.budget,
            )
        }
        Strategy::Stiefel => stiefel(gamma, cfg),
    }
}

/// Search for a rank-two witness with each strategy in turn, stopping at the
/// first success. Fails with `BudgetExhausted` (carrying the partial report)
/// when the budget cannot cover a strategy's initial grid.
pub fn witness_search(state: &QutritState, strategies: &[Strategy], cfg: &SearchConfig) -> Result<DistillReport> {
    if cfg.budget == 0 {
        return Err(Error::OutOfRange {
            name: "budget",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let gamma = state.partial_transpose();
    let mut report = npt_check(state)?;
    let mut best: Option<Candidate> = None;
    let mut exhausted = false;
    for &s in strategies {
        let out = run_strategy(&gamma, s, cfg)?;
        report.evaluations += out.used;
        if let Some(c) = out.best {
            best = Some(match best {
                Some(b) => pick(b, c),
                None => c,
            });
        }
        if out.exhausted {
            exhausted = true;
            break;
        }
        if best.as_ref().is_some_and(|b| b.value < -cfg.tol) {
            break;
        }
    }
    report.best_value = best.as_ref().map(|b| b.value);
    if let Some(b) = &best {
        if let Some(w) = certify(&gamma, &b.proj, cfg.tol)? {
            report.witness = Some(WitnessReport {
                form: w.projection.form(),
                params: w.projection.params().to_vec(),
                value: w.value,
            });
            report.certified = Some(w);
        }
    }
    report.evidence_level = Some(if report.witness.is_some() {
        EvidenceLevel::Certified
    } else {
        EvidenceLevel::Searched
    });
    if exhausted && report.witness.is_none() {
        return Err(Error::BudgetExhausted(Box::new(report)));
    }
    Ok(report)
}

/// Witness search followed by the precondition checklist.
pub fn analyze(state: &QutritState, strategies: &[Strategy], cfg: &SearchConfig) -> Result<DistillReport> {
    let mut report = witness_search(state, strategies, cfg)?;
    report.preconditions = Some(precondition_report(
        state,
        SearchOptions {
            starts: crate::kernel::DEFAULT_STARTS,
            seed: cfg.seed,
        },
    )?);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdTarget {
    MinEigenvalue,
    SecondEigenvalue,
}

impl FromStr for ThresholdTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "min" | "min-eig" | "min_eigenvalue" => Ok(Self::MinEigenvalue),
            "second" | "second-eig" | "second_eigenvalue" => Ok(Self::SecondEigenvalue),
            other => Err(format!("unknown target '{other}', expected min-eig or second-eig")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    pub case: FamilyCase,
    pub target: ThresholdTarget,
    #[serde(serialize_with = "ser_f64")]
    pub x_star: f64,
    pub bracket: (crate::format::Sig17, crate::format::Sig17),
    pub iterations: usize,
}

/// Smallest or second-smallest eigenvalue of ρ^Γ for the family state.
pub fn gamma_eigenvalue(case: FamilyCase, x: f64, target: ThresholdTarget) -> Result<f64> {
    let ev = crate::linalg::eigvals_hermitian(&build_family(case, x)?.partial_transpose())?;
    Ok(match target {
        ThresholdTarget::MinEigenvalue => ev[0],
        ThresholdTarget::SecondEigenvalue => ev[1],
    })
}

/// Bisect the target eigenvalue to a bracket of width ≤ 1e-9. The ends must
/// have strictly opposite signs.
pub fn find_threshold(case: FamilyCase, target: ThresholdTarget, bracket: (f64, f64)) -> Result<ThresholdResult> {
    let (mut lo, mut hi) = bracket;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(Error::OutOfRange {
            name: "bracket",
            value: if (0.0..=1.0).contains(&lo) { hi } else { lo },
            range: "0 <= lo < hi <= 1",
        });
    }
    let mut f_lo = gamma_eigenvalue(case, lo, target)?;
    let f_hi = gamma_eigenvalue(case, hi, target)?;
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut iterations = 0;
    while hi - lo > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        let f_mid = gamma_eigenvalue(case, mid, target)?;
        iterations += 1;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        case,
        target,
        x_star: 0.5 * (lo + hi),
        bracket: (crate::format::Sig17(lo), crate::format::Sig17(hi)),
        iterations,
    })
}

/// Rank of a 2×3 row matrix, for checking that a projection has rank two.
pub fn projection_rank(proj: &RankTwoProjection) -> Result<usize> {
    matrix_rank(&proj.state_rows(), None)
}

/// ⟨ψ|Γ|ψ⟩ / ⟨ψ|ψ⟩ for a lifted witness vector.
pub fn lifted_expectation(gamma: &ComplexMatrix, psi: &[C64]) -> Result<f64> {
    Ok(gamma.expectation(psi)? / norm(psi).powi(2))
}
