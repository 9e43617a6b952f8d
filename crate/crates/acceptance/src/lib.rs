//! Seeded random instances for the acceptance suite.
//!
//! Every generator takes the RNG explicitly, so a suite is reproduced by its
//! seed alone.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qdistill::linalg::{c64, gram_schmidt_push, ComplexMatrix};
use qdistill::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in [−1, 1].
pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n);
    ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n);
    ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * 0.5)
}

/// Gram-Schmidt on random columns.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        gram_schmidt_push(&mut cols, random_vector(rng, n), 1e-6);
    }
    ComplexMatrix::from_columns(&cols).expect("square")
}

/// Q diag(λ) Q† for a random unitary Q.
pub fn hermitian_with_spectrum(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> ComplexMatrix {
    let q = random_unitary(rng, eigenvalues.len());
    q.conjugate(&ComplexMatrix::from_diag_real(eigenvalues)).expect("square")
}

/// Three weights, each uniform in [lo, 1).
pub fn random_weights(rng: &mut ChaCha8Rng, lo: f64) -> [f64; 3] {
    std::array::from_fn(|_| rng.gen_range(lo..1.0))
}
