//! Random test data shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{ComplexMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(r: &mut impl Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_vector(r: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_c64(r)).collect()
}

pub fn random_matrix(r: &mut impl Rng, m: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, n, |_, _| random_c64(r))
}

/// Random unitary from the QR of a random matrix.
pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = random_matrix(r, n, n);
    crate::qr::qr_col_pivoted(&a, &crate::qr::RankOptions::rel_diag(0.0)).q
}

/// Scale each row by `10^u` with `u` uniform in `[-decades/2, decades/2]`.
pub fn grade_rows(a: &ComplexMatrix, r: &mut impl Rng, decades: f64) -> ComplexMatrix {
    let s: Vec<f64> = (0..a.rows())
        .map(|_| 10f64.powf(r.gen_range(-decades / 2.0..=decades / 2.0)))
        .collect();
    ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * s[i])
}

pub fn random_rank(r: &mut impl Rng, m: usize, n: usize, k: usize) -> ComplexMatrix {
    random_matrix(r, m, k).matmul(&random_matrix(r, k, n))
}
