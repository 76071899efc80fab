//! Independent oracles for the integration tests. Dense linear algebra here
//! goes through nalgebra, never through the crate under test.
#![allow(dead_code)]

use kvadeig::linearization::QuadPencil;
use kvadeig::{ComplexMatrix, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_na(a: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

pub fn from_na(a: &DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn random_c64(r: &mut impl Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_matrix(r: &mut impl Rng, m: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, n, |_, _| random_c64(r))
}

/// Unitary factor of a nalgebra QR of a random matrix.
pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    from_na(&to_na(&random_matrix(r, n, n)).qr().q())
}

pub fn random_rank(r: &mut impl Rng, n: usize, k: usize) -> ComplexMatrix {
    random_matrix(r, n, k).matmul(&random_matrix(r, k, n))
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return vec![];
    }
    to_na(a)
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Number of singular values at most `tol`, plus the rank deficit of a
/// rectangular shape.
pub fn nullity(a: &ComplexMatrix, tol: f64) -> usize {
    let s = singular_values(a);
    a.cols() - s.iter().filter(|&&x| x > tol).count()
}

pub fn inverse(a: &ComplexMatrix) -> ComplexMatrix {
    from_na(&to_na(a).try_inverse().expect("invertible"))
}

/// Eigenvalues of a square matrix from nalgebra's complex Schur form.
pub fn eigenvalues(a: &ComplexMatrix) -> Vec<C64> {
    to_na(a)
        .schur()
        .eigenvalues()
        .expect("triangular Schur form")
        .iter()
        .copied()
        .collect()
}

/// Greedy nearest matching of two multisets; the worst distance relative to
/// `max(|x|, 1)`.
pub fn multiset_gap(x: &[C64], y: &[C64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    let mut left = y.to_vec();
    let mut worst: f64 = 0.0;
    for v in x {
        let (pos, d) = left
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (v - w).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        worst = worst.max(d / v.norm().max(1.0));
        left.remove(pos);
    }
    worst
}

/// Strictly relative version, for values bounded away from zero.
pub fn multiset_gap_rel(x: &[C64], y: &[C64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    let mut left = y.to_vec();
    let mut worst: f64 = 0.0;
    for v in x {
        let (pos, d) = left
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (v - w).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        worst = worst.max(d / v.norm());
        left.remove(pos);
    }
    worst
}

pub fn triple(m: ComplexMatrix, cm: ComplexMatrix, k: ComplexMatrix) -> QuadPencil {
    QuadPencil::new(m, cm, k).expect("valid triple")
}

/// `(U M V, U C V, U K V)`.
pub fn scramble(p: &QuadPencil, u: &ComplexMatrix, v: &ComplexMatrix) -> QuadPencil {
    let f = |a: &ComplexMatrix| u.matmul(a).matmul(v);
    triple(f(p.m()), f(p.c()), f(p.k()))
}

/// Finite eigenvalues of a random-dense QEP through the companion matrix
/// `[0 I; -M⁻¹K -M⁻¹C]` (requires M invertible).
pub fn qep_eigenvalues_regular_m(p: &QuadPencil) -> Vec<C64> {
    let n = p.n();
    let mi = inverse(p.m());
    let mut comp = ComplexMatrix::zeros(2 * n, 2 * n);
    comp.set_block(0, n, &ComplexMatrix::identity(n));
    comp.set_block(n, 0, &mi.matmul(p.k()).scale_real(-1.0));
    comp.set_block(n, n, &mi.matmul(p.c()).scale_real(-1.0));
    eigenvalues(&comp)
}

/// Random roots with modulus in `[lo, hi]`.
pub fn random_roots(r: &mut impl Rng, count: usize, lo: f64, hi: f64) -> Vec<C64> {
    (0..count)
        .map(|_| C64::from_polar(r.gen_range(lo..hi), r.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}
