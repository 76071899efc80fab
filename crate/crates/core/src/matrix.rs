//! Dense complex matrices stored column-major, plus permutations.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest dimension for which `norm2` runs power iteration instead of
/// returning the Frobenius bound.
pub const SPECTRAL_NORM_MAX_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Build from column-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(p) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: p % rows.max(1),
                col: p / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from row-major data, rejecting non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        let mut out = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                out.push(data[i * cols + j]);
            }
        }
        Self::new(rows, cols, out)
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = if m == 0 { 0 } else { rows[0].len() };
        Self::from_fn(m, n, |i, j| {
            assert_eq!(rows[i].len(), n, "ragged rows");
            C64::new(rows[i][j], 0.0)
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in oc.iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                let ac = &self.data[k * self.rows..(k + 1) * self.rows];
                for (d, &a) in dst.iter_mut().zip(ac) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self* · other` without forming the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_matmul dimension mismatch");
        Self::from_fn(self.cols, other.cols, |i, j| {
            self.col(i)
                .iter()
                .zip(other.col(j))
                .map(|(a, b)| a.conj() * b)
                .sum()
        })
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len(), "mul_vec dimension mismatch");
        let mut y = vec![ZERO; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `self* · x`.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, x.len(), "adjoint_mul_vec dimension mismatch");
        (0..self.cols)
            .map(|j| self.col(j).iter().zip(x).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }

    /// `|self| · v` for a nonnegative vector `v`.
    pub fn abs_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "abs_mul_vec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            for (yi, a) in y.iter_mut().zip(self.col(j)) {
                *yi += a.norm() * vj;
            }
        }
        y
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(
            r0 + nr <= self.rows && c0 + nc <= self.cols,
            "block out of range"
        );
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Self) {
        assert!(
            r0 + m.rows <= self.rows && c0 + m.cols <= self.cols,
            "set_block out of range"
        );
        for j in 0..m.cols {
            for i in 0..m.rows {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    pub fn fill_block(&mut self, r0: usize, c0: usize, nr: usize, nc: usize, v: C64) {
        for j in c0..c0 + nc {
            for i in r0..r0 + nr {
                self[(i, j)] = v;
            }
        }
    }

    /// `[a 0; 0 b]`.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let mut m = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        m.set_block(0, 0, a);
        m.set_block(a.rows, a.cols, b);
        m
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(j * self.rows + a, j * self.rows + b);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(a * self.rows + i, b * self.rows + i);
        }
    }

    pub fn norm_fro(&self) -> f64 {
        hypot_all(self.data.iter().copied())
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row_abs_sum(i))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn row_inf_norm(&self, i: usize) -> f64 {
        (0..self.cols)
            .map(|j| self[(i, j)].norm())
            .fold(0.0, f64::max)
    }

    fn row_abs_sum(&self, i: usize) -> f64 {
        (0..self.cols).map(|j| self[(i, j)].norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    /// Spectral norm by power iteration on `A*A` (relative tolerance 1e-10)
    /// when both dimensions are at most [`SPECTRAL_NORM_MAX_DIM`]; the
    /// Frobenius norm otherwise.
    pub fn norm2(&self) -> f64 {
        if self.rows.max(self.cols) > SPECTRAL_NORM_MAX_DIM {
            return self.norm_fro();
        }
        if self.is_empty() || self.is_zero() {
            return 0.0;
        }
        let fro = self.norm_fro();
        let a = self.scale_real(1.0 / fro);
        // Deterministic start that is unlikely to be orthogonal to anything.
        let mut v: Vec<C64> = (0..self.cols)
            .map(|i| C64::new(1.0 + 0.37 * i as f64, 0.11 * (i as f64 + 1.0).sqrt()))
            .collect();
        normalize(&mut v);
        let mut est = 0.0f64;
        for it in 0..2000 {
            let w = a.mul_vec(&v);
            let s = vec_norm(&w);
            if s == 0.0 {
                // Start vector annihilated; fall back to the largest column.
                let j = (0..self.cols)
                    .max_by(|&x, &y| vec_norm(a.col(x)).total_cmp(&vec_norm(a.col(y))))
                    .unwrap();
                v = vec![ZERO; self.cols];
                v[j] = ONE;
                continue;
            }
            let mut u = a.adjoint_mul_vec(&w);
            let un = vec_norm(&u);
            let new_est = (un / s).max(s);
            for z in u.iter_mut() {
                *z /= un;
            }
            v = u;
            if it > 1 && (new_est - est).abs() <= 1e-10 * new_est {
                est = new_est;
                break;
            }
            est = new_est;
        }
        // ‖A v‖ for the final unit vector is a guaranteed lower bound.
        let lower = vec_norm(&a.mul_vec(&v));
        est.max(lower).min(1.0) * fro
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖self* self − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint_matmul(self);
        (&g - &Self::identity(self.cols)).norm_fro()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Overflow-safe 2-norm of a sequence of complex numbers.
pub(crate) fn hypot_all(it: impl Iterator<Item = C64>) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for z in it {
        for t in [z.re.abs(), z.im.abs()] {
            if t != 0.0 {
                if scale < t {
                    ssq = 1.0 + ssq * (scale / t) * (scale / t);
                    scale = t;
                } else {
                    ssq += (t / scale) * (t / scale);
                }
            }
        }
    }
    scale * ssq.sqrt()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    hypot_all(v.iter().copied())
}

pub(crate) fn normalize(v: &mut [C64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Scale to unit 2-norm and rotate so the first nonzero entry is real
/// positive. Returns `None` for the zero vector.
pub fn normalize_phase(v: &[C64]) -> Option<Vec<C64>> {
    let n = vec_norm(v);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    let first = v.iter().copied().find(|z| *z != ZERO)?;
    let phase = first.conj() / first.norm();
    Some(v.iter().map(|z| z * phase / n).collect())
}

/// A permutation `Π` acting as column selection: `Π e_j = e_{perm[j]}`.
/// So `A Π` has column `j` equal to column `perm[j]` of `A`, and `Πᵀ A`
/// has row `i` equal to row `perm[i]` of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    /// Panics if `perm` is not a permutation of `0..len`.
    pub fn from_vec(perm: Vec<usize>) -> Self {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            assert!(p < perm.len() && !seen[p], "not a permutation");
            seen[p] = true;
        }
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.perm.swap(a, b);
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Self { perm: inv }
    }

    /// The matrix `Π`.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.perm.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (j, &p) in self.perm.iter().enumerate() {
            m[(p, j)] = ONE;
        }
        m
    }

    /// `A Π`.
    pub fn permute_cols(&self, a: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(a.cols(), self.len());
        ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, self.perm[j])])
    }

    /// `Πᵀ A`.
    pub fn permute_rows(&self, a: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(a.rows(), self.len());
        ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(self.perm[i], j)])
    }

    /// `Π A`.
    pub fn left_mul(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.inverse().permute_rows(a)
    }

    /// `Π x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; x.len()];
        for (j, &p) in self.perm.iter().enumerate() {
            y[p] = x[j];
        }
        y
    }

    /// `Πᵀ x`.
    pub fn apply_transpose(&self, x: &[C64]) -> Vec<C64> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    /// `Π ⊕ Σ`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.len();
        let mut perm = self.perm.clone();
        perm.extend(other.perm.iter().map(|p| p + n));
        Self { perm }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn rejects_non_finite_entries() {
        let e = ComplexMatrix::new(1, 2, vec![c(1.0), C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(e, Error::NonFinite { row: 0, col: 1 });
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0)]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let m = ComplexMatrix::from_row_major(2, 3, &[c(1.), c(2.), c(3.), c(4.), c(5.), c(6.)])
            .unwrap();
        assert_eq!(m[(0, 2)], c(3.0));
        assert_eq!(m[(1, 0)], c(4.0));
        assert_eq!(m.row(1), vec![c(4.), c(5.), c(6.)]);
    }

    #[test]
    fn permutation_conventions() {
        let a = ComplexMatrix::from_real_rows(&[&[1., 2., 3.], &[4., 5., 6.]]);
        let p = Permutation::from_vec(vec![2, 0, 1]);
        assert_eq!(p.permute_cols(&a), a.matmul(&p.matrix()));
        let q = Permutation::from_vec(vec![1, 0]);
        assert_eq!(q.permute_rows(&a), q.matrix().transpose().matmul(&a));
        let x = vec![c(1.), c(2.), c(3.)];
        assert_eq!(p.apply(&x), p.matrix().mul_vec(&x));
        assert_eq!(p.apply_transpose(&p.apply(&x)), x);
        assert_eq!(p.inverse().matrix(), p.matrix().transpose());
    }

    #[test]
    fn spectral_norm_of_known_matrices() {
        let d = ComplexMatrix::from_diag(&[c(3.0), c(-5.0), c(1.0)]);
        assert!((d.norm2() - 5.0).abs() < 1e-9);
        let r1 = ComplexMatrix::from_real_rows(&[&[1., 1.], &[1., 1.]]);
        assert!((r1.norm2() - 2.0).abs() < 1e-9);
        assert_eq!(ComplexMatrix::zeros(3, 3).norm2(), 0.0);
    }

    #[test]
    fn normalize_phase_makes_first_entry_real() {
        let v = normalize_phase(&[ZERO, C64::new(0.0, 2.0), c(2.0)]).unwrap();
        assert!((vec_norm(&v) - 1.0).abs() < 1e-15);
        assert_eq!(v[1].im, 0.0);
        assert!(v[1].re > 0.0);
        assert!(normalize_phase(&[ZERO, ZERO]).is_none());
    }
}
