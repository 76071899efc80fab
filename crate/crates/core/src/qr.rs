//! Householder QR with column pivoting, optional row presorting, and
//! numerical rank decisions.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Permutation, C64, ZERO};

/// Rank trigger applied to the diagonal of a pivoted triangular factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankStrategy {
    /// `|R[k,k]| <= tau * |R[k-1,k-1]|`.
    RelDiag,
    /// `|R[k,k]| <= tau * ‖A‖_F`.
    AbsMatrixNorm,
    /// `|R[k,k]| <= tau * global_norm`, where `global_norm` is
    /// `max(‖M‖_F, ‖C‖_F, ‖K‖_F)` of the quadratic problem being solved.
    GlobalTripleNorm { global_norm: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOptions {
    pub strategy: RankStrategy,
    pub tau: f64,
    pub presort_rows: bool,
}

impl RankOptions {
    pub fn rel_diag(tau: f64) -> Self {
        Self {
            strategy: RankStrategy::RelDiag,
            tau,
            presort_rows: true,
        }
    }

    pub fn abs_matrix_norm(tau: f64) -> Self {
        Self {
            strategy: RankStrategy::AbsMatrixNorm,
            tau,
            presort_rows: true,
        }
    }

    pub fn global_triple_norm(tau: f64, global_norm: f64) -> Self {
        Self {
            strategy: RankStrategy::GlobalTripleNorm { global_norm },
            tau,
            presort_rows: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidOptions(format!(
                "tau must be finite and >= 0, got {}",
                self.tau
            )));
        }
        if let RankStrategy::GlobalTripleNorm { global_norm } = self.strategy {
            if !(global_norm > 0.0) || !global_norm.is_finite() {
                return Err(Error::InvalidOptions(
                    "GlobalTripleNorm requires a positive global_norm".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `Π_rᵀ A Π_c = Q R` with `Q` unitary (m×m) and `R` upper trapezoidal
/// (min(m,n)×n).
#[derive(Clone, Debug)]
pub struct PivotedQR {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    pub col_perm: Permutation,
    pub row_perm: Permutation,
    pub diag_abs: Vec<f64>,
    /// Frobenius norm of the factored matrix.
    pub a_norm_fro: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankVerdict {
    pub rank: usize,
    /// `sqrt(n - k) * |R[k,k]|`, zero when no truncation happened.
    pub truncation_bound: f64,
}

impl PivotedQR {
    pub fn rows(&self) -> usize {
        self.q.rows()
    }

    pub fn cols(&self) -> usize {
        self.r.cols()
    }

    /// `Π_r Q`, the unitary with `A Π_c = (Π_r Q) R`.
    pub fn left_unitary(&self) -> ComplexMatrix {
        self.row_perm.left_mul(&self.q)
    }

    /// `Q R` (equal to `Π_rᵀ A Π_c` up to rounding).
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.r.rows();
        self.q.block(0, 0, self.q.rows(), k).matmul(&self.r)
    }

    pub fn numerical_rank(&self, opts: &RankOptions) -> Result<RankVerdict> {
        numerical_rank(self, opts)
    }

    /// Solve `A x = b` for square nonsingular `A`; `None` if `R` has a zero
    /// diagonal entry.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        let n = self.cols();
        if self.rows() != n || self.diag_abs.iter().any(|&d| d == 0.0) {
            return None;
        }
        // A Π_c = Π_r Q R  =>  x = Π_c R⁻¹ Qᴴ Π_rᵀ b.
        let pb = self.row_perm.apply_transpose(b);
        let mut y = self.q.adjoint_mul_vec(&pb);
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.r[(i, j)] * y[j];
            }
            y[i] = s / self.r[(i, i)];
        }
        let x = self.col_perm.apply(&y);
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

/// Stable sort of rows by decreasing ∞-norm. Returns `Π` such that `Πᵀ A`
/// is sorted.
pub fn row_presort(a: &ComplexMatrix) -> Permutation {
    let norms: Vec<f64> = (0..a.rows()).map(|i| a.row_inf_norm(i)).collect();
    let mut idx: Vec<usize> = (0..a.rows()).collect();
    idx.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    Permutation::from_vec(idx)
}

/// A Householder reflector `H = I - 2 u uᴴ` with `H x = beta e_1`.
pub(crate) struct Reflector {
    pub u: Vec<C64>,
    pub beta: C64,
}

/// Returns `None` when `x` is already zero below its first entry and the
/// first entry needs no rotation.
pub(crate) fn reflector(x: &[C64]) -> Option<Reflector> {
    let alpha = crate::matrix::vec_norm(x);
    if alpha == 0.0 || x[1..].iter().all(|z| *z == ZERO) {
        return None;
    }
    let phase = if x[0] == ZERO {
        C64::new(1.0, 0.0)
    } else {
        x[0] / x[0].norm()
    };
    let mut u = x.to_vec();
    u[0] += phase * alpha;
    let un = crate::matrix::vec_norm(&u);
    for z in u.iter_mut() {
        *z /= un;
    }
    Some(Reflector {
        u,
        beta: -phase * alpha,
    })
}

impl Reflector {
    /// Apply `H` to rows `r0..r0+len(u)` of columns `cols` of `m`.
    pub(crate) fn apply_left(
        &self,
        m: &mut ComplexMatrix,
        r0: usize,
        cols: std::ops::Range<usize>,
    ) {
        let k = self.u.len();
        for c in cols {
            let col = &mut m.col_mut(c)[r0..r0 + k];
            let s: C64 = self
                .u
                .iter()
                .zip(col.iter())
                .map(|(u, x)| u.conj() * x)
                .sum();
            if s == ZERO {
                continue;
            }
            let s2 = s * 2.0;
            for (x, u) in col.iter_mut().zip(&self.u) {
                *x -= s2 * u;
            }
        }
    }

    /// Apply `H` from the right to columns `c0..c0+len(u)` of all rows of `m`.
    pub(crate) fn apply_right(&self, m: &mut ComplexMatrix, c0: usize) {
        let k = self.u.len();
        let rows = m.rows();
        let mut t = vec![ZERO; rows];
        for (l, u) in self.u.iter().enumerate() {
            for (ti, x) in t.iter_mut().zip(m.col(c0 + l)) {
                *ti += x * u;
            }
        }
        for l in 0..k {
            let f = self.u[l].conj() * 2.0;
            let col = m.col_mut(c0 + l);
            for (x, ti) in col.iter_mut().zip(&t) {
                *x -= ti * f;
            }
        }
    }
}

/// Householder QR with column pivoting (largest remaining column norm,
/// smallest index on exact ties). Partial column norms are recomputed from
/// the updated trailing matrix at every step.
pub fn qr_col_pivoted(a: &ComplexMatrix, opts: &RankOptions) -> PivotedQR {
    let m = a.rows();
    let n = a.cols();
    let row_perm = if opts.presort_rows {
        row_presort(a)
    } else {
        Permutation::identity(m)
    };
    let mut w = row_perm.permute_rows(a);
    let mut q = ComplexMatrix::identity(m);
    let mut col_perm = Permutation::identity(n);
    let kmax = m.min(n);
    for j in 0..kmax {
        let mut best = j;
        let mut best_norm = -1.0f64;
        for c in j..n {
            let s: f64 = w.col(c)[j..].iter().map(|z| z.norm_sqr()).sum();
            if s > best_norm {
                best_norm = s;
                best = c;
            }
        }
        if best != j {
            w.swap_cols(j, best);
            col_perm.swap(j, best);
        }
        if j + 1 >= m {
            continue;
        }
        if let Some(h) = reflector(&w.col(j)[j..]) {
            h.apply_left(&mut w, j, j + 1..n);
            let col = w.col_mut(j);
            col[j] = h.beta;
            for z in col[j + 1..].iter_mut() {
                *z = ZERO;
            }
            h.apply_right(&mut q, j);
        }
    }
    let r = ComplexMatrix::from_fn(kmax, n, |i, jj| if i <= jj { w[(i, jj)] } else { ZERO });
    let diag_abs = (0..kmax).map(|i| r[(i, i)].norm()).collect();
    PivotedQR {
        q,
        r,
        col_perm,
        row_perm,
        diag_abs,
        a_norm_fro: a.norm_fro(),
    }
}

/// Smallest `k` at which the strategy's trigger fires on `|R[k,k]|`
/// (0-based), or `min(m, n)` when it never fires.
pub fn numerical_rank(f: &PivotedQR, opts: &RankOptions) -> Result<RankVerdict> {
    opts.validate()?;
    let d = &f.diag_abs;
    let n = f.cols();
    for k in 0..d.len() {
        let fires = match opts.strategy {
            RankStrategy::RelDiag => {
                if k == 0 {
                    d[0] == 0.0
                } else {
                    d[k] <= opts.tau * d[k - 1]
                }
            }
            RankStrategy::AbsMatrixNorm => d[k] <= opts.tau * f.a_norm_fro,
            RankStrategy::GlobalTripleNorm { global_norm } => d[k] <= opts.tau * global_norm,
        };
        if fires {
            return Ok(RankVerdict {
                rank: k,
                truncation_bound: ((n - k) as f64).sqrt() * d[k],
            });
        }
    }
    Ok(RankVerdict {
        rank: d.len(),
        truncation_bound: 0.0,
    })
}
