//! Working state of a deflation: the full transformed pencil, the unitaries
//! applied so far, and the deflated tail.

use serde::{Deserialize, Serialize};

use crate::cod::cod;
use crate::error::{Error, Result};
use crate::linearization::LinearPencil;
use crate::matrix::{ComplexMatrix, Permutation, ONE, ZERO};
use crate::qr::{numerical_rank, qr_col_pivoted, PivotedQR, RankOptions};

/// Which eigenvalue a deflation step removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    ZeroEig,
    InfEig,
}

/// A deflated diagonal block `[offset, offset + size)` of the tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBlock {
    pub offset: usize,
    pub size: usize,
    pub target: Target,
}

/// Block sizes removed by successive staircase steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseProfile {
    pub s: Vec<usize>,
    /// Active dimension before each step, plus the final one.
    pub n_seq: Vec<usize>,
    pub target: Target,
}

impl StaircaseProfile {
    pub fn empty(target: Target, start: usize) -> Self {
        Self {
            s: vec![],
            n_seq: vec![start],
            target,
        }
    }

    pub fn total(&self) -> usize {
        self.s.iter().sum()
    }

    pub(crate) fn push(&mut self, s: usize) {
        let last = *self.n_seq.last().unwrap();
        self.s.push(s);
        self.n_seq.push(last - s);
    }

    /// Number of elementary divisors `λ^j` (or `μ^j` at infinity), for
    /// `j = 1..=ℓ`.
    pub fn elementary_divisors(&self) -> Vec<usize> {
        (0..self.s.len())
            .map(|j| self.s[j] - self.s.get(j + 1).copied().unwrap_or(0).min(self.s[j]))
            .collect()
    }
}

/// Leading block sizes known in advance, and whether the staircase should
/// keep deciding ranks after them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StaircaseHints {
    pub leading: Vec<usize>,
    pub complete: bool,
}

impl StaircaseHints {
    pub fn none() -> Self {
        Self::default()
    }
}

/// `p · (A₀ - λB₀) · q = a - λb`, where the trailing `N - active` rows and
/// columns hold the deflated blocks.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub p: ComplexMatrix,
    pub q: ComplexMatrix,
    pub active: usize,
    pub tail: Vec<TailBlock>,
    pub opts: RankOptions,
    /// Frobenius norm of everything set to zero by rank truncation.
    pub truncated: f64,
}

impl Reduction {
    pub fn new(lp: &LinearPencil, opts: RankOptions) -> Self {
        let n = lp.dim();
        Self {
            a: lp.a.clone(),
            b: lp.b.clone(),
            p: lp.left_accum.clone(),
            q: lp.right_accum.clone(),
            active: n,
            tail: vec![],
            opts,
            truncated: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn deflated(&self, target: Target) -> usize {
        self.tail
            .iter()
            .filter(|t| t.target == target)
            .map(|t| t.size)
            .sum()
    }

    /// The active leading pencil.
    pub fn core(&self) -> (ComplexMatrix, ComplexMatrix) {
        let k = self.active;
        (self.a.block(0, 0, k, k), self.b.block(0, 0, k, k))
    }

    /// Replace rows `r0..r0+u.rows()` of `a`, `b`, `p` by `u` times them.
    pub fn left(&mut self, r0: usize, u: &ComplexMatrix) {
        let k = u.rows();
        let n = self.dim();
        for x in [&mut self.a, &mut self.b, &mut self.p] {
            let blk = x.block(r0, 0, k, n);
            x.set_block(r0, 0, &u.matmul(&blk));
        }
    }

    /// Replace columns `c0..c0+v.cols()` of `a`, `b`, `q` by them times `v`.
    pub fn right(&mut self, c0: usize, v: &ComplexMatrix) {
        let k = v.cols();
        let n = self.dim();
        for x in [&mut self.a, &mut self.b, &mut self.q] {
            let blk = x.block(0, c0, n, k);
            x.set_block(0, c0, &blk.matmul(v));
        }
    }

    fn zero_block(&mut self, which: Target, r0: usize, c0: usize, nr: usize, nc: usize) {
        let x = match which {
            Target::ZeroEig => &mut self.a,
            Target::InfEig => &mut self.b,
        };
        let norm = x.block(r0, c0, nr, nc).norm_fro();
        self.truncated = self.truncated.hypot(norm);
        x.fill_block(r0, c0, nr, nc, ZERO);
    }

    /// Apply `left` to the active rows, declare the last `s` active rows of
    /// the target matrix zero, and compress the matching strip of the other
    /// matrix into an upper triangular `s×s` block in the last `s` active
    /// columns.
    pub fn deflate_with_left(
        &mut self,
        target: Target,
        left: &ComplexMatrix,
        s: usize,
        stage: &str,
    ) -> Result<()> {
        let k = self.active;
        assert_eq!(left.rows(), k, "left transform must act on the active rows");
        assert!(s <= k);
        self.left(0, left);
        if s == 0 {
            return Ok(());
        }
        let top = k - s;
        self.zero_block(target, top, 0, s, k);
        let other = match target {
            Target::ZeroEig => Target::InfEig,
            Target::InfEig => Target::ZeroEig,
        };
        let strip = match target {
            Target::ZeroEig => self.b.block(top, 0, s, k),
            Target::InfEig => self.a.block(top, 0, s, k),
        };
        let d = cod(&strip, &self.opts)?;
        if d.rank < s {
            return Err(Error::SingularPencil {
                stage: stage.to_string(),
                rows: s,
                cols: k,
                rank: d.rank,
            });
        }
        // strip · Z = Qc [T11 0]. Move the T11 columns last, reversing their
        // order so that J Qcᴴ · strip · Z E = J T11 J is upper triangular.
        let mut order: Vec<usize> = (s..k).collect();
        order.extend((0..s).rev());
        let v = Permutation::from_vec(order).permute_cols(&d.z);
        self.right(0, &v);
        let flip = ComplexMatrix::from_fn(s, s, |i, j| if i + j == s - 1 { ONE } else { ZERO });
        let u = flip.matmul(&d.q.adjoint());
        self.left(top, &u);
        self.zero_block(other, top, 0, s, top);
        for j in top..k {
            for i in j + 1..k {
                let x = match other {
                    Target::ZeroEig => &mut self.a,
                    Target::InfEig => &mut self.b,
                };
                x[(i, j)] = ZERO;
            }
        }
        self.tail.push(TailBlock {
            offset: top,
            size: s,
            target,
        });
        self.active = top;
        Ok(())
    }

    fn target_active(&self, target: Target) -> ComplexMatrix {
        let k = self.active;
        match target {
            Target::ZeroEig => self.a.block(0, 0, k, k),
            Target::InfEig => self.b.block(0, 0, k, k),
        }
    }

    /// One staircase step; returns the deflated block size (0 when the
    /// target matrix has full rank). A `forced` size overrides the numerical
    /// rank decision.
    pub fn staircase_step(
        &mut self,
        target: Target,
        forced: Option<usize>,
        stage: &str,
    ) -> Result<usize> {
        let k = self.active;
        if k == 0 {
            return Ok(0);
        }
        let x = self.target_active(target);
        let f = qr_col_pivoted(&x, &self.opts);
        let s = match forced {
            Some(s) if s > k => {
                return Err(Error::InvalidOptions(format!(
                    "hinted block {s} exceeds active size {k}"
                )));
            }
            Some(s) => s,
            None => k - numerical_rank(&f, &self.opts)?.rank,
        };
        if s == 0 {
            return Ok(0);
        }
        let left = f.left_unitary().adjoint();
        self.deflate_with_left(target, &left, s, stage)?;
        Ok(s)
    }

    /// Repeat staircase steps until the target matrix of the active block
    /// has full rank (or the hints say the structure is complete).
    pub fn staircase(
        &mut self,
        target: Target,
        hints: &StaircaseHints,
    ) -> Result<StaircaseProfile> {
        let mut profile = StaircaseProfile::empty(target, self.active);
        let mut j = 0;
        loop {
            let forced = hints.leading.get(j).copied();
            if forced.is_none() && hints.complete && !hints.leading.is_empty() {
                break;
            }
            let stage = format!("{} staircase step {}", target_name(target), j + 1);
            let s = self.staircase_step(target, forced, &stage)?;
            if s == 0 {
                if forced.is_some() {
                    j += 1;
                    continue;
                }
                break;
            }
            profile.push(s);
            j += 1;
        }
        Ok(profile)
    }

    /// First structured step on the second companion form of an `n×n`
    /// problem: left `U ⊕ Q_Kᴴ`, right `Π ⊕ Q_K`, then the trailing `n - r_K`
    /// rows and columns (`-λ(-I)` block) are deflated as zeros.
    pub fn structured_step1(
        &mut self,
        top: &ComplexMatrix,
        perm: &Permutation,
        kf: &PivotedQR,
        r_k: usize,
    ) {
        let n2 = self.dim();
        let n = n2 / 2;
        assert_eq!(self.active, n2, "structured step on a fresh linearization");
        let qk = kf.left_unitary();
        self.left(0, &ComplexMatrix::direct_sum(top, &qk.adjoint()));
        self.right(0, &ComplexMatrix::direct_sum(&perm.matrix(), &qk));
        if r_k == n {
            return;
        }
        let s = n - r_k;
        let top_row = n + r_k;
        self.zero_block(Target::ZeroEig, top_row, 0, s, n2);
        self.zero_block(Target::InfEig, top_row, 0, s, top_row);
        for i in top_row..n2 {
            for j in top_row..n2 {
                self.b[(i, j)] = if i == j { -ONE } else { ZERO };
            }
        }
        self.tail.push(TailBlock {
            offset: top_row,
            size: s,
            target: Target::ZeroEig,
        });
        self.active = top_row;
    }

    /// Second structured step after `structured_step1` with `U = Q_Kᴴ`:
    /// rank-revealing QR of the stacked block `[Q_{K,2}ᴴ C; R_{K,1} Π_Kᵀ]`
    /// and column compression of the matching strip of `B`. Returns `r₂₂`.
    pub fn structured_step2(
        &mut self,
        n: usize,
        r_k: usize,
        forced_rank: Option<usize>,
    ) -> Result<usize> {
        assert_eq!(self.active, n + r_k);
        let stacked = self.a.block(r_k, 0, n, n);
        let f = qr_col_pivoted(&stacked, &self.opts);
        let r22 = match forced_rank {
            Some(r) => r,
            None => numerical_rank(&f, &self.opts)?.rank,
        };
        if r22 == n {
            return Ok(n);
        }
        let left =
            ComplexMatrix::direct_sum(&ComplexMatrix::identity(r_k), &f.left_unitary().adjoint());
        self.deflate_with_left(Target::ZeroEig, &left, n - r22, "zero deflation step 2")?;
        Ok(r22)
    }

    /// `‖(p a₀ q - a, p b₀ q - b)‖_F`.
    pub fn equivalence_residual(&self, a0: &ComplexMatrix, b0: &ComplexMatrix) -> f64 {
        let ta = self.p.matmul(a0).matmul(&self.q);
        let tb = self.p.matmul(b0).matmul(&self.q);
        (&ta - &self.a).norm_fro().hypot((&tb - &self.b).norm_fro())
    }
}

pub(crate) fn target_name(t: Target) -> &'static str {
    match t {
        Target::ZeroEig => "zero",
        Target::InfEig => "infinite",
    }
}
