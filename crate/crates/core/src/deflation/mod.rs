//! Deflation of zero and infinite eigenvalues from the second companion
//! linearization: structured first two steps, the upper triangular
//! staircase, and the global case dispatch.

mod reduction;

pub use reduction::{Reduction, StaircaseHints, StaircaseProfile, TailBlock, Target};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::{build_c2, reverse, LinearPencil, QuadPencil};
use crate::matrix::{ComplexMatrix, Permutation};
use crate::qr::{numerical_rank, qr_col_pivoted, PivotedQR, RankOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub r_m: usize,
    pub r_k: usize,
    /// Rank of `[Q_{K,2}ᴴ C; R_{K,1} Π_Kᵀ]`, when it was needed.
    pub r_22: Option<usize>,
    /// The same block for the reversed problem.
    pub r_22_inf: Option<usize>,
}

/// Which branch of the global reduction ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// No deflation attempted.
    #[serde(rename = "plain")]
    Plain,
    /// M and K regular.
    #[serde(rename = "1")]
    BothRegular,
    /// One of M, K singular, stacked block full rank.
    #[serde(rename = "2.1")]
    OneSingularFullRank,
    /// One of M, K singular, stacked block deficient.
    #[serde(rename = "2.2")]
    OneSingularDeficient,
    /// Both singular, both stacked blocks full rank.
    #[serde(rename = "3.1")]
    BothSingularFullRank,
    /// Both singular, exactly one stacked block deficient.
    #[serde(rename = "3.2")]
    BothSingularOneDeficient,
    /// Both singular, both stacked blocks deficient.
    #[serde(rename = "3.3")]
    BothSingularBothDeficient,
}

impl CaseTag {
    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::Plain => "plain",
            CaseTag::BothRegular => "1",
            CaseTag::OneSingularFullRank => "2.1",
            CaseTag::OneSingularDeficient => "2.2",
            CaseTag::BothSingularFullRank => "3.1",
            CaseTag::BothSingularOneDeficient => "3.2",
            CaseTag::BothSingularBothDeficient => "3.3",
        }
    }
}

/// How far the reduction goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeflationMode {
    /// Backend on the raw linearization.
    None,
    /// Only the deflations visible from the ranks of M and K.
    OneStep,
    /// Structured steps followed by the staircase.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReduceOptions {
    /// Ranks of M, K and the stacked blocks.
    pub rank: RankOptions,
    /// Rank and singularity decisions on the 2n×2n linearization.
    pub pencil_rank: RankOptions,
    pub mode: DeflationMode,
}

impl ReduceOptions {
    pub fn uniform(rank: RankOptions, mode: DeflationMode) -> Self {
        Self {
            rank,
            pencil_rank: rank,
            mode,
        }
    }
}

/// The regular core after deflation, with everything needed to map
/// eigenvectors back.
#[derive(Clone, Debug)]
pub struct ReducedPencil {
    /// Core `A - λB`; its accumulators are `p_total` and `q_total`, and its
    /// deflation counts refer to the problem as given (not reversed).
    pub pencil: LinearPencil,
    /// Full transformed pencil `p_total (A₀ - λB₀) q_total`, block upper
    /// triangular with the core leading.
    pub transformed_a: ComplexMatrix,
    pub transformed_b: ComplexMatrix,
    /// The linearization `A₀ - λB₀` that was reduced.
    pub linearization: LinearPencil,
    pub tail: Vec<TailBlock>,
    pub zero_profile: StaircaseProfile,
    pub inf_profile: StaircaseProfile,
    pub ranks: RankReport,
    pub case: CaseTag,
    /// True when the reduction worked on `(K, C, M)`.
    pub reversed: bool,
    /// The quadratic problem that was linearized (reversed when `reversed`).
    pub oriented: QuadPencil,
    /// Pivoted QR of the oriented M and K.
    pub qr_m: PivotedQR,
    pub qr_k: PivotedQR,
    /// Ranks of the oriented M and K.
    pub rank_m: usize,
    pub rank_k: usize,
    /// Frobenius norm of all entries discarded by rank truncation.
    pub truncated: f64,
}

impl ReducedPencil {
    pub fn core_dim(&self) -> usize {
        self.pencil.dim()
    }

    pub fn p_total(&self) -> &ComplexMatrix {
        &self.pencil.left_accum
    }

    pub fn q_total(&self) -> &ComplexMatrix {
        &self.pencil.right_accum
    }
}

/// `[Q_{K,2}ᴴ C; R_{K,1} Π_Kᵀ]` for a pivoted QR of K with rank `r_k`.
pub fn stacked_block(c: &ComplexMatrix, kf: &PivotedQR, r_k: usize) -> ComplexMatrix {
    let n = c.rows();
    let qk = kf.left_unitary();
    let top = qk.block(0, r_k, n, n - r_k).adjoint_matmul(c);
    let bottom = kf
        .col_perm
        .inverse()
        .permute_cols(&kf.r.block(0, 0, r_k, n));
    let mut s = ComplexMatrix::zeros(n, n);
    s.set_block(0, 0, &top);
    s.set_block(n - r_k, 0, &bottom);
    s
}

/// First structured zero deflation on the second companion form: left
/// `Q_Kᴴ ⊕ Q_Kᴴ`, right `I ⊕ Q_K`, truncating the trailing `n - r_K` rows
/// and columns. Returns the reduction state and the number deflated.
pub fn deflate_zero_step1(
    lp: &LinearPencil,
    kf: &PivotedQR,
    r_k: usize,
    opts: RankOptions,
) -> Result<(Reduction, usize)> {
    let n = lp.dim() / 2;
    if r_k >= n {
        return Err(Error::RankNotDeficient { rank: r_k, n });
    }
    let mut red = Reduction::new(lp, opts);
    red.structured_step1(
        &kf.left_unitary().adjoint(),
        &Permutation::identity(n),
        kf,
        r_k,
    );
    Ok((red, n - r_k))
}

/// Second structured zero deflation. Returns the rank `r₂₂` and the zero
/// profile prefix `(n - r_K[, n - r₂₂])`.
pub fn deflate_zero_step2(
    red: &mut Reduction,
    n: usize,
    r_k: usize,
) -> Result<(usize, StaircaseProfile)> {
    let mut profile = StaircaseProfile::empty(Target::ZeroEig, 2 * n);
    profile.push(n - r_k);
    let r22 = red.structured_step2(n, r_k, None)?;
    if r22 < n {
        profile.push(n - r22);
    }
    Ok((r22, profile))
}

/// Upper triangular staircase for the eigenvalue 0 of `a - λb`.
pub fn staircase(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    hints: &StaircaseHints,
    opts: RankOptions,
) -> Result<(StaircaseProfile, Reduction)> {
    let lp = LinearPencil::new(a.clone(), b.clone())?;
    let mut red = Reduction::new(&lp, opts);
    let profile = red.staircase(Target::ZeroEig, hints)?;
    Ok((profile, red))
}

fn rank_of(f: &PivotedQR, opts: &RankOptions) -> Result<usize> {
    Ok(numerical_rank(f, opts)?.rank)
}

/// Structure as seen in the orientation actually reduced.
struct Oriented {
    pencil: QuadPencil,
    qm: PivotedQR,
    qk: PivotedQR,
    rm: usize,
    rk: usize,
    reversed: bool,
}

fn flip(t: Target, reversed: bool) -> Target {
    match (t, reversed) {
        (t, false) => t,
        (Target::ZeroEig, true) => Target::InfEig,
        (Target::InfEig, true) => Target::ZeroEig,
    }
}

/// Dispatch the reduction by the ranks of M, K and of the stacked blocks.
pub fn global_reduce(p: &QuadPencil, opts: &ReduceOptions) -> Result<ReducedPencil> {
    let n = p.n();
    let ro = opts.rank;
    ro.validate()?;
    opts.pencil_rank.validate()?;
    let qm = qr_col_pivoted(p.m(), &ro);
    let qk = qr_col_pivoted(p.k(), &ro);
    let rm = rank_of(&qm, &ro)?;
    let rk = rank_of(&qk, &ro)?;
    let mut ranks = RankReport {
        r_m: rm,
        r_k: rk,
        r_22: None,
        r_22_inf: None,
    };

    let full = opts.mode == DeflationMode::Full;
    let orient = |reversed: bool, qm: PivotedQR, qk: PivotedQR| {
        if reversed {
            Oriented {
                pencil: reverse(p),
                qm: qk,
                qk: qm,
                rm: rk,
                rk: rm,
                reversed,
            }
        } else {
            Oriented {
                pencil: p.clone(),
                qm,
                qk,
                rm,
                rk,
                reversed,
            }
        }
    };

    if opts.mode == DeflationMode::None {
        let o = orient(false, qm, qk);
        let lp = build_c2(&o.pencil);
        let red = Reduction::new(&lp, opts.pencil_rank);
        return Ok(finish(o, lp, red, CaseTag::Plain, ranks, vec![], vec![]));
    }

    if rm == n && rk == n {
        let o = orient(false, qm, qk);
        let lp = build_c2(&o.pencil);
        let mut red = Reduction::new(&lp, opts.pencil_rank);
        let qmu = o.qm.left_unitary();
        red.left(
            0,
            &ComplexMatrix::direct_sum(&qmu.adjoint(), &ComplexMatrix::identity(n)),
        );
        red.right(
            0,
            &ComplexMatrix::direct_sum(&o.qm.col_perm.matrix(), &ComplexMatrix::identity(n)),
        );
        return Ok(finish(
            o,
            lp,
            red,
            CaseTag::BothRegular,
            ranks,
            vec![],
            vec![],
        ));
    }

    if rm == n || rk == n {
        // Exactly one singular: orient so that K is the singular one.
        let o = orient(rk == n, qm, qk);
        let r22 = rank_of(
            &qr_col_pivoted(&stacked_block(o.pencil.c(), &o.qk, o.rk), &ro),
            &ro,
        )?;
        if o.reversed {
            ranks.r_22_inf = Some(r22);
        } else {
            ranks.r_22 = Some(r22);
        }
        let lp = build_c2(&o.pencil);
        let mut red = Reduction::new(&lp, opts.pencil_rank);
        let mut zero = vec![o.rk];
        if r22 == n || !full {
            let qmu = o.qm.left_unitary();
            red.structured_step1(&qmu.adjoint(), &o.qm.col_perm, &o.qk, o.rk);
            return Ok(finish(
                o,
                lp,
                red,
                CaseTag::OneSingularFullRank,
                ranks,
                zero_profile(n, &zero),
                vec![],
            ));
        }
        red.structured_step1(
            &o.qk.left_unitary().adjoint(),
            &Permutation::identity(n),
            &o.qk,
            o.rk,
        );
        red.structured_step2(n, o.rk, Some(r22))?;
        zero.push(r22);
        let mut zp = zero_profile(n, &zero);
        let rest = red.staircase(Target::ZeroEig, &StaircaseHints::none())?;
        zp.extend(rest.s);
        return Ok(finish(
            o,
            lp,
            red,
            CaseTag::OneSingularDeficient,
            ranks,
            zp,
            vec![],
        ));
    }

    // Both singular.
    let r22 = rank_of(&qr_col_pivoted(&stacked_block(p.c(), &qk, rk), &ro), &ro)?;
    let r22_inf = rank_of(&qr_col_pivoted(&stacked_block(p.c(), &qm, rm), &ro), &ro)?;
    ranks.r_22 = Some(r22);
    ranks.r_22_inf = Some(r22_inf);

    if (r22 == n && r22_inf == n) || !full {
        let o = orient(false, qm, qk);
        let lp = build_c2(&o.pencil);
        let mut red = Reduction::new(&lp, opts.pencil_rank);
        red.structured_step1(
            &o.qm.left_unitary().adjoint(),
            &Permutation::identity(n),
            &o.qk,
            o.rk,
        );
        // Rows rm..n of B vanish; move them last among the active rows and
        // compress the matching strip of A.
        let k = n + o.rk;
        let mut order: Vec<usize> = (0..o.rm).collect();
        order.extend(n..k);
        order.extend(o.rm..n);
        let left = Permutation::from_vec(order).matrix().transpose();
        red.deflate_with_left(
            Target::InfEig,
            &left,
            n - o.rm,
            "simultaneous infinite deflation",
        )?;
        let inf = vec![n - o.rm];
        return Ok(finish(
            o,
            lp,
            red,
            CaseTag::BothSingularFullRank,
            ranks,
            zero_profile(n, &[rk]),
            inf,
        ));
    }

    let (case, reversed) = if r22 < n && r22_inf < n {
        let zeros = (n - rk) + (n - r22);
        let infs = (n - rm) + (n - r22_inf);
        (CaseTag::BothSingularBothDeficient, infs > zeros)
    } else {
        (CaseTag::BothSingularOneDeficient, r22_inf < n)
    };
    let (oz22, oi22) = if reversed {
        (r22_inf, r22)
    } else {
        (r22, r22_inf)
    };
    let o = orient(reversed, qm, qk);
    let lp = build_c2(&o.pencil);
    let mut red = Reduction::new(&lp, opts.pencil_rank);
    red.structured_step1(
        &o.qk.left_unitary().adjoint(),
        &Permutation::identity(n),
        &o.qk,
        o.rk,
    );
    red.structured_step2(n, o.rk, Some(oz22))?;
    let mut zp = zero_profile(n, &[o.rk, oz22]);
    zp.extend(red.staircase(Target::ZeroEig, &StaircaseHints::none())?.s);
    let hints = if case == CaseTag::BothSingularOneDeficient {
        StaircaseHints {
            leading: vec![n - o.rm],
            complete: true,
        }
    } else {
        StaircaseHints {
            leading: vec![n - o.rm, n - oi22],
            complete: false,
        }
    };
    let ip = red.staircase(Target::InfEig, &hints)?.s;
    Ok(finish(o, lp, red, case, ranks, zp, ip))
}

/// Zero profile prefix from the ranks `[r_K, r₂₂, …]` (each entry `n - r`).
fn zero_profile(n: usize, ranks: &[usize]) -> Vec<usize> {
    ranks.iter().map(|&r| n - r).filter(|&s| s > 0).collect()
}

fn finish(
    o: Oriented,
    lp: LinearPencil,
    red: Reduction,
    case: CaseTag,
    ranks: RankReport,
    zero_s: Vec<usize>,
    inf_s: Vec<usize>,
) -> ReducedPencil {
    let n2 = lp.dim();
    let mut zp = StaircaseProfile::empty(Target::ZeroEig, n2);
    for &s in &zero_s {
        zp.push(s);
    }
    let mut ip = StaircaseProfile::empty(Target::InfEig, *zp.n_seq.last().unwrap());
    for &s in &inf_s {
        ip.push(s);
    }
    debug_assert_eq!(zp.total(), red.deflated(Target::ZeroEig));
    debug_assert_eq!(ip.total(), red.deflated(Target::InfEig));
    // Report in the orientation of the problem as given.
    zp.target = flip(Target::ZeroEig, o.reversed);
    ip.target = flip(Target::InfEig, o.reversed);
    let (zero_profile, inf_profile) = if o.reversed { (ip, zp) } else { (zp, ip) };
    let (a, b) = red.core();
    let pencil = LinearPencil {
        a,
        b,
        left_accum: red.p.clone(),
        right_accum: red.q.clone(),
        deflated_zero: zero_profile.total(),
        deflated_inf: inf_profile.total(),
    };
    ReducedPencil {
        pencil,
        transformed_a: red.a,
        transformed_b: red.b,
        linearization: lp,
        tail: red.tail,
        zero_profile,
        inf_profile,
        ranks,
        case,
        reversed: o.reversed,
        oriented: o.pencil,
        qr_m: o.qm,
        qr_k: o.qk,
        rank_m: o.rm,
        rank_k: o.rk,
        truncated: red.truncated,
    }
}
