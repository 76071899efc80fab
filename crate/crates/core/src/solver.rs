//! End-to-end solve: balance, scale, deflate, solve the core, recover.

use serde::{Deserialize, Serialize};

use crate::backend::{GeneralizedEigenPairs, GeneralizedEigensolver, ReferenceBackend};
use crate::deflation::{
    global_reduce, CaseTag, DeflationMode, RankReport, ReduceOptions, ReducedPencil,
    StaircaseProfile,
};
use crate::error::{Error, Result};
use crate::linearization::QuadPencil;
use crate::matrix::{ComplexMatrix, C64};
use crate::qr::RankOptions;
use crate::recovery::{recover, EigenValue, QepEigenpair, Undo};
use crate::scaling::{
    apply_balancing, balance, flv_scale, tropical_scale, BalancingDiagonals, ScalingKind,
    ScalingParams, TropicalBranch,
};

/// Default rank tolerance on the linearization, in units of `n·ε`. With
/// `2` instead, roughly one pencil in twenty-five with an exact common null
/// vector slips past the singularity check.
pub const PENCIL_TAU_FACTOR: f64 = 8.0;

/// Rank trigger selectable from the outside. `GlobalTripleNorm` takes its
/// reference norm from the preprocessed triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankChoice {
    RelDiag,
    AbsMatrixNorm,
    GlobalTripleNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub scale: ScalingKind,
    pub balance: bool,
    pub balance_weights: [f64; 3],
    pub rank_strategy: RankChoice,
    /// Rank tolerance; `None` means `n·ε` for the coefficients and
    /// `PENCIL_TAU_FACTOR·n·ε` on the linearization.
    pub tau: Option<f64>,
    pub mode: DeflationMode,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            scale: ScalingKind::Flv,
            balance: true,
            balance_weights: [1.0; 3],
            rank_strategy: RankChoice::GlobalTripleNorm,
            tau: None,
            mode: DeflationMode::Full,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tau {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidOptions(format!(
                    "tau must be finite and >= 0, got {t}"
                )));
            }
        }
        let w = self.balance_weights;
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidOptions(format!(
                "balancing weights must be finite and >= 0, got {w:?}"
            )));
        }
        if self.balance && w.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidOptions(
                "at least one balancing weight must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Rank options for the coefficients of a preprocessed problem.
    pub fn rank_options(&self, p: &QuadPencil) -> RankOptions {
        self.rank_options_with(p, self.tau.unwrap_or(p.n() as f64 * f64::EPSILON))
    }

    /// Rank options for the linearization. The default tolerance
    /// `PENCIL_TAU_FACTOR·n·ε` leaves room for the rounding accumulated over
    /// up to 2n staircase steps.
    pub fn pencil_rank_options(&self, p: &QuadPencil) -> RankOptions {
        self.rank_options_with(
            p,
            self.tau
                .unwrap_or(PENCIL_TAU_FACTOR * p.n() as f64 * f64::EPSILON),
        )
    }

    fn rank_options_with(&self, p: &QuadPencil, tau: f64) -> RankOptions {
        match self.rank_strategy {
            RankChoice::RelDiag => RankOptions::rel_diag(tau),
            RankChoice::AbsMatrixNorm => RankOptions::abs_matrix_norm(tau),
            RankChoice::GlobalTripleNorm => RankOptions::global_triple_norm(tau, p.max_fro_norm()),
        }
    }
}

/// What deflation found, in the orientation of the problem as given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeflationLedger {
    pub case: CaseTag,
    pub reversed: bool,
    pub ranks: RankReport,
    pub zero_profile: StaircaseProfile,
    pub inf_profile: StaircaseProfile,
    pub deflated_zero: usize,
    pub deflated_inf: usize,
    pub core_dim: usize,
    /// Frobenius norm of everything discarded by rank truncation.
    pub truncated: f64,
}

impl DeflationLedger {
    pub fn of(r: &ReducedPencil) -> Self {
        Self {
            case: r.case,
            reversed: r.reversed,
            ranks: r.ranks,
            zero_profile: r.zero_profile.clone(),
            inf_profile: r.inf_profile.clone(),
            deflated_zero: r.pencil.deflated_zero,
            deflated_inf: r.pencil.deflated_inf,
            core_dim: r.core_dim(),
            truncated: r.truncated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QepSolution {
    pub n: usize,
    pub pairs: Vec<QepEigenpair>,
    pub ledger: DeflationLedger,
    pub scaling: ScalingParams,
    pub balancing: BalancingDiagonals,
    pub options: SolveOptions,
    pub backend: String,
    /// Shift the backend used for its reduction to a standard problem.
    pub shift: C64,
}

impl QepSolution {
    pub fn count(&self, f: impl Fn(&EigenValue) -> bool) -> usize {
        self.pairs.iter().filter(|p| f(&p.value)).count()
    }

    pub fn finite_count(&self) -> usize {
        self.count(|v| v.is_finite())
    }

    pub fn infinite_count(&self) -> usize {
        self.count(|v| *v == EigenValue::Infinite)
    }

    pub fn zero_count(&self) -> usize {
        self.count(|v| *v == EigenValue::Zero)
    }

    pub fn finite_values(&self) -> Vec<C64> {
        self.pairs
            .iter()
            .filter_map(|p| {
                if p.value.is_finite() {
                    p.value.value()
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Balancing and scaling as configured. Returns the preprocessed triple.
pub fn preprocess(
    p: &QuadPencil,
    opts: &SolveOptions,
) -> Result<(QuadPencil, BalancingDiagonals, ScalingParams)> {
    let (pb, bal) = if opts.balance {
        let d = balance(p, opts.balance_weights)?;
        (apply_balancing(p, &d)?, d)
    } else {
        (p.clone(), BalancingDiagonals::identity(p.n()))
    };
    let scaled = match opts.scale {
        ScalingKind::None => Err(Error::ZeroCoefficientNorm("none")),
        ScalingKind::Flv => flv_scale(&pb),
        ScalingKind::TropicalPlus => tropical_scale(&pb, TropicalBranch::Plus),
        ScalingKind::TropicalMinus => tropical_scale(&pb, TropicalBranch::Minus),
    };
    // Scaling is undefined when a coefficient vanishes; proceed unscaled.
    Ok(match scaled {
        Ok((s, ps)) => (ps, bal, s),
        Err(Error::ZeroCoefficientNorm(_)) => (pb, bal, ScalingParams::identity()),
        Err(e) => return Err(e),
    })
}

pub fn solve(p: &QuadPencil, opts: &SolveOptions) -> Result<QepSolution> {
    solve_with_backend(p, opts, &ReferenceBackend::new(opts.seed))
}

pub fn solve_with_backend(
    p: &QuadPencil,
    opts: &SolveOptions,
    backend: &dyn GeneralizedEigensolver,
) -> Result<QepSolution> {
    opts.validate()?;
    let (ps, balancing, scaling) = preprocess(p, opts)?;
    let ro = ReduceOptions {
        rank: opts.rank_options(&ps),
        pencil_rank: opts.pencil_rank_options(&ps),
        mode: opts.mode,
    };
    let reduced = global_reduce(&ps, &ro)?;
    let core = if reduced.core_dim() == 0 {
        GeneralizedEigenPairs {
            alphas: vec![],
            betas: vec![],
            right_vecs: ComplexMatrix::zeros(0, 0),
            left_vecs: ComplexMatrix::zeros(0, 0),
            shift: C64::new(0.0, 0.0),
        }
    } else {
        backend.solve_generalized(&reduced.pencil.a, &reduced.pencil.b, true)?
    };
    let undo = Undo {
        gamma: scaling.gamma,
        left_scale: balancing.left_scale(),
        right_scale: balancing.right_scale(),
    };
    let pairs = recover(p, &reduced, &core, &undo)?;
    Ok(QepSolution {
        n: p.n(),
        pairs,
        ledger: DeflationLedger::of(&reduced),
        scaling,
        balancing,
        options: opts.clone(),
        backend: backend.name().to_string(),
        shift: core.shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::mobile_manipulator;
    use crate::testutil::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn mobile_manipulator_default() {
        let s = solve(&mobile_manipulator(), &SolveOptions::default()).unwrap();
        assert_eq!(s.pairs.len(), 10);
        assert_eq!((s.finite_count(), s.infinite_count()), (2, 8));
        let want = C64::new(-5.161621336216381e-02, 2.243476109085836e-01);
        for l in s.finite_values() {
            let l = if l.im > 0.0 { l } else { l.conj() };
            assert!((l - want).norm() <= 1e-8 * want.norm(), "{l}");
        }
        for p in &s.pairs {
            assert!(p.eta_right <= 1e-13, "{p:?}");
            if p.value.is_finite() {
                assert!(p.omega_right <= 1e-12, "{}", p.omega_right);
            }
        }
    }

    #[test]
    fn mobile_manipulator_all_preprocessing_variants() {
        for scale in [
            ScalingKind::None,
            ScalingKind::Flv,
            ScalingKind::TropicalPlus,
            ScalingKind::TropicalMinus,
        ] {
            for bal in [false, true] {
                let o = SolveOptions {
                    scale,
                    balance: bal,
                    ..SolveOptions::default()
                };
                let s = solve(&mobile_manipulator(), &o).unwrap();
                assert_eq!(
                    (s.finite_count(), s.infinite_count()),
                    (2, 8),
                    "{scale:?} {bal}"
                );
            }
        }
    }

    #[test]
    fn identity_triple() {
        let i3 = ComplexMatrix::identity(3);
        let p = QuadPencil::new(i3.clone(), i3.clone(), i3).unwrap();
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(s.finite_count(), 6);
        let r3 = 3f64.sqrt() / 2.0;
        for pair in &s.pairs {
            let l = pair.value.value().unwrap();
            assert!(
                (l.re + 0.5).abs() < 1e-12 && (l.im.abs() - r3).abs() < 1e-12,
                "{l}"
            );
            assert!(pair.eta_right <= 1e-12 && pair.eta_left <= 1e-12);
        }
    }

    #[test]
    fn zero_eigenvector_is_null_vector_of_k() {
        let i2 = ComplexMatrix::identity(2);
        let k = ComplexMatrix::from_diag(&[c(1.0), c(0.0)]);
        let p = QuadPencil::new(i2.clone(), i2, k).unwrap();
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(s.ledger.case, CaseTag::OneSingularFullRank);
        let z: Vec<_> = s
            .pairs
            .iter()
            .filter(|q| q.value == EigenValue::Zero)
            .collect();
        assert_eq!(z.len(), 1);
        assert!((z[0].right_vec[1] - c(1.0)).norm() < 1e-15 && z[0].right_vec[0].norm() < 1e-15);
    }

    #[test]
    fn winner_is_minimum_of_candidates() {
        let mut r = rng(4);
        for n in 2..7 {
            let p = QuadPencil::new(
                random_matrix(&mut r, n, n),
                random_matrix(&mut r, n, n),
                random_matrix(&mut r, n, n),
            )
            .unwrap();
            let s = solve(&p, &SolveOptions::default()).unwrap();
            for pair in &s.pairs {
                let best = pair
                    .right_candidates
                    .iter()
                    .map(|c| c.eta)
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(pair.eta_right, best);
                assert!(
                    pair.eta_right <= 1e-10 && pair.eta_left <= 1e-10,
                    "{pair:?}"
                );
            }
        }
    }

    #[test]
    fn invalid_options_rejected() {
        let i1 = ComplexMatrix::identity(1);
        let p = QuadPencil::new(i1.clone(), i1.clone(), i1).unwrap();
        let o = SolveOptions {
            tau: Some(-1.0),
            ..SolveOptions::default()
        };
        assert!(matches!(solve(&p, &o), Err(Error::InvalidOptions(_))));
        let o = SolveOptions {
            balance_weights: [0.0; 3],
            ..SolveOptions::default()
        };
        assert!(matches!(solve(&p, &o), Err(Error::InvalidOptions(_))));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = mobile_manipulator();
        let a = serde_json::to_string(&solve(&p, &SolveOptions::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&solve(&p, &SolveOptions::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
