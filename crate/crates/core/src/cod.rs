//! Complete orthogonal decomposition `A = Q [T11 0; 0 0] Zᴴ` built from two
//! pivoted QR factorizations.

use crate::error::Result;
use crate::matrix::{ComplexMatrix, Permutation};
use crate::qr::{numerical_rank, qr_col_pivoted, RankOptions};

#[derive(Clone, Debug)]
pub struct CompleteOrthogonalDecomp {
    /// m×m unitary.
    pub q: ComplexMatrix,
    /// rank×rank lower triangular core.
    pub t11: ComplexMatrix,
    /// n×n unitary.
    pub z: ComplexMatrix,
    pub rank: usize,
    /// Truncation bound reported by the first-stage rank decision.
    pub truncation_bound: f64,
}

impl CompleteOrthogonalDecomp {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let m = self.q.rows();
        let n = self.z.rows();
        let mut mid = ComplexMatrix::zeros(m, n);
        mid.set_block(0, 0, &self.t11);
        self.q.matmul(&mid).matmul(&self.z.adjoint())
    }
}

/// Column-pivoted QR `Π_rᵀ A Π_c = Q [R₁; 0]`, truncation to the numerical
/// rank, then a second pivoted QR `Π₂ᵀ R₁ᴴ Π₁ = Z_R [T₁₁ᴴ; 0]`.
pub fn cod(a: &ComplexMatrix, opts: &RankOptions) -> Result<CompleteOrthogonalDecomp> {
    let m = a.rows();
    let n = a.cols();
    let f = qr_col_pivoted(a, opts);
    let verdict = numerical_rank(&f, opts)?;
    let k = verdict.rank;
    let r1 = f.r.block(0, 0, k, n);
    let g = qr_col_pivoted(&r1.adjoint(), opts);
    let t11 = g.r.block(0, 0, k, k).adjoint();
    let pi1 = g.col_perm.direct_sum(&Permutation::identity(m - k));
    let q = pi1.permute_cols(&f.left_unitary());
    let z = f.col_perm.left_mul(&g.left_unitary());
    Ok(CompleteOrthogonalDecomp {
        q,
        t11,
        z,
        rank: k,
        truncation_bound: verdict.truncation_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;
    use proptest::prelude::*;

    const EPS: f64 = f64::EPSILON;

    #[test]
    fn identity_has_full_rank() {
        let a = ComplexMatrix::identity(3);
        let d = cod(&a, &RankOptions::abs_matrix_norm(3.0 * EPS)).unwrap();
        assert_eq!(d.rank, 3);
        for i in 0..3 {
            assert!((d.t11[(i, i)].norm() - 1.0).abs() < 10.0 * EPS);
        }
        assert!((&a - &d.reconstruct()).norm_fro() <= 10.0 * EPS);
    }

    #[test]
    fn rank_one_ones_matrix() {
        let a = ComplexMatrix::from_real_rows(&[&[1., 1.], &[1., 1.]]);
        let d = cod(&a, &RankOptions::abs_matrix_norm(2.0 * EPS)).unwrap();
        assert_eq!(d.rank, 1);
        assert!((d.t11[(0, 0)].norm() - 2.0).abs() < 10.0 * EPS);
        assert!((&a - &d.reconstruct()).norm_fro() <= 20.0 * EPS);
    }

    #[test]
    fn constructed_rank_four() {
        let mut r = rng(5);
        let a = random_rank(&mut r, 6, 6, 4);
        let d = cod(&a, &RankOptions::abs_matrix_norm(6.0 * EPS)).unwrap();
        assert_eq!(d.rank, 4);
        assert!((&a - &d.reconstruct()).norm_fro() <= 20.0 * 36.0 * EPS * a.norm_fro());
        for i in 0..4 {
            assert!(d.t11[(i, i)].norm() > 0.0);
            for j in i + 1..4 {
                assert_eq!(d.t11[(i, j)].norm(), 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn rank_is_unitarily_invariant(seed in 0u64..5000, m in 2usize..8, n in 2usize..8) {
            let mut r = rng(seed);
            let k = (seed as usize) % m.min(n) + 1;
            let a = random_rank(&mut r, m, n, k);
            let u = random_unitary(&mut r, m);
            let v = random_unitary(&mut r, n);
            let opts = RankOptions::abs_matrix_norm(1e-12);
            let d0 = cod(&a, &opts).unwrap();
            let d1 = cod(&u.matmul(&a).matmul(&v), &opts).unwrap();
            prop_assert_eq!(d0.rank, k);
            prop_assert_eq!(d1.rank, k);
            prop_assert!(d1.q.unitarity_defect() < 1e-13 && d1.z.unitarity_defect() < 1e-13);
        }
    }
}
