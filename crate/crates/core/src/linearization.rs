//! Quadratic pencils, the second companion linearization, and reversal.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// The coefficient triple of `Q(λ) = λ²M + λC + K`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadPencil {
    m: ComplexMatrix,
    c: ComplexMatrix,
    k: ComplexMatrix,
}

impl QuadPencil {
    pub fn new(m: ComplexMatrix, c: ComplexMatrix, k: ComplexMatrix) -> Result<Self> {
        for x in [&m, &c, &k] {
            if !x.is_square() {
                return Err(Error::NonSquare {
                    rows: x.rows(),
                    cols: x.cols(),
                });
            }
        }
        if m.rows() != c.rows() || m.rows() != k.rows() {
            return Err(Error::DimensionMismatch(format!(
                "M is {0}x{0}, C is {1}x{1}, K is {2}x{2}",
                m.rows(),
                c.rows(),
                k.rows()
            )));
        }
        if m.rows() == 0 {
            return Err(Error::DimensionMismatch(
                "empty coefficient matrices".into(),
            ));
        }
        for x in [&m, &c, &k] {
            let n = x.rows();
            for j in 0..n {
                if let Some(i) = x
                    .col(j)
                    .iter()
                    .position(|z| !(z.re.is_finite() && z.im.is_finite()))
                {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        if m.is_zero() && c.is_zero() && k.is_zero() {
            return Err(Error::EmptyPattern);
        }
        Ok(Self { m, c, k })
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    pub fn m(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn k(&self) -> &ComplexMatrix {
        &self.k
    }

    /// `Q(λ)`.
    pub fn eval(&self, lambda: C64) -> ComplexMatrix {
        let l2 = lambda * lambda;
        ComplexMatrix::from_fn(self.n(), self.n(), |i, j| {
            l2 * self.m[(i, j)] + lambda * self.c[(i, j)] + self.k[(i, j)]
        })
    }

    /// `max(‖M‖_F, ‖C‖_F, ‖K‖_F)`.
    pub fn max_fro_norm(&self) -> f64 {
        self.m
            .norm_fro()
            .max(self.c.norm_fro())
            .max(self.k.norm_fro())
    }

    /// Build without validation, for internal transforms of a valid pencil.
    pub(crate) fn from_parts(m: ComplexMatrix, c: ComplexMatrix, k: ComplexMatrix) -> Self {
        Self { m, c, k }
    }
}

/// A linear pencil `A - λB` together with the unitaries applied so far:
/// `left_accum · (A₀ - λB₀) · right_accum = A - λB`.
#[derive(Clone, Debug)]
pub struct LinearPencil {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub left_accum: ComplexMatrix,
    pub right_accum: ComplexMatrix,
    pub deflated_zero: usize,
    pub deflated_inf: usize,
}

impl LinearPencil {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NonSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if !b.is_square() {
            return Err(Error::NonSquare {
                rows: b.rows(),
                cols: b.cols(),
            });
        }
        if a.rows() != b.rows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {0}x{0}, B is {1}x{1}",
                a.rows(),
                b.rows()
            )));
        }
        let n = a.rows();
        Ok(Self {
            a,
            b,
            left_accum: ComplexMatrix::identity(n),
            right_accum: ComplexMatrix::identity(n),
            deflated_zero: 0,
            deflated_inf: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }
}

/// `A = [[C, -I], [K, 0]]`, `B = [[-M, 0], [0, -I]]`.
pub fn build_c2(p: &QuadPencil) -> LinearPencil {
    let n = p.n();
    let mut a = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut b = ComplexMatrix::zeros(2 * n, 2 * n);
    a.set_block(0, 0, &p.c);
    a.set_block(n, 0, &p.k);
    b.set_block(0, 0, &p.m.scale_real(-1.0));
    for i in 0..n {
        a[(i, n + i)] = C64::new(-1.0, 0.0);
        b[(n + i, n + i)] = C64::new(-1.0, 0.0);
    }
    LinearPencil::new(a, b).expect("square by construction")
}

/// `(M, C, K) -> (K, C, M)`; eigenvalues map as `λ -> 1/λ`.
pub fn reverse(p: &QuadPencil) -> QuadPencil {
    QuadPencil {
        m: p.k.clone(),
        c: p.c.clone(),
        k: p.m.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lu::Lu;
    use crate::testutil::*;

    fn ones(n: usize) -> ComplexMatrix {
        ComplexMatrix::identity(n)
    }

    #[test]
    fn scalar_c2() {
        let p = QuadPencil::new(ones(1), ones(1), ones(1)).unwrap();
        let lp = build_c2(&p);
        assert_eq!(
            lp.a,
            ComplexMatrix::from_real_rows(&[&[1., -1.], &[1., 0.]])
        );
        assert_eq!(
            lp.b,
            ComplexMatrix::from_real_rows(&[&[-1., 0.], &[0., -1.]])
        );
        assert_eq!(lp.left_accum, ones(2));
    }

    #[test]
    fn zero_stiffness_gives_rank_n() {
        let mut r = rng(1);
        let p = QuadPencil::new(
            random_matrix(&mut r, 3, 3),
            random_matrix(&mut r, 3, 3),
            ComplexMatrix::zeros(3, 3),
        )
        .unwrap();
        let lp = build_c2(&p);
        assert!(lp.a.block(3, 0, 3, 6).is_zero());
        let f = crate::qr::qr_col_pivoted(&lp.a, &crate::qr::RankOptions::abs_matrix_norm(1e-13));
        assert_eq!(
            f.numerical_rank(&crate::qr::RankOptions::abs_matrix_norm(1e-13))
                .unwrap()
                .rank,
            3
        );
    }

    #[test]
    fn determinant_identity() {
        let mut r = rng(2);
        let p = QuadPencil::new(
            random_matrix(&mut r, 3, 3),
            random_matrix(&mut r, 3, 3),
            random_matrix(&mut r, 3, 3),
        )
        .unwrap();
        let lp = build_c2(&p);
        for _ in 0..5 {
            let l = random_c64(&mut r) * 2.0;
            let lin = &lp.a - &lp.b.scale(l);
            let d1 = Lu::new(&lin).det();
            let d2 = Lu::new(&p.eval(l)).det();
            // det(A - λB) = det(Q(λ)) for this sign convention.
            assert!(
                (d1 - d2).norm() <= 1e-9 * d2.norm().max(1e-300),
                "{d1} vs {d2}"
            );
        }
    }

    #[test]
    fn reverse_is_an_involution() {
        let mut r = rng(3);
        let p = QuadPencil::new(
            random_matrix(&mut r, 2, 2),
            random_matrix(&mut r, 2, 2),
            random_matrix(&mut r, 2, 2),
        )
        .unwrap();
        assert_eq!(reverse(&reverse(&p)), p);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            QuadPencil::new(ones(2), ones(3), ones(2)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            QuadPencil::new(ComplexMatrix::zeros(2, 3), ones(2), ones(2)),
            Err(Error::NonSquare { .. })
        ));
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(
            QuadPencil::new(z.clone(), z.clone(), z),
            Err(Error::EmptyPattern)
        );
    }
}
