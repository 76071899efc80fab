//! LU factorization with partial pivoting.

use crate::matrix::{ComplexMatrix, C64, ZERO};

#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Panics on non-square input.
    pub fn new(a: &ComplexMatrix) -> Self {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n).fold(k, |best, i| {
                if lu[(i, k)].norm() > lu[(best, k)].norm() {
                    i
                } else {
                    best
                }
            });
            if p != k {
                lu.swap_rows(p, k);
                piv.swap(p, k);
                sign = -sign;
            }
            let d = lu[(k, k)];
            if d == ZERO {
                continue;
            }
            for i in k + 1..n {
                lu[(i, k)] /= d;
            }
            for j in k + 1..n {
                let t = lu[(k, j)];
                if t == ZERO {
                    continue;
                }
                for i in k + 1..n {
                    let l = lu[(i, k)];
                    lu[(i, j)] -= l * t;
                }
            }
        }
        Self { lu, piv, sign }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn is_singular(&self) -> bool {
        (0..self.dim()).any(|i| self.lu[(i, i)] == ZERO)
    }

    pub fn det(&self) -> C64 {
        (0..self.dim()).fold(C64::new(self.sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solve `A x = b`; `None` when `A` is exactly singular.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        if self.is_singular() {
            return None;
        }
        let n = self.dim();
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let d = self.lu[(i, k)] * x[k];
                x[i] -= d;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let d = self.lu[(i, k)] * x[k];
                x[i] -= d;
            }
            x[i] /= self.lu[(i, i)];
        }
        Some(x)
    }

    /// Solve `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Option<Vec<C64>> {
        if self.is_singular() {
            return None;
        }
        let n = self.dim();
        // With P A = L U: Aᴴ = Uᴴ Lᴴ P, so solve Uᴴ Lᴴ (P x) = b.
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let d = self.lu[(k, i)].conj() * y[k];
                y[i] -= d;
            }
            y[i] /= self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let d = self.lu[(k, i)].conj() * y[k];
                y[i] -= d;
            }
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.piv.iter().enumerate() {
            x[p] = y[i];
        }
        Some(x)
    }

    pub fn solve_matrix(&self, b: &ComplexMatrix) -> Option<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(b.col(j))?;
            out.col_mut(j).copy_from_slice(&x);
        }
        Some(out)
    }

    pub fn inverse(&self) -> Option<ComplexMatrix> {
        self.solve_matrix(&ComplexMatrix::identity(self.dim()))
    }
}

/// 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`, infinite when singular.
pub fn condition_one(a: &ComplexMatrix) -> f64 {
    let lu = Lu::new(a);
    match lu.inverse() {
        Some(inv) if inv.is_finite() => a.norm_one() * inv.norm_one(),
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;
    use crate::testutil::*;

    #[test]
    fn solves_and_adjoint_solves() {
        let mut r = rng(9);
        let a = random_matrix(&mut r, 6, 6);
        let x = random_vector(&mut r, 6);
        let lu = Lu::new(&a);
        let y = lu.solve(&a.mul_vec(&x)).unwrap();
        let z = lu.solve_adjoint(&a.adjoint_mul_vec(&x)).unwrap();
        for i in 0..6 {
            assert!((y[i] - x[i]).norm() < 1e-12);
            assert!((z[i] - x[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = ComplexMatrix::from_real_rows(&[&[1., 2.], &[2., 4.]]);
        assert!(Lu::new(&a).solve(&[ONE, ONE]).is_none());
        assert_eq!(condition_one(&a), f64::INFINITY);
        assert!((condition_one(&ComplexMatrix::identity(3)) - 1.0).abs() < 1e-15);
    }
}
