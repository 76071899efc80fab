//! Eigenvalue parameter scaling and power-of-ten diagonal balancing of the
//! coefficient triple.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::QuadPencil;
use crate::matrix::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingKind {
    None,
    Flv,
    TropicalPlus,
    TropicalMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TropicalBranch {
    Plus,
    Minus,
}

/// `λ = γμ`; the scaled triple is `(γ²δM, γδC, δK)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub gamma: f64,
    pub delta: f64,
    pub kind: ScalingKind,
    /// `‖C‖₂ / sqrt(‖M‖₂‖K‖₂)`.
    pub tau_q: f64,
    pub norm_m: f64,
    pub norm_c: f64,
    pub norm_k: f64,
}

impl ScalingParams {
    pub fn identity() -> Self {
        Self {
            gamma: 1.0,
            delta: 1.0,
            kind: ScalingKind::None,
            tau_q: 0.0,
            norm_m: 0.0,
            norm_c: 0.0,
            norm_k: 0.0,
        }
    }
}

fn norms(p: &QuadPencil) -> Result<(f64, f64, f64)> {
    let (nm, nc, nk) = (p.m().norm2(), p.c().norm2(), p.k().norm2());
    if nm == 0.0 {
        return Err(Error::ZeroCoefficientNorm("M"));
    }
    if nk == 0.0 {
        return Err(Error::ZeroCoefficientNorm("K"));
    }
    Ok((nm, nc, nk))
}

pub fn apply_scaling(p: &QuadPencil, s: &ScalingParams) -> QuadPencil {
    let g = s.gamma;
    let d = s.delta;
    QuadPencil::from_parts(
        p.m().scale_real(g * g * d),
        p.c().scale_real(g * d),
        p.k().scale_real(d),
    )
}

/// `γ = sqrt(‖K‖₂/‖M‖₂)`, `δ = 2/(‖K‖₂ + ‖C‖₂γ)`.
pub fn flv_scale(p: &QuadPencil) -> Result<(ScalingParams, QuadPencil)> {
    let (nm, nc, nk) = norms(p)?;
    let gamma = (nk / nm).sqrt();
    let delta = 2.0 / (nk + nc * gamma);
    let params = ScalingParams {
        gamma,
        delta,
        kind: ScalingKind::Flv,
        tau_q: nc / (nm * nk).sqrt(),
        norm_m: nm,
        norm_c: nc,
        norm_k: nk,
    };
    Ok((params, apply_scaling(p, &params)))
}

/// Scaling by a tropical root of `max(‖M‖₂x², ‖C‖₂x, ‖K‖₂)`.
pub fn tropical_scale(
    p: &QuadPencil,
    branch: TropicalBranch,
) -> Result<(ScalingParams, QuadPencil)> {
    let (nm, nc, nk) = norms(p)?;
    let tau_q = nc / (nm * nk).sqrt();
    let gamma = if tau_q <= 1.0 {
        (nk / nm).sqrt()
    } else {
        match branch {
            TropicalBranch::Plus => nc / nm,
            TropicalBranch::Minus => nk / nc,
        }
    };
    let q_trop = (nm * gamma * gamma).max(nc * gamma).max(nk);
    let params = ScalingParams {
        gamma,
        delta: 1.0 / q_trop,
        kind: match branch {
            TropicalBranch::Plus => ScalingKind::TropicalPlus,
            TropicalBranch::Minus => ScalingKind::TropicalMinus,
        },
        tau_q,
        norm_m: nm,
        norm_c: nc,
        norm_k: nk,
    };
    Ok((params, apply_scaling(p, &params)))
}

/// Outcome of the exponent fit for `D_l Q(λ) D_r`, `D = diag(10^e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancingDiagonals {
    pub left_exponents: Vec<i32>,
    pub right_exponents: Vec<i32>,
    pub weights: [f64; 3],
    pub objective_before: f64,
    pub objective_after: f64,
    /// Real-valued minimum-norm solution before rounding.
    pub real_left: Vec<f64>,
    pub real_right: Vec<f64>,
    /// `‖Lx - p‖ / ‖p‖` of the real solution.
    pub normal_residual: f64,
}

pub const MAX_EXPONENT: i32 = 64;

impl BalancingDiagonals {
    pub fn identity(n: usize) -> Self {
        Self {
            left_exponents: vec![0; n],
            right_exponents: vec![0; n],
            weights: [1.0; 3],
            objective_before: 0.0,
            objective_after: 0.0,
            real_left: vec![0.0; n],
            real_right: vec![0.0; n],
            normal_residual: 0.0,
        }
    }

    pub fn left_scale(&self) -> Vec<f64> {
        self.left_exponents.iter().map(|&e| 10f64.powi(e)).collect()
    }

    pub fn right_scale(&self) -> Vec<f64> {
        self.right_exponents
            .iter()
            .map(|&e| 10f64.powi(e))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.left_exponents
            .iter()
            .chain(&self.right_exponents)
            .all(|&e| e == 0)
    }
}

fn weighted(p: &QuadPencil, w: [f64; 3]) -> [(&ComplexMatrix, f64); 3] {
    [(p.m(), w[0]), (p.c(), w[1]), (p.k(), w[2])]
}

/// `φ(l, r) = Σ α (l_i + r_j + log10|x_ij|)²` over the nonzeros of M, C, K.
pub fn balancing_objective(p: &QuadPencil, weights: [f64; 3], l: &[f64], r: &[f64]) -> f64 {
    let n = p.n();
    let mut phi = 0.0;
    for (x, a) in weighted(p, weights) {
        if a == 0.0 {
            continue;
        }
        for j in 0..n {
            for i in 0..n {
                let v = x[(i, j)].norm();
                if v != 0.0 {
                    let t = l[i] + r[j] + v.log10();
                    phi += a * t * t;
                }
            }
        }
    }
    phi
}

/// The normal equations `L x = p` of the exponent least-squares problem,
/// returned as a dense row-major `2n×2n` matrix and right-hand side.
pub fn balancing_normal_equations(p: &QuadPencil, weights: [f64; 3]) -> (Vec<f64>, Vec<f64>) {
    let n = p.n();
    let dim = 2 * n;
    let mut l = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for (x, a) in weighted(p, weights) {
        if a == 0.0 {
            continue;
        }
        for j in 0..n {
            for i in 0..n {
                let v = x[(i, j)].norm();
                if v == 0.0 {
                    continue;
                }
                let lg = v.log10();
                l[i * dim + i] += a;
                l[(n + j) * dim + n + j] += a;
                l[i * dim + n + j] += a;
                l[(n + j) * dim + i] += a;
                rhs[i] -= a * lg;
                rhs[n + j] -= a * lg;
            }
        }
    }
    (l, rhs)
}

fn cholesky_solve(a: &[f64], dim: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut g = a.to_vec();
    for j in 0..dim {
        let mut d = g[j * dim + j];
        for k in 0..j {
            d -= g[j * dim + k] * g[j * dim + k];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        g[j * dim + j] = d;
        for i in j + 1..dim {
            let mut s = g[i * dim + j];
            for k in 0..j {
                s -= g[i * dim + k] * g[j * dim + k];
            }
            g[i * dim + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..dim {
        for k in 0..i {
            y[i] -= g[i * dim + k] * y[k];
        }
        y[i] /= g[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            y[i] -= g[k * dim + i] * y[k];
        }
        y[i] /= g[i * dim + i];
    }
    Some(y)
}

fn mat_vec(a: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|i| (0..dim).map(|k| a[i * dim + k] * x[k]).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fit integer exponents minimizing the balancing objective.
pub fn balance(p: &QuadPencil, weights: [f64; 3]) -> Result<BalancingDiagonals> {
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) || weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidOptions(format!(
            "balancing weights must be >= 0 and not all zero: {weights:?}"
        )));
    }
    if p.m().is_zero() && p.c().is_zero() && p.k().is_zero() {
        return Err(Error::EmptyPattern);
    }
    let n = p.n();
    let dim = 2 * n;
    let (l, rhs) = balancing_normal_equations(p, weights);
    let trace: f64 = (0..dim).map(|i| l[i * dim + i]).sum();
    let zeros = vec![0.0; n];
    let objective_before = balancing_objective(p, weights, &zeros, &zeros);
    if trace == 0.0 {
        let mut d = BalancingDiagonals::identity(n);
        d.weights = weights;
        d.objective_before = objective_before;
        d.objective_after = objective_before;
        return Ok(d);
    }
    let mu = 1e-12 * trace / dim as f64;
    let mut shifted = l.clone();
    for i in 0..dim {
        shifted[i * dim + i] += mu;
    }
    let mut x = cholesky_solve(&shifted, dim, &rhs).ok_or_else(|| {
        Error::InvalidOptions("balancing normal equations are not positive semidefinite".into())
    })?;
    for _ in 0..3 {
        let lx = mat_vec(&l, dim, &x);
        let res: Vec<f64> = rhs.iter().zip(&lx).map(|(b, y)| b - y).collect();
        if let Some(dx) = cholesky_solve(&shifted, dim, &res) {
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
    }
    // Minimum-norm representative: remove the drift along (1, -1) over the
    // rows and columns that carry at least one nonzero.
    let active: Vec<bool> = (0..dim).map(|i| l[i * dim + i] > 0.0).collect();
    let count = active.iter().filter(|&&a| a).count() as f64;
    let (mut sl, mut sr) = (0.0, 0.0);
    for i in 0..n {
        if active[i] {
            sl += x[i];
        }
        if active[n + i] {
            sr += x[n + i];
        }
    }
    let drift = (sl - sr) / count;
    for i in 0..n {
        x[i] = if active[i] { x[i] - drift } else { 0.0 };
        x[n + i] = if active[n + i] { x[n + i] + drift } else { 0.0 };
    }
    let lx = mat_vec(&l, dim, &x);
    let res: Vec<f64> = rhs.iter().zip(&lx).map(|(b, y)| b - y).collect();
    let pn = norm(&rhs);
    let normal_residual = if pn > 0.0 {
        norm(&res) / pn
    } else {
        norm(&res)
    };

    let round =
        |v: f64| (v.round() as i64).clamp(-(MAX_EXPONENT as i64), MAX_EXPONENT as i64) as i32;
    let mut left: Vec<i32> = x[..n].iter().map(|&v| round(v)).collect();
    let mut right: Vec<i32> = x[n..].iter().map(|&v| round(v)).collect();
    let lf: Vec<f64> = left.iter().map(|&e| e as f64).collect();
    let rf: Vec<f64> = right.iter().map(|&e| e as f64).collect();
    let mut objective_after = balancing_objective(p, weights, &lf, &rf);
    if objective_after > objective_before {
        left = vec![0; n];
        right = vec![0; n];
        objective_after = objective_before;
    }
    Ok(BalancingDiagonals {
        left_exponents: left,
        right_exponents: right,
        weights,
        objective_before,
        objective_after,
        real_left: x[..n].to_vec(),
        real_right: x[n..].to_vec(),
        normal_residual,
    })
}

/// `x_ij -> 10^{l_i} x_ij 10^{r_j}` for each coefficient.
pub fn apply_balancing(p: &QuadPencil, d: &BalancingDiagonals) -> Result<QuadPencil> {
    let n = p.n();
    if d.left_exponents.len() != n || d.right_exponents.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "balancing exponents of length {}/{} for n = {}",
            d.left_exponents.len(),
            d.right_exponents.len(),
            n
        )));
    }
    let f = |x: &ComplexMatrix| {
        ComplexMatrix::from_fn(n, n, |i, j| {
            x[(i, j)] * 10f64.powi(d.left_exponents[i] + d.right_exponents[j])
        })
    };
    Ok(QuadPencil::from_parts(f(p.m()), f(p.c()), f(p.k())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::testutil::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diag(&v.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    fn triple(m: ComplexMatrix, cc: ComplexMatrix, k: ComplexMatrix) -> QuadPencil {
        QuadPencil::new(m, cc, k).unwrap()
    }

    #[test]
    fn flv_examples() {
        let i3 = ComplexMatrix::identity(3);
        let (s, q) = flv_scale(&triple(i3.clone(), i3.clone(), i3.clone())).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-12 && (s.delta - 1.0).abs() < 1e-12);
        assert!((q.m() - &i3).max_abs() < 1e-12);

        let (s, _) = flv_scale(&triple(
            diag(&[4.0, 4.0]),
            ComplexMatrix::zeros(2, 2),
            diag(&[1.0, 1.0]),
        ))
        .unwrap();
        assert!((s.gamma - 0.5).abs() < 1e-12);
        assert!((s.delta - 2.0).abs() < 1e-12);

        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(
            flv_scale(&triple(z.clone(), diag(&[1.0, 1.0]), diag(&[1.0, 1.0]))).unwrap_err(),
            Error::ZeroCoefficientNorm("M")
        );
    }

    #[test]
    fn tropical_examples() {
        let i = diag(&[1.0, 1.0]);
        let p = triple(i.clone(), diag(&[2.0, 2.0]), i.clone());
        let (plus, _) = tropical_scale(&p, TropicalBranch::Plus).unwrap();
        let (minus, _) = tropical_scale(&p, TropicalBranch::Minus).unwrap();
        assert!((plus.tau_q - 2.0).abs() < 1e-12);
        assert!((plus.gamma - 2.0).abs() < 1e-12);
        assert!((minus.gamma - 0.5).abs() < 1e-12);
        assert!((plus.delta - 0.25).abs() < 1e-12);

        let p = triple(i.clone(), i.clone(), i.clone());
        let (plus, _) = tropical_scale(&p, TropicalBranch::Plus).unwrap();
        let (minus, _) = tropical_scale(&p, TropicalBranch::Minus).unwrap();
        assert!((plus.gamma - 1.0).abs() < 1e-12 && (minus.gamma - 1.0).abs() < 1e-12);

        let p = triple(i.clone(), diag(&[10.0, 10.0]), i.clone());
        let (plus, _) = tropical_scale(&p, TropicalBranch::Plus).unwrap();
        let (minus, _) = tropical_scale(&p, TropicalBranch::Minus).unwrap();
        assert!((plus.gamma * minus.gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_balancing() {
        let p = triple(diag(&[100.0]), diag(&[1.0]), diag(&[0.01]));
        let d = balance(&p, [1.0; 3]).unwrap();
        assert_eq!(d.left_exponents, vec![0]);
        assert_eq!(d.right_exponents, vec![0]);
        assert!((d.objective_after - 8.0).abs() < 1e-12);
        assert!(d.normal_residual < 1e-10);
    }

    #[test]
    fn unit_magnitudes_are_balanced() {
        let mut r = rng(8);
        let unit = |r: &mut rand_chacha::ChaCha8Rng| {
            ComplexMatrix::from_fn(3, 3, |_, _| {
                let z = random_c64(r);
                z / z.norm()
            })
        };
        let p = triple(unit(&mut r), unit(&mut r), unit(&mut r));
        let d = balance(&p, [1.0; 3]).unwrap();
        assert!(d.is_identity());
        assert!(d.objective_after.abs() < 1e-20);
    }

    #[test]
    fn two_variable_optimum() {
        let p = triple(
            diag(&[1e8, 1.0]),
            ComplexMatrix::zeros(2, 2),
            diag(&[1e-8, 1.0]),
        );
        let d = balance(&p, [1.0, 0.0, 1.0]).unwrap();
        let s = d.left_exponents[0] + d.right_exponents[0];
        assert!((-1..=1).contains(&s));
        assert!(d.objective_after <= d.objective_before);
    }

    #[test]
    fn minimum_norm_representative() {
        let mut r = rng(12);
        let m = grade_rows(&random_matrix(&mut r, 4, 4), &mut r, 6.0);
        let p = triple(m, random_matrix(&mut r, 4, 4), random_matrix(&mut r, 4, 4));
        let d = balance(&p, [1.0; 3]).unwrap();
        let sl: f64 = d.real_left.iter().sum();
        let sr: f64 = d.real_right.iter().sum();
        assert!((sl - sr).abs() < 1e-9);
        assert!(d.normal_residual < 1e-10);
        let shifted_l: Vec<f64> = d.real_left.iter().map(|x| x + 0.7).collect();
        let shifted_r: Vec<f64> = d.real_right.iter().map(|x| x - 0.7).collect();
        let a = balancing_objective(&p, [1.0; 3], &d.real_left, &d.real_right);
        let b = balancing_objective(&p, [1.0; 3], &shifted_l, &shifted_r);
        assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn apply_balancing_examples() {
        let p = triple(diag(&[5.0]), diag(&[1.0]), diag(&[1.0]));
        let mut d = BalancingDiagonals::identity(1);
        assert_eq!(apply_balancing(&p, &d).unwrap(), p);
        d.left_exponents = vec![1];
        d.right_exponents = vec![-1];
        assert_eq!(apply_balancing(&p, &d).unwrap().m()[(0, 0)], c(5.0));
        let bad = BalancingDiagonals::identity(2);
        assert!(matches!(
            apply_balancing(&p, &bad),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn all_zero_pattern_is_rejected_by_weights() {
        let p = triple(diag(&[1.0]), diag(&[1.0]), diag(&[1.0]));
        assert!(balance(&p, [0.0; 3]).is_err());
    }
}
