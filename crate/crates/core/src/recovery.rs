//! Backward errors of quadratic eigenpairs and recovery of eigenvectors of
//! the original problem from the deflated pencil.

use serde::{Deserialize, Serialize};

use crate::backend::GeneralizedEigenPairs;
use crate::deflation::ReducedPencil;
use crate::error::{Error, Result};
use crate::linearization::QuadPencil;
use crate::matrix::{normalize_phase, vec_norm, ComplexMatrix, C64, ZERO};
use crate::qr::{qr_col_pivoted, PivotedQR, RankOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenValue {
    Finite(C64),
    /// Deflated (or exactly computed) zero.
    Zero,
    Infinite,
}

impl EigenValue {
    /// From homogeneous coordinates `λ = α/β`.
    pub fn from_projective(alpha: C64, beta: C64, gamma: f64) -> Self {
        if beta == ZERO {
            return EigenValue::Infinite;
        }
        if alpha == ZERO {
            return EigenValue::Zero;
        }
        let l = alpha / beta * gamma;
        if l.re.is_finite() && l.im.is_finite() {
            EigenValue::Finite(l)
        } else {
            EigenValue::Infinite
        }
    }

    /// The complex value, with `Zero` as 0 and `None` for infinity.
    pub fn value(&self) -> Option<C64> {
        match self {
            EigenValue::Finite(l) => Some(*l),
            EigenValue::Zero => Some(ZERO),
            EigenValue::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EigenValue::Finite(_))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            EigenValue::Finite(_) => "finite",
            EigenValue::Zero => "zero",
            EigenValue::Infinite => "infinite",
        }
    }

    pub fn modulus(&self) -> f64 {
        self.value().map_or(f64::INFINITY, |l| l.norm())
    }
}

/// Spectral norms `‖M‖₂, ‖C‖₂, ‖K‖₂`, computed once per problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientNorms {
    pub m: f64,
    pub c: f64,
    pub k: f64,
}

impl CoefficientNorms {
    pub fn of(p: &QuadPencil) -> Self {
        Self {
            m: p.m().norm2(),
            c: p.c().norm2(),
            k: p.k().norm2(),
        }
    }
}

fn residual(p: &QuadPencil, v: &EigenValue, x: &[C64], adjoint: bool) -> Vec<C64> {
    let mul = |a: &ComplexMatrix| {
        if adjoint {
            a.adjoint_mul_vec(x)
        } else {
            a.mul_vec(x)
        }
    };
    match v.value() {
        None => mul(p.m()),
        Some(l) => {
            let l = if adjoint { l.conj() } else { l };
            let (mx, cx, kx) = (mul(p.m()), mul(p.c()), mul(p.k()));
            (0..x.len())
                .map(|i| l * l * mx[i] + l * cx[i] + kx[i])
                .collect()
        }
    }
}

fn eta_impl(
    p: &QuadPencil,
    nrm: &CoefficientNorms,
    v: &EigenValue,
    x: &[C64],
    adjoint: bool,
) -> Result<f64> {
    let xn = vec_norm(x);
    if xn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let den = match v.value() {
        None => nrm.m,
        Some(l) => {
            let a = l.norm();
            a * a * nrm.m + a * nrm.c + nrm.k
        }
    } * xn;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(vec_norm(&residual(p, v, x, adjoint)) / den)
}

/// Normwise backward error `‖Q(λ)x‖ / ((|λ|²‖M‖ + |λ|‖C‖ + ‖K‖)‖x‖)`, with
/// `‖Mx‖ / (‖M‖‖x‖)` at infinity.
pub fn eta(p: &QuadPencil, v: &EigenValue, x: &[C64]) -> Result<f64> {
    eta_with(p, &CoefficientNorms::of(p), v, x)
}

pub fn eta_with(p: &QuadPencil, nrm: &CoefficientNorms, v: &EigenValue, x: &[C64]) -> Result<f64> {
    eta_impl(p, nrm, v, x, false)
}

/// The same functional for a left eigenvector, using `‖yᴴQ(λ)‖`.
pub fn eta_left(p: &QuadPencil, v: &EigenValue, y: &[C64]) -> Result<f64> {
    eta_left_with(p, &CoefficientNorms::of(p), v, y)
}

pub fn eta_left_with(
    p: &QuadPencil,
    nrm: &CoefficientNorms,
    v: &EigenValue,
    y: &[C64],
) -> Result<f64> {
    eta_impl(p, nrm, v, y, true)
}

fn componentwise(num: &[C64], den: &[f64]) -> f64 {
    num.iter().zip(den).fold(0.0, |acc, (r, d)| {
        let r = r.norm();
        let q = if r == 0.0 {
            0.0
        } else if *d == 0.0 {
            f64::INFINITY
        } else {
            r / d
        };
        acc.max(q)
    })
}

fn omega_impl(p: &QuadPencil, v: &EigenValue, x: &[C64], adjoint: bool) -> Result<f64> {
    let ax: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let absmul = |a: &ComplexMatrix| {
        if adjoint {
            a.adjoint().abs_mul_vec(&ax)
        } else {
            a.abs_mul_vec(&ax)
        }
    };
    let den: Vec<f64> = match v.value() {
        None => absmul(p.m()),
        Some(l) => {
            let a = l.norm();
            let (m, c, k) = (absmul(p.m()), absmul(p.c()), absmul(p.k()));
            (0..x.len())
                .map(|i| a * a * m[i] + a * c[i] + k[i])
                .collect()
        }
    };
    Ok(componentwise(&residual(p, v, x, adjoint), &den))
}

/// Componentwise backward error
/// `maxᵢ |Q(λ)x|ᵢ / ((|λ|²|M| + |λ||C| + |K|)|x|)ᵢ` for finite `λ`.
pub fn omega(p: &QuadPencil, v: &EigenValue, x: &[C64]) -> Result<f64> {
    if *v == EigenValue::Infinite {
        return Err(Error::InfiniteValueUnsupported);
    }
    omega_impl(p, v, x, false)
}

/// `omega`, extended to infinity through the reversed problem at 0, i.e.
/// `maxᵢ |Mx|ᵢ / (|M||x|)ᵢ`.
pub fn omega_extended(p: &QuadPencil, v: &EigenValue, x: &[C64]) -> f64 {
    omega_impl(p, v, x, false).unwrap_or(f64::INFINITY)
}

pub fn omega_left_extended(p: &QuadPencil, v: &EigenValue, y: &[C64]) -> f64 {
    omega_impl(p, v, y, true).unwrap_or(f64::INFINITY)
}

/// Backward errors of one candidate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub label: String,
    pub eta: f64,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QepEigenpair {
    pub value: EigenValue,
    pub right_vec: Vec<C64>,
    pub left_vec: Vec<C64>,
    pub eta_right: f64,
    pub eta_left: f64,
    pub omega_right: f64,
    pub omega_left: f64,
    /// Label of the winning right candidate.
    pub right_source: String,
    pub left_source: String,
    pub right_candidates: Vec<CandidateScore>,
    pub left_candidates: Vec<CandidateScore>,
    /// True for eigenvalues removed by deflation rather than computed.
    pub deflated: bool,
}

/// Preprocessing to undo: `x = D_r x̂`, `y = D_l ŷ`, `λ = γ λ̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct Undo {
    pub gamma: f64,
    pub left_scale: Vec<f64>,
    pub right_scale: Vec<f64>,
}

impl Undo {
    pub fn identity(n: usize) -> Self {
        Self {
            gamma: 1.0,
            left_scale: vec![1.0; n],
            right_scale: vec![1.0; n],
        }
    }
}

fn diag_mul(d: &[f64], x: &[C64]) -> Vec<C64> {
    d.iter().zip(x).map(|(s, z)| z * s).collect()
}

struct Scored {
    vec: Vec<C64>,
    score: CandidateScore,
}

fn score(
    p: &QuadPencil,
    nrm: &CoefficientNorms,
    v: &EigenValue,
    label: &str,
    raw: Vec<C64>,
    left: bool,
) -> Option<Scored> {
    let vec = normalize_phase(&raw)?;
    if !vec.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return None;
    }
    let (eta, omega) = if left {
        (
            eta_left_with(p, nrm, v, &vec),
            omega_left_extended(p, v, &vec),
        )
    } else {
        (eta_with(p, nrm, v, &vec), omega_extended(p, v, &vec))
    };
    // All weights vanish only when the residual does too.
    let eta = match eta {
        Err(Error::ZeroDenominator) => 0.0,
        e => e.ok()?,
    };
    Some(Scored {
        vec,
        score: CandidateScore {
            label: label.to_string(),
            eta,
            omega,
        },
    })
}

/// Smallest η, ties broken by ω, then by position.
fn pick(c: &[Scored]) -> Option<usize> {
    (0..c.len()).min_by(|&i, &j| {
        let (a, b) = (&c[i].score, &c[j].score);
        a.eta.total_cmp(&b.eta).then(a.omega.total_cmp(&b.omega))
    })
}

fn assemble(
    value: EigenValue,
    right: Vec<Scored>,
    left: Vec<Scored>,
    deflated: bool,
    n: usize,
) -> QepEigenpair {
    let rw = pick(&right);
    let lw = pick(&left);
    let take = |c: &[Scored], w: Option<usize>| match w {
        Some(i) => (
            c[i].vec.clone(),
            c[i].score.eta,
            c[i].score.omega,
            c[i].score.label.clone(),
        ),
        None => (
            vec![ZERO; n],
            f64::INFINITY,
            f64::INFINITY,
            "none".to_string(),
        ),
    };
    let (right_vec, eta_right, omega_right, right_source) = take(&right, rw);
    let (left_vec, eta_left, omega_left, left_source) = take(&left, lw);
    QepEigenpair {
        value,
        right_vec,
        left_vec,
        eta_right,
        eta_left,
        omega_right,
        omega_left,
        right_source,
        left_source,
        right_candidates: right.into_iter().map(|s| s.score).collect(),
        left_candidates: left.into_iter().map(|s| s.score).collect(),
        deflated,
    }
}

/// Orthonormal basis of the numerical null space of `A` from its pivoted QR
/// with rank `r`: the complement of the range of `R₁ᴴ`, mapped by `Π`.
pub fn null_basis_right(f: &PivotedQR, r: usize) -> ComplexMatrix {
    let n = f.cols();
    let r1 = f.r.block(0, 0, r, n);
    let g = qr_col_pivoted(&r1.adjoint(), &RankOptions::rel_diag(0.0));
    f.col_perm.left_mul(&g.left_unitary().block(0, r, n, n - r))
}

/// Basis of the numerical null space of `Aᴴ`: trailing columns of `Π_r Q`.
pub fn null_basis_left(f: &PivotedQR, r: usize) -> ComplexMatrix {
    let m = f.rows();
    f.left_unitary().block(0, r, m, m - r)
}

/// Solve `T₂₂ᴴ w = rhs` with `T₂₂` upper triangular.
fn lower_adjoint_solve(t: &ComplexMatrix, off: usize, rhs: &[C64]) -> Option<Vec<C64>> {
    let m = rhs.len();
    let mut w = vec![ZERO; m];
    for i in 0..m {
        let mut s = rhs[i];
        for j in 0..i {
            s -= t[(off + j, off + i)].conj() * w[j];
        }
        let d = t[(off + i, off + i)].conj();
        if d == ZERO {
            return None;
        }
        w[i] = s / d;
    }
    Some(w)
}

/// All `2n` eigenpairs of `original` from the reduction of its preprocessed
/// version and the backend solution `core` of the deflated pencil.
pub fn recover(
    original: &QuadPencil,
    reduced: &ReducedPencil,
    core: &GeneralizedEigenPairs,
    undo: &Undo,
) -> Result<Vec<QepEigenpair>> {
    let n = original.n();
    let k = reduced.core_dim();
    if core.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} core eigenpairs for a core of size {k}",
            core.len()
        )));
    }
    let nrm = CoefficientNorms::of(original);
    let q = reduced.q_total();
    let p = reduced.p_total();
    let big = q.rows();
    let qk = q.block(0, 0, big, k);
    let have_left = core.left_vecs.cols() == k && k > 0;
    let mut out = Vec::with_capacity(2 * n);

    for i in 0..k {
        let (ao, bo) = (core.alphas[i], core.betas[i]);
        let (a, b) = if reduced.reversed { (bo, ao) } else { (ao, bo) };
        let value = EigenValue::from_projective(a, b, undo.gamma);

        let z = qk.mul_vec(core.right_vecs.col(i));
        let mut right = vec![];
        let mut push_right = |label: &str, xh: &[C64]| {
            if let Some(s) = score(
                original,
                &nrm,
                &value,
                label,
                diag_mul(&undo.right_scale, xh),
                false,
            ) {
                right.push(s);
            }
        };
        push_right("z1", &z[..n]);
        if reduced.rank_k == n {
            if let Some(x) = reduced.qr_k.solve(&z[n..]) {
                push_right("K^-1 z2", &x);
            }
        }

        let mut left = vec![];
        if have_left {
            let t = &(&reduced.transformed_a.scale(bo) - &reduced.transformed_b.scale(ao));
            let u = core.left_vecs.col(i);
            let rhs: Vec<C64> = (k..big)
                .map(|c| -(0..k).fold(ZERO, |s, r| s + t[(r, c)].conj() * u[r]))
                .collect();
            if let Some(tail) = lower_adjoint_solve(t, k, &rhs) {
                let wt: Vec<C64> = u.iter().copied().chain(tail).collect();
                let w = p.adjoint_mul_vec(&wt);
                let mut push_left = |label: &str, yh: &[C64]| {
                    if let Some(s) = score(
                        original,
                        &nrm,
                        &value,
                        label,
                        diag_mul(&undo.left_scale, yh),
                        true,
                    ) {
                        left.push(s);
                    }
                };
                push_left("w2", &w[n..]);
                if ao != ZERO && bo != ZERO {
                    push_left("w1", &w[..n]);
                }
            }
        }
        out.push(assemble(value, right, left, false, n));
    }

    // Deflated eigenvalues take null vectors of K (zero) or M (infinity) of
    // the preprocessed problem, in its original orientation.
    let (fk, rk, fm, rm) = if reduced.reversed {
        (&reduced.qr_m, reduced.rank_m, &reduced.qr_k, reduced.rank_k)
    } else {
        (&reduced.qr_k, reduced.rank_k, &reduced.qr_m, reduced.rank_m)
    };
    for (value, count, f, r, label) in [
        (
            EigenValue::Zero,
            reduced.pencil.deflated_zero,
            fk,
            rk,
            "null(K)",
        ),
        (
            EigenValue::Infinite,
            reduced.pencil.deflated_inf,
            fm,
            rm,
            "null(M)",
        ),
    ] {
        if count == 0 {
            continue;
        }
        if r >= n {
            return Err(Error::BackendFailure(format!(
                "{count} deflated {} eigenvalues with a regular coefficient",
                value.tag()
            )));
        }
        let xr = null_basis_right(f, r);
        let yl = null_basis_left(f, r);
        let d = n - r;
        for j in 0..count {
            let right: Vec<Scored> = score(
                original,
                &nrm,
                &value,
                label,
                diag_mul(&undo.right_scale, xr.col(j % d)),
                false,
            )
            .into_iter()
            .collect();
            let left_label = format!("{label}^H");
            let left: Vec<Scored> = score(
                original,
                &nrm,
                &value,
                &left_label,
                diag_mul(&undo.left_scale, yl.col(j % d)),
                true,
            )
            .into_iter()
            .collect();
            out.push(assemble(value, right, left, true, n));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;

    const EPS: f64 = f64::EPSILON;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag_triple(m: &[f64], cc: &[f64], k: &[f64]) -> QuadPencil {
        let d = |v: &[f64]| ComplexMatrix::from_diag(&v.iter().map(|&x| c(x)).collect::<Vec<_>>());
        QuadPencil::new(d(m), d(cc), d(k)).unwrap()
    }

    #[test]
    fn eta_of_exact_diagonal_pair() {
        // Second coordinate: λ² - 3λ + 2 = (λ - 1)(λ - 2).
        let p = diag_triple(&[1.0, 1.0], &[1.0, -3.0], &[5.0, 2.0]);
        let x = [ZERO, ONE];
        let e = eta(&p, &EigenValue::Finite(c(2.0)), &x).unwrap();
        assert!(e <= 10.0 * EPS, "{e}");
        assert_eq!(omega(&p, &EigenValue::Finite(c(2.0)), &x).unwrap(), 0.0);
    }

    #[test]
    fn eta_at_infinity_is_m_residual() {
        let i2 = ComplexMatrix::identity(2);
        let p = QuadPencil::new(i2.clone(), i2.clone(), i2).unwrap();
        let e = eta(&p, &EigenValue::Infinite, &[ONE, ZERO]).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_at_zero_uses_k() {
        let p = diag_triple(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 4.0]);
        assert_eq!(eta(&p, &EigenValue::Zero, &[ONE, ZERO]).unwrap(), 0.0);
        let e = eta(&p, &EigenValue::Zero, &[ZERO, ONE]).unwrap();
        assert!((e - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eta_errors() {
        let p = diag_triple(&[1.0], &[1.0], &[1.0]);
        assert!(matches!(
            eta(&p, &EigenValue::Zero, &[ZERO]),
            Err(Error::ZeroVector)
        ));
        let p = diag_triple(&[1.0], &[1.0], &[0.0]);
        assert!(matches!(
            eta(&p, &EigenValue::Zero, &[ONE]),
            Err(Error::ZeroDenominator)
        ));
        assert!(matches!(
            omega(&p, &EigenValue::Infinite, &[ONE]),
            Err(Error::InfiniteValueUnsupported)
        ));
    }

    #[test]
    fn omega_conventions() {
        // Zero numerator in every component gives 0 even with zero weights.
        let p = diag_triple(&[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(
            omega(&p, &EigenValue::Finite(c(3.0)), &[ONE, ZERO]).unwrap(),
            0.0
        );
        // |Q(λ)x| <= (|λ|²|M| + |λ||C| + |K|)|x| componentwise, so ω <= 1.
        let m = ComplexMatrix::from_real_rows(&[&[0., 1.], &[0., 0.]]);
        let z = ComplexMatrix::zeros(2, 2);
        let p = QuadPencil::new(m, z.clone(), z).unwrap();
        assert_eq!(
            omega(&p, &EigenValue::Finite(c(1.0)), &[ONE, ONE]).unwrap(),
            1.0
        );
    }

    #[test]
    fn left_eta_uses_adjoint_residual() {
        // Non-normal K: right and left null vectors differ.
        let k = ComplexMatrix::from_real_rows(&[&[0., 1.], &[0., 0.]]);
        let i2 = ComplexMatrix::identity(2);
        let p = QuadPencil::new(i2.clone(), i2, k).unwrap();
        assert_eq!(eta_left(&p, &EigenValue::Zero, &[ZERO, ONE]).unwrap(), 0.0);
        assert!(eta_left(&p, &EigenValue::Zero, &[ONE, ZERO]).unwrap() > 0.5);
    }

    #[test]
    fn null_bases_of_rank_one() {
        let k = ComplexMatrix::from_real_rows(&[&[0., 1.], &[0., 0.]]);
        let f = qr_col_pivoted(&k, &RankOptions::abs_matrix_norm(1e-14));
        let x = null_basis_right(&f, 1);
        let y = null_basis_left(&f, 1);
        assert!((x[(0, 0)].norm() - 1.0).abs() < 1e-15 && x[(1, 0)].norm() < 1e-15);
        assert!((y[(1, 0)].norm() - 1.0).abs() < 1e-15 && y[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn from_projective_tags() {
        assert_eq!(
            EigenValue::from_projective(ONE, ZERO, 1.0),
            EigenValue::Infinite
        );
        assert_eq!(
            EigenValue::from_projective(ZERO, ONE, 2.0),
            EigenValue::Zero
        );
        assert_eq!(
            EigenValue::from_projective(c(1.0), c(2.0), 4.0),
            EigenValue::Finite(c(2.0))
        );
        assert_eq!(
            EigenValue::from_projective(c(1e300), c(1e-300), 1.0),
            EigenValue::Infinite
        );
    }
}
