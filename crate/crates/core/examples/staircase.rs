//! Recover the Jordan structure at zero of a scrambled pencil `a - λb`.
//! The hidden structure has blocks of sizes 3, 2 and 1 at zero plus two
//! nonzero eigenvalues.

use kvadeig::deflation::{staircase, StaircaseHints};
use kvadeig::qr::RankOptions;
use kvadeig::{ComplexMatrix, C64};

fn rotation(n: usize, t: f64) -> ComplexMatrix {
    // Product of plane rotations (i, i+1); a fixed, dense unitary.
    let mut u = ComplexMatrix::identity(n);
    for i in 0..n - 1 {
        let (c, s) = ((t * (i + 1) as f64).cos(), (t * (i + 1) as f64).sin());
        let mut g = ComplexMatrix::identity(n);
        g[(i, i)] = C64::new(c, 0.0);
        g[(i, i + 1)] = C64::new(0.0, s);
        g[(i + 1, i)] = C64::new(0.0, s);
        g[(i + 1, i + 1)] = C64::new(c, 0.0);
        u = u.matmul(&g);
    }
    u
}

fn main() -> kvadeig::Result<()> {
    let n = 8;
    let mut j = ComplexMatrix::zeros(n, n);
    for (i, k) in [(0, 1), (1, 2), (3, 4)] {
        j[(i, k)] = C64::new(1.0, 0.0);
    }
    j[(6, 6)] = C64::new(2.0, 0.0);
    j[(7, 7)] = C64::new(-0.5, 1.0);
    let x = rotation(n, 0.7);
    let y = rotation(n, 1.3).adjoint();
    let a = x.matmul(&j).matmul(&y);
    let b = x.matmul(&y);

    let reference = a.norm_fro().max(b.norm_fro());
    let (profile, red) = staircase(
        &a,
        &b,
        &StaircaseHints::none(),
        RankOptions::global_triple_norm(1e-12, reference),
    )?;
    println!("staircase block sizes s_j   {:?}", profile.s);
    println!("active dimensions n_j       {:?}", profile.n_seq);
    println!(
        "Jordan blocks of size 1,2,..{:?}",
        profile.elementary_divisors()
    );
    let (ca, cb) = red.core();
    println!("regular core of size {}", ca.rows());
    for i in 0..ca.rows() {
        println!("  a/b on the diagonal: {:.6}", ca[(i, i)] / cb[(i, i)]);
    }
    println!(
        "equivalence residual {:.1e}",
        red.equivalence_residual(&a, &b)
    );
    Ok(())
}
