//! Eigenvalue parameter scaling and diagonal balancing on a triple whose
//! entries span many orders of magnitude.

use kvadeig::linearization::QuadPencil;
use kvadeig::scaling::{apply_balancing, balance, flv_scale, tropical_scale, TropicalBranch};
use kvadeig::solver::{solve, SolveOptions};
use kvadeig::ComplexMatrix;

fn graded(base: &[&[f64]], rows: [f64; 3], cols: [f64; 3]) -> ComplexMatrix {
    let a = ComplexMatrix::from_real_rows(base);
    ComplexMatrix::from_fn(3, 3, |i, j| a[(i, j)] * rows[i] * cols[j])
}

fn main() -> kvadeig::Result<()> {
    let r = [1e4, 1.0, 1e-3];
    let c = [1e-2, 1e3, 1.0];
    let m = graded(
        &[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]],
        r,
        c,
    );
    let cm = graded(
        &[&[1.0, -1.0, 0.5], &[0.0, 2.0, 1.0], &[1.0, 0.0, 1.0]],
        r,
        c,
    )
    .scale_real(1e4);
    let k = graded(
        &[&[5.0, 0.0, 1.0], &[2.0, 1.0, 0.0], &[0.0, 3.0, 2.0]],
        r,
        c,
    )
    .scale_real(1e6);
    let p = QuadPencil::new(m, cm, k)?;

    let (s, _) = flv_scale(&p)?;
    println!(
        "‖M‖₂ {:.3e}  ‖C‖₂ {:.3e}  ‖K‖₂ {:.3e}  τ_Q {:.3e}",
        s.norm_m, s.norm_c, s.norm_k, s.tau_q
    );
    println!("FLV          γ {:.4e}  δ {:.4e}", s.gamma, s.delta);
    for b in [TropicalBranch::Plus, TropicalBranch::Minus] {
        let (t, _) = tropical_scale(&p, b)?;
        println!("tropical {b:?}  γ {:.4e}  δ {:.4e}", t.gamma, t.delta);
    }

    let d = balance(&p, [1.0; 3])?;
    println!(
        "left exponents {:?}  right exponents {:?}",
        d.left_exponents, d.right_exponents
    );
    println!(
        "objective {:.3} -> {:.3}",
        d.objective_before, d.objective_after
    );
    let pb = apply_balancing(&p, &d)?;
    println!(
        "max |entry| of M before {:.1e}, after {:.1e}",
        p.m().max_abs(),
        pb.m().max_abs()
    );

    for balance in [false, true] {
        let sol = solve(
            &p,
            &SolveOptions {
                balance,
                ..SolveOptions::default()
            },
        )?;
        let worst = sol.pairs.iter().map(|q| q.omega_right).fold(0.0, f64::max);
        println!("balance {balance:<5}  largest ω {worst:.1e}");
    }
    Ok(())
}
