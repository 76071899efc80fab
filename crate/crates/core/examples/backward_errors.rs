//! Recovery of QEP eigenvectors from the linearization: the candidate
//! vectors tried for each eigenvalue, their backward errors, and the winner.
//! The triple has singular M and K, so zero and infinite eigenvalues are
//! deflated and get their vectors from null spaces.

use kvadeig::linearization::QuadPencil;
use kvadeig::recovery::{eta, omega_extended};
use kvadeig::solver::{solve, SolveOptions};
use kvadeig::ComplexMatrix;

fn main() -> kvadeig::Result<()> {
    let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[2.0, 4.0, 0.0], &[0.0, 1.0, 1.0]]);
    let c = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 1.0], &[0.0, 2.0, 1.0], &[1.0, 1.0, 3.0]]);
    let k = ComplexMatrix::from_real_rows(&[&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0], &[2.0, 0.0, 1.0]]);
    let p = QuadPencil::new(m, c, k)?;
    let s = solve(&p, &SolveOptions::default())?;
    println!(
        "case {}, {} zero, {} infinite",
        s.ledger.case.label(),
        s.zero_count(),
        s.infinite_count()
    );
    for q in &s.pairs {
        println!(
            "{:<8} {:>26}",
            q.value.tag(),
            q.value.value().map_or("∞".into(), |l| format!("{l:.6}"))
        );
        for cand in &q.right_candidates {
            println!(
                "    right {:<12} eta {:.1e}  omega {:.1e}",
                cand.label, cand.eta, cand.omega
            );
        }
        for cand in &q.left_candidates {
            println!("    left  {:<12} eta {:.1e}", cand.label, cand.eta);
        }
        // Recompute the winner's errors from scratch.
        let e = eta(&p, &q.value, &q.right_vec)?;
        let w = omega_extended(&p, &q.value, &q.right_vec);
        println!(
            "    chose {} / {}: eta {e:.1e}  omega {w:.1e}",
            q.right_source, q.left_source
        );
    }
    Ok(())
}
