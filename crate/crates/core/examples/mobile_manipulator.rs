//! Solve the 5×5 mobile manipulator model with default settings and print
//! every eigenpair with its backward errors.

use kvadeig::fixtures::mobile_manipulator;
use kvadeig::solver::{solve, SolveOptions};

fn main() -> kvadeig::Result<()> {
    let p = mobile_manipulator();
    let s = solve(&p, &SolveOptions::default())?;
    println!(
        "case {}  reversed {}  zero profile {:?}  inf profile {:?}  core {}",
        s.ledger.case.label(),
        s.ledger.reversed,
        s.ledger.zero_profile.s,
        s.ledger.inf_profile.s,
        s.ledger.core_dim
    );
    for (i, q) in s.pairs.iter().enumerate() {
        match q.value.value() {
            Some(l) if q.value.is_finite() => println!(
                "{i:2}  {:+.15e} {:+.15e}i  eta {:.1e}  omega {:.1e}  ({})",
                l.re, l.im, q.eta_right, q.omega_right, q.right_source
            ),
            _ => println!(
                "{i:2}  {:<44}  eta {:.1e}  ({})",
                q.value.tag(),
                q.eta_right,
                q.right_source
            ),
        }
    }
    Ok(())
}
