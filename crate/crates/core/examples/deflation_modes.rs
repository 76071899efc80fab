//! The same problem solved without deflation, with only the deflation
//! visible from the ranks of M and K, and with full deflation. Prints the
//! ω table that `kvadeig --compare` emits.

use kvadeig::cli::{compare, compare_table, RunConfig};
use kvadeig::fixtures::mobile_manipulator;

fn main() -> kvadeig::Result<()> {
    let runs = compare(&RunConfig::default(), &mobile_manipulator())?;
    for (name, r) in &runs {
        println!(
            "{name:>9}: finite {}  infinite {}  case {}",
            r.finite,
            r.infinite,
            r.ledger.case.label()
        );
    }
    println!();
    print!("{}", compare_table(&runs));
    Ok(())
}
