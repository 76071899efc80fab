//! Write a triple as three Matrix Market files and as a JSON bundle, read
//! both back, solve, and print the CSV report.

use kvadeig::cli::{run, Format, RunConfig};
use kvadeig::fixtures::mobile_manipulator;
use kvadeig::io::{bundle_string, load_bundle, load_triple, matrix_market_string, save_triple};

fn main() -> kvadeig::Result<()> {
    let dir = std::env::temp_dir().join("kvadeig-file-formats");
    let p = mobile_manipulator();

    save_triple(&p, &dir)?;
    let from_mtx = load_triple(&dir.join("M.mtx"), &dir.join("C.mtx"), &dir.join("K.mtx"))?;
    std::fs::write(dir.join("problem.json"), bundle_string(&p))?;
    let from_json = load_bundle(&dir.join("problem.json"))?;
    println!("round trips exact: {} {}", from_mtx == p, from_json == p);
    println!("M as Matrix Market:\n{}", matrix_market_string(p.m()));

    let report = run(&RunConfig::default(), &from_mtx)?;
    print!("{}", report.render(Format::Csv));
    println!("files in {}", dir.display());
    Ok(())
}
