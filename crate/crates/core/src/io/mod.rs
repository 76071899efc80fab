//! Reading and writing coefficient triples.

mod bundle;
mod matrix_market;

use std::path::Path;

pub use bundle::{bundle_string, parse_bundle};
pub use matrix_market::{
    matrix_market_string, parse_matrix_market, read_matrix_market, write_matrix_market,
};

use crate::error::{Error, Result};
use crate::linearization::QuadPencil;

/// Three Matrix Market files holding M, C and K.
pub fn load_triple(m: &Path, c: &Path, k: &Path) -> Result<QuadPencil> {
    QuadPencil::new(
        read_matrix_market(m)?,
        read_matrix_market(c)?,
        read_matrix_market(k)?,
    )
}

pub fn load_bundle(path: &Path) -> Result<QuadPencil> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_bundle(&text)
}

/// Write `M.mtx`, `C.mtx` and `K.mtx` into `dir`.
pub fn save_triple(p: &QuadPencil, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, a) in [("M", p.m()), ("C", p.c()), ("K", p.k())] {
        std::fs::write(dir.join(format!("{name}.mtx")), matrix_market_string(a))?;
    }
    Ok(())
}
