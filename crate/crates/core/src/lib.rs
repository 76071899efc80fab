//! Complete solution of dense quadratic eigenvalue problems
//! `(λ²M + λC + K)x = 0`.

pub mod backend;
pub mod cli;
pub mod cod;
pub mod deflation;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linearization;
pub mod lu;
pub mod matrix;
pub mod qr;
pub mod recovery;
pub mod scaling;
pub mod solver;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Permutation, C64};
