//! Pivoted QR and the complete orthogonal decomposition on a rank-2 matrix
//! whose rows span eight orders of magnitude.

use kvadeig::cod::cod;
use kvadeig::qr::{qr_col_pivoted, RankOptions};
use kvadeig::{ComplexMatrix, C64};

fn main() -> kvadeig::Result<()> {
    let x = ComplexMatrix::from_real_rows(&[
        &[1.0, 2.0],
        &[0.5, -1.0],
        &[3.0, 0.0],
        &[1.0, 1.0],
        &[-2.0, 4.0],
    ]);
    let y = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 2.0, -1.0], &[0.0, 1.0, 1.0, 3.0]]);
    let grade = [1e4, 1.0, 1e-4, 10.0, 1e-2];
    let a0 = x.matmul(&y);
    let a = ComplexMatrix::from_fn(5, 4, |i, j| a0[(i, j)] * C64::new(grade[i], 0.0));

    let opts = RankOptions::abs_matrix_norm(4.0 * f64::EPSILON);
    let f = qr_col_pivoted(&a, &opts);
    let v = f.numerical_rank(&opts)?;
    let diag: Vec<String> = f.diag_abs.iter().map(|d| format!("{d:.2e}")).collect();
    println!("|R_kk| = {}", diag.join("  "));
    println!(
        "numerical rank {}  truncation bound {:.1e}",
        v.rank, v.truncation_bound
    );
    println!("row order after presort {:?}", f.row_perm.as_slice());

    let d = cod(&a, &opts)?;
    let err = (&d.reconstruct() - &a).norm_fro() / a.norm_fro();
    println!(
        "COD rank {}  relative reconstruction error {err:.1e}",
        d.rank
    );
    println!(
        "unitarity defect of Q {:.1e}, of Z {:.1e}",
        d.q.unitarity_defect(),
        d.z.unitarity_defect()
    );
    Ok(())
}
