//! Built-in test problems.

use crate::linearization::QuadPencil;
use crate::matrix::ComplexMatrix;

/// Three-link planar mobile manipulator linearized at a working point
/// (n = 5). M and C are zero outside the leading 3×3 block; the last two
/// rows and columns of K carry the constraint `F₀ = [1 0 0; 0 0 1]`.
pub fn mobile_manipulator() -> QuadPencil {
    let m0 = [
        [18.7532, -7.94493, 7.94494],
        [-7.94493, 31.8182, -26.8182],
        [7.94494, -26.8182, 26.8182],
    ];
    let c0 = [
        [-1.52143, -1.55168, 1.55168],
        [3.22064, 3.28467, -3.28467],
        [-3.22064, -3.28467, 3.28467],
    ];
    let k0 = [
        [67.4894, 69.2393, -69.2393],
        [69.8124, 1.68624, -1.68617],
        [-69.8123, -1.68617, -68.2707],
    ];
    let f0 = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    let lead = |x: &[[f64; 3]; 3]| {
        ComplexMatrix::from_fn(5, 5, |i, j| {
            if i < 3 && j < 3 {
                x[i][j].into()
            } else {
                0.0.into()
            }
        })
    };
    let mut k = lead(&k0);
    for r in 0..2 {
        for j in 0..3 {
            k[(3 + r, j)] = f0[r][j].into();
            k[(j, 3 + r)] = (-f0[r][j]).into();
        }
    }
    QuadPencil::new(lead(&m0), lead(&c0), k).expect("fixture is a valid triple")
}
