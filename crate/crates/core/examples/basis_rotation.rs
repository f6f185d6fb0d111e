//! Polarization rotations after the interferometer leave N unchanged.
//!
//!     cargo run --release --example basis_rotation

use std::f64::consts::PI;

use skyrmion_circuit::circuit::{hwp_jones, qwp_jones};
use skyrmion_circuit::qmath::pauli_x;
use skyrmion_circuit::topology::{basis_rotation, skyrmion_number, stokes_field, GridSpec};
use skyrmion_circuit::DensityMatrix;

fn main() {
    let (ell1, ell2) = (2, 0);
    let rho = DensityMatrix::hybrid_target(0.0);
    let grid = GridSpec::new(256, 6.0);
    let base = stokes_field(&rho, ell1, ell2, 1.0, grid).unwrap();
    println!("unrotated: N = {:.4}", skyrmion_number(&base).unwrap());

    let centre = (grid.n / 2) * grid.n + grid.n / 2;
    for (name, u) in [
        ("sigma_x", pauli_x()),
        ("HWP(pi/8)", hwp_jones(PI / 8.0)),
        ("QWP(pi/4)", qwp_jones(PI / 4.0)),
    ] {
        let rotated = basis_rotation(&rho, &u).unwrap();
        let field = stokes_field(&rotated, ell1, ell2, 1.0, grid).unwrap();
        let s = field.unit_vectors()[centre];
        println!(
            "{name:>10}: N = {:.4}, centre S = ({:+.3}, {:+.3}, {:+.3})",
            skyrmion_number(&field).unwrap(),
            s[0],
            s[1],
            s[2]
        );
    }
}
