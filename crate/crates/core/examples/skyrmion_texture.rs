//! Nonlocal Stokes texture, its skyrmion number and the Stokes phases.
//!
//!     cargo run --release --example skyrmion_texture -- 3 -2 field.txt

use std::f64::consts::PI;

use skyrmion_circuit::topology::{
    analyze_topology, stokes_phases, winding_number, GridSpec, StokesSampler,
};
use skyrmion_circuit::DensityMatrix;

fn main() {
    let mut args = std::env::args().skip(1);
    let ell1: i32 = args.next().map_or(3, |s| s.parse().expect("l1"));
    let ell2: i32 = args.next().map_or(-2, |s| s.parse().expect("l2"));
    let export = args.next();

    let rho = DensityMatrix::hybrid_target(0.0);
    let (field, report) = analyze_topology(&rho, ell1, ell2, 1.0, GridSpec::default()).unwrap();
    print!("{}", report.to_text(ell1, ell2));

    let phases = stokes_phases(&field);
    let n = field.n();
    let centre = (n / 2) * n + n / 2;
    println!("phi_xy near centre: {:.4}", phases.xy[centre]);

    let sampler = StokesSampler::new(&rho, ell1, ell2, 1.0).unwrap();
    let ring: Vec<f64> = (0..720)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / 720.0;
            let s = sampler.stokes(phi.cos(), phi.sin()).unit;
            s[1].atan2(s[0])
        })
        .collect();
    println!("phi_xy winding on r = w: {:+.0}", winding_number(&ring));

    if let Some(path) = export {
        std::fs::write(&path, field.to_text()).unwrap();
        println!("wrote {path}");
    }
}
