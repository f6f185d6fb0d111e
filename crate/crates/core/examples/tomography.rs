//! 36-setting tomography and maximum-likelihood reconstruction.
//!
//!     cargo run --example tomography -- 0.88 10000

use skyrmion_circuit::circuit::{apply_noise, NoiseChannel};
use skyrmion_circuit::tomography::{mle_reconstruct, simulate_tomography, MleOptions};
use skyrmion_circuit::DensityMatrix;

fn main() {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(0.88, |s| s.parse().expect("p"));
    let n0: f64 = args.next().map_or(1e4, |s| s.parse().expect("n0"));

    let chi = std::f64::consts::FRAC_PI_6;
    let truth = apply_noise(&DensityMatrix::hybrid_target(chi), &NoiseChannel::Dephasing { p }).unwrap();
    let counts = simulate_tomography(&truth, n0, 0.0, 2024).unwrap();
    println!("simulated {} settings, {} coincidences", counts.len(), counts.total());

    let result = mle_reconstruct(
        &counts,
        &MleOptions {
            target: Some(DensityMatrix::hybrid_target(chi)),
            ..Default::default()
        },
    )
    .unwrap();
    print!("{}", result.to_report());
    println!("expected for p = {p}: F = {:.4}, purity = {:.4}, C = {p:.4}", (1.0 + p) / 2.0, (1.0 + p * p) / 2.0);
}
