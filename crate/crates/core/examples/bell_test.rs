//! Coincidence fringes and the CHSH parameter under dephasing.
//!
//!     cargo run --example bell_test -- 0.91

use std::f64::consts::{PI, SQRT_2};

use skyrmion_circuit::circuit::{apply_noise, NoiseChannel};
use skyrmion_circuit::measurement::{
    chsh_from_counts, chsh_s, coherence_length, coincidence_curve, fitted_visibility, simulate_chsh_counts,
    uniform_angles, ChshAngles,
};
use skyrmion_circuit::DensityMatrix;

fn main() {
    let p: f64 = std::env::args().nth(1).map_or(0.91, |s| s.parse().expect("p"));
    let rho = apply_noise(&DensityMatrix::hybrid_target(0.0), &NoiseChannel::Dephasing { p }).unwrap();

    let theta_a = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    let theta_b = uniform_angles(72);
    let curves = coincidence_curve(&rho, &theta_a, &theta_b, 1e4, 0.0, 7).unwrap();
    for (a, trace) in curves.fringes() {
        let (t, n): (Vec<f64>, Vec<f64>) = trace.iter().map(|&(b, c)| (b, c as f64)).unzip();
        let peak = trace.iter().max_by_key(|x| x.1).unwrap();
        println!(
            "theta_A = {a:.3}: V = {:.3}, peak {} counts at theta_B = {:.3}",
            fitted_visibility(&t, &n).unwrap(),
            peak.1,
            peak.0
        );
    }

    let angles = ChshAngles::default();
    let est = chsh_from_counts(&simulate_chsh_counts(&rho, &angles, 1e5, 0.0, 11).unwrap(), &angles).unwrap();
    println!("S = {:.3} +/- {:.3} (exact {:.4}, 2*sqrt2*p = {:.4})", est.s, est.sigma, chsh_s(&rho, &angles), 2.0 * SQRT_2 * p);
    println!("coherence length at 810 nm / 10 nm: {:.1} um", coherence_length(810.0, 10.0).unwrap());
}
