//! SPDC OAM spectrum and the Laguerre–Gaussian modes it populates.
//!
//!     cargo run --example input_spectrum -- 2.0 6

use skyrmion_circuit::source::{build_input_state, spdc_spectrum, LgMode, SpectrumModel};

fn main() {
    let mut args = std::env::args().skip(1);
    let ell0: f64 = args.next().map_or(2.0, |s| s.parse().expect("ell0"));
    let cutoff: u32 = args.next().map_or(6, |s| s.parse().expect("cutoff"));

    let spectrum = spdc_spectrum(&SpectrumModel::Exponential { ell0 }, cutoff).unwrap();
    println!("exponential spectrum, ell0 = {ell0}, cutoff = {cutoff}");
    println!("{:>4} {:>10} {:>10}", "|l|", "c_l", "c_l^2");
    for (l, c) in spectrum.coefficients().iter().enumerate() {
        println!("{l:>4} {c:>10.6} {:>10.6}", c * c);
    }

    let input = build_input_state(&spectrum);
    println!("input state: {} terms |H, l>|-l>, norm {:.12}", input.dim(), input.norm());

    // radial profile peaks at r = w sqrt(|l|/2)
    for ell in [0, 1, 3] {
        let mode = LgMode::new(ell, 1.0);
        let (r_peak, _) = (0..=400)
            .map(|k| k as f64 * 0.01)
            .map(|r| (r, mode.amplitude(r, 0.0).norm()))
            .fold((0.0, 0.0), |best, x| if x.1 > best.1 { x } else { best });
        println!("LG l={ell}: intensity peak at r = {r_peak:.2} w (expected {:.2})", (ell.abs() as f64 / 2.0).sqrt());
    }
}
