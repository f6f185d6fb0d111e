//! HWP₁ → controlled OAM shift → fiber post-selection for one subspace.
//!
//!     cargo run --example hybrid_gate -- 3 -2

use skyrmion_circuit::circuit::{balance_hwp1, prepare_hybrid, HybridStateSpec, NoiseChannel, SmfCoupling};
use skyrmion_circuit::source::{spdc_spectrum, SpectrumModel};
use skyrmion_circuit::tomography::{concurrence, extract_relative_phase};

fn main() {
    let mut args = std::env::args().skip(1);
    let ell1: i32 = args.next().map_or(3, |s| s.parse().expect("l1"));
    let ell2: i32 = args.next().map_or(-2, |s| s.parse().expect("l2"));

    let spectrum = spdc_spectrum(&SpectrumModel::default(), 6).unwrap();
    let theta = balance_hwp1(&spectrum, ell1, ell2).unwrap();
    let spec = HybridStateSpec::new(ell1, ell2)
        .unwrap()
        .with_hwp1(theta)
        .with_chi(std::f64::consts::FRAC_PI_6);

    let prep = prepare_hybrid(&spec, &spectrum, &NoiseChannel::None, &SmfCoupling::default()).unwrap();
    println!("subspace ({ell1}, {ell2}), HWP1 at {:.4} rad", theta);
    println!("post-selection probability {:.4}", prep.postselected.success_probability);
    let labels = ["|H,l1>", "|H,l2>", "|V,l1>", "|V,l2>"];
    for (label, a) in labels.iter().zip(prep.postselected.state.amplitudes()) {
        println!("  {label}: {:+.6} {:+.6}i", a.re, a.im);
    }
    println!("concurrence {:.9}", concurrence(&prep.rho).unwrap());
    println!("relative phase {:.6} rad", extract_relative_phase(&prep.rho).unwrap());

    // a fixed diagonal HWP leaves the arms unbalanced for a non-flat spectrum
    let unbalanced = prepare_hybrid(
        &HybridStateSpec::new(ell1, ell2).unwrap(),
        &spectrum,
        &NoiseChannel::None,
        &SmfCoupling::default(),
    )
    .unwrap();
    println!("with HWP1 at pi/8: concurrence {:.6}", concurrence(&unbalanced.rho).unwrap());
}
