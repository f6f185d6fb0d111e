//! Biphoton source: the OAM spectrum of the down-converted pairs and the
//! Laguerre–Gaussian transverse modes used to evaluate position-space
//! amplitudes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{Ket, ModeLabel, Polarization};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("spectrum list has {got} entries, expected {expected} (cutoff + 1)")]
    WrongLength { got: usize, expected: usize },
    #[error("spectrum coefficient c_{index} = {value} is negative or not finite")]
    BadCoefficient { index: usize, value: f64 },
    #[error("spectrum has no weight")]
    Empty,
    #[error("exponential spectrum needs ell0 > 0, got {0}")]
    BadScale(f64),
}

/// `ln(n!)`, summed in log space so large `n` never overflows.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Radial-index-zero Laguerre–Gaussian mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgMode {
    pub ell: i32,
    pub waist: f64,
}

impl LgMode {
    pub fn new(ell: i32, waist: f64) -> Self {
        assert!(waist > 0.0, "waist must be positive");
        Self { ell, waist }
    }

    /// Amplitude without the common Gaussian envelope `exp(-r²/w²)`.
    ///
    /// Every mode shares the envelope, so ratios between modes (and hence
    /// normalized polarization textures) can be formed from this alone
    /// without underflow far out in the tails.
    pub fn polynomial_amplitude(&self, r: f64, phi: f64) -> Complex64 {
        let l = self.ell.unsigned_abs();
        let w = self.waist;
        let ln_norm = 0.5 * ((2.0 / PI).ln() - ln_factorial(l)) - w.ln();
        let radial = ln_norm.exp() * (r * std::f64::consts::SQRT_2 / w).powi(l as i32);
        Complex64::from_polar(radial, self.ell as f64 * phi)
    }

    /// Normalized amplitude `u_ℓ(r, φ)`.
    pub fn amplitude(&self, r: f64, phi: f64) -> Complex64 {
        self.polynomial_amplitude(r, phi) * (-(r * r) / (self.waist * self.waist)).exp()
    }
}

/// `u_ℓ(r, φ) = sqrt(2/(π|ℓ|!)) (1/w) (r√2/w)^{|ℓ|} exp(-r²/w²) exp(iℓφ)`.
pub fn lg_amplitude(mode: LgMode, r: f64, phi: f64) -> Complex64 {
    mode.amplitude(r, phi)
}

/// How the OAM coefficients decay with `|ℓ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SpectrumModel {
    Uniform,
    /// `c_|ℓ| ∝ exp(-|ℓ|/(2ℓ₀))`.
    Exponential { ell0: f64 },
    /// Unnormalized `c_0, c_1, ..., c_L`.
    List { coefficients: Vec<f64> },
}

impl Default for SpectrumModel {
    fn default() -> Self {
        SpectrumModel::Exponential { ell0: 2.0 }
    }
}

/// Normalized coefficients `c_|ℓ|`, `|ℓ| = 0..=L`, with
/// `Σ_{ℓ=-L}^{L} c_|ℓ|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OamSpectrum {
    coefficients: Vec<f64>,
}

impl OamSpectrum {
    /// Validates and normalizes `c_0..=c_L`.
    pub fn from_coefficients(raw: &[f64]) -> Result<Self, SpectrumError> {
        for (index, &value) in raw.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SpectrumError::BadCoefficient { index, value });
            }
        }
        let total: f64 = raw
            .iter()
            .enumerate()
            .map(|(l, c)| if l == 0 { c * c } else { 2.0 * c * c })
            .sum();
        if raw.is_empty() || total <= 0.0 {
            return Err(SpectrumError::Empty);
        }
        let norm = total.sqrt();
        Ok(Self {
            coefficients: raw.iter().map(|c| c / norm).collect(),
        })
    }

    pub fn cutoff(&self) -> u32 {
        (self.coefficients.len() - 1) as u32
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `c_|ℓ|`, zero beyond the cutoff.
    pub fn coefficient(&self, ell: i32) -> f64 {
        self.coefficients
            .get(ell.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        (-(self.cutoff() as i32)..=self.cutoff() as i32)
            .map(|l| self.coefficient(l).powi(2))
            .sum()
    }
}

pub fn spdc_spectrum(model: &SpectrumModel, cutoff: u32) -> Result<OamSpectrum, SpectrumError> {
    match model {
        SpectrumModel::Uniform => OamSpectrum::from_coefficients(&vec![1.0; cutoff as usize + 1]),
        SpectrumModel::Exponential { ell0 } => {
            if !(*ell0 > 0.0) {
                return Err(SpectrumError::BadScale(*ell0));
            }
            let raw: Vec<f64> = (0..=cutoff)
                .map(|l| (-(l as f64) / (2.0 * ell0)).exp())
                .collect();
            OamSpectrum::from_coefficients(&raw)
        }
        SpectrumModel::List { coefficients } => {
            if coefficients.len() != cutoff as usize + 1 {
                return Err(SpectrumError::WrongLength {
                    got: coefficients.len(),
                    expected: cutoff as usize + 1,
                });
            }
            OamSpectrum::from_coefficients(coefficients)
        }
    }
}

/// `Σ_ℓ c_|ℓ| |H, ℓ⟩_A |-ℓ⟩_B`, ordered by increasing `ℓ_A`.
pub fn build_input_state(spectrum: &OamSpectrum) -> Ket {
    let cutoff = spectrum.cutoff() as i32;
    let (labels, amps): (Vec<_>, Vec<_>) = (-cutoff..=cutoff)
        .map(|l| {
            (
                ModeLabel::new(Polarization::H, l, -l),
                Complex64::new(spectrum.coefficient(l), 0.0),
            )
        })
        .unzip();
    Ket::labeled(amps, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Midpoint quadrature of `∫ conj(u_a) u_b r dr dφ` over `r ∈ [0, r_max]`.
    fn overlap(a: LgMode, b: LgMode, r_max: f64, nr: usize, nphi: usize) -> Complex64 {
        let dr = r_max / nr as f64;
        let dphi = 2.0 * PI / nphi as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..nphi {
                let phi = (j as f64 + 0.5) * dphi;
                acc += lg_amplitude(a, r, phi).conj() * lg_amplitude(b, r, phi) * r;
            }
        }
        acc * dr * dphi
    }

    #[test]
    fn vortex_null_and_gaussian_peak() {
        assert_eq!(lg_amplitude(LgMode::new(1, 1.0), 0.0, 0.3).norm(), 0.0);
        let w = 1.7;
        for phi in [0.0, 1.0, -2.5] {
            let u = lg_amplitude(LgMode::new(0, w), 0.0, phi);
            assert!((u.re - (2.0 / PI).sqrt() / w).abs() < 1e-15);
            assert_eq!(u.im, 0.0);
        }
    }

    #[test]
    fn ell_two_unit_norm_on_quadrature() {
        let m = LgMode::new(2, 1.0);
        let n = overlap(m, m, 8.0, 2048, 512);
        assert!((n.re - 1.0).abs() < 1e-4, "norm {}", n.re);
    }

    #[test]
    fn modes_are_orthonormal() {
        for a in -5..=5 {
            for b in -5..=5 {
                let o = overlap(LgMode::new(a, 1.0), LgMode::new(b, 1.0), 8.0, 512, 64);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((o - Complex64::new(expect, 0.0)).norm() < 1e-4, "({a},{b}) -> {o}");
            }
        }
    }

    #[test]
    fn log_factorial_matches_direct() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        assert!(ln_factorial(20).exp().is_finite());
    }

    #[test]
    fn uniform_cutoff_one() {
        let s = spdc_spectrum(&SpectrumModel::Uniform, 1).unwrap();
        let c = 1.0 / 3f64.sqrt();
        assert!((s.coefficient(0) - c).abs() < 1e-15);
        assert!((s.coefficient(-1) - c).abs() < 1e-15);
        assert_eq!(s.coefficient(2), 0.0);
    }

    #[test]
    fn exponential_limits_and_ordering() {
        let flat = spdc_spectrum(&SpectrumModel::Exponential { ell0: f64::INFINITY }, 4).unwrap();
        let uni = spdc_spectrum(&SpectrumModel::Uniform, 4).unwrap();
        for l in 0..=4 {
            assert!((flat.coefficient(l) - uni.coefficient(l)).abs() < 1e-9);
        }
        let e = spdc_spectrum(&SpectrumModel::Exponential { ell0: 1.0 }, 3).unwrap();
        let c = e.coefficients();
        assert!(c[0] > c[1] && c[1] > c[2] && c[2] > c[3]);
        // ratio of neighbours is exp(-1/2)
        assert!((c[1] / c[0] - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn bad_spectra() {
        let list = SpectrumModel::List { coefficients: vec![1.0, 0.5] };
        assert_eq!(
            spdc_spectrum(&list, 3),
            Err(SpectrumError::WrongLength { got: 2, expected: 4 })
        );
        let neg = SpectrumModel::List { coefficients: vec![1.0, -0.5] };
        assert!(matches!(spdc_spectrum(&neg, 1), Err(SpectrumError::BadCoefficient { index: 1, .. })));
        assert!(matches!(
            spdc_spectrum(&SpectrumModel::Exponential { ell0: 0.0 }, 1),
            Err(SpectrumError::BadScale(_))
        ));
    }

    #[test]
    fn input_state_shapes() {
        let s0 = spdc_spectrum(&SpectrumModel::Uniform, 0).unwrap();
        let k0 = build_input_state(&s0);
        assert_eq!(k0.dim(), 1);
        assert_eq!(k0.labels().unwrap()[0], ModeLabel::new(Polarization::H, 0, 0));

        let s1 = spdc_spectrum(&SpectrumModel::Uniform, 1).unwrap();
        let k1 = build_input_state(&s1);
        assert_eq!(k1.dim(), 3);
        for (label, amp) in k1.terms() {
            assert_eq!(label.ell_a + label.ell_b, 0);
            assert!((amp.re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn input_state_normalized_and_anticorrelated(
            raw in prop::collection::vec(0.0f64..1.0, 1..8)
        ) {
            prop_assume!(raw.iter().any(|&c| c > 1e-3));
            let spec = OamSpectrum::from_coefficients(&raw).unwrap();
            prop_assert!((spec.norm_sqr() - 1.0).abs() < 1e-10);
            let k = build_input_state(&spec);
            prop_assert!((k.norm() - 1.0).abs() < 1e-12);
            prop_assert!(k.terms().all(|(l, _)| l.ell_a + l.ell_b == 0));
        }
    }
}
