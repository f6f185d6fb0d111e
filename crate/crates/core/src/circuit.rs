//! The reconfigurable gate: waveplates, the polarization-controlled OAM
//! shifter realized by the self-locking interferometer, single-mode-fiber
//! post-selection and simple noise channels.
//!
//! The interferometer acts on photon A as
//!
//! ```text
//! |V, ℓ⟩ → |H, ℓ+ℓ₁⟩
//! |H, ℓ⟩ → e^{iχ} |V, ℓ+ℓ₂⟩
//! ```
//!
//! i.e. a bit flip on polarization combined with an OAM shift selected by
//! the input polarization. Coupling photon A into a single-mode fiber keeps
//! only `ℓ_A = 0`, which leaves photon B in `|ℓ₁⟩` (paired with `|H⟩`) or
//! `|ℓ₂⟩` (paired with `|V⟩`).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_8;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityMatrix, HYBRID_DIM};
use crate::qmath::{tensor_product, ComplexMatrix, Ket, ModeLabel, Polarization};
use crate::source::{build_input_state, OamSpectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("subspace needs ell1 != ell2 (got {0}, {0})")]
    DegenerateSubspace(i32),
    #[error("state is not expressed in the labeled (pol, ell_A, ell_B) basis")]
    BadBasis,
    #[error("no term survives single-mode-fiber post-selection for ({ell1}, {ell2})")]
    EmptyPostselection { ell1: i32, ell2: i32 },
    #[error("cannot balance arms: c_|{ell}| = 0")]
    Unbalanceable { ell: i32 },
    #[error("post-selected OAM {ell_b} is neither ell1 = {ell1} nor ell2 = {ell2}")]
    UnexpectedMode { ell_b: i32, ell1: i32, ell2: i32 },
    #[error("noise parameter {0} outside [0, 1]")]
    BadNoise(f64),
    #[error("coupling efficiency {0} outside (0, 1]")]
    BadEfficiency(f64),
}

/// Half-wave plate with fast axis at `theta`: `[[cos2θ, sin2θ], [sin2θ, -cos2θ]]`.
pub fn hwp_jones(theta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(c, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-c, 0.0),
        ],
    )
}

/// Quarter-wave plate with fast axis at `theta`, `R(θ) diag(1, i) R(-θ)`.
///
/// At `θ = π/4` it maps `|H⟩` onto `(|H⟩ - i|V⟩)/√2` up to global phase.
pub fn qwp_jones(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            one * c * c + i * s * s,
            (one - i) * s * c,
            (one - i) * s * c,
            one * s * s + i * c * c,
        ],
    )
}

/// Gate configuration for one post-selected subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridStateSpec {
    pub ell1: i32,
    pub ell2: i32,
    /// Path-mismatch phase picked up by the `H → V` arm.
    pub chi: f64,
    pub hwp1_angle: f64,
    /// Additional `|V⟩` phase after the interferometer (Gouy, mirrors).
    pub extra_phase: f64,
}

impl HybridStateSpec {
    /// Diagonal preparation (`θ = π/8`), no phases.
    pub fn new(ell1: i32, ell2: i32) -> Result<Self, CircuitError> {
        if ell1 == ell2 {
            return Err(CircuitError::DegenerateSubspace(ell1));
        }
        Ok(Self {
            ell1,
            ell2,
            chi: 0.0,
            hwp1_angle: FRAC_PI_8,
            extra_phase: 0.0,
        })
    }

    /// HWP₁ set by [`balance_hwp1`] for `spectrum`.
    pub fn balanced(ell1: i32, ell2: i32, spectrum: &OamSpectrum) -> Result<Self, CircuitError> {
        let mut spec = Self::new(ell1, ell2)?;
        spec.hwp1_angle = balance_hwp1(spectrum, ell1, ell2)?;
        Ok(spec)
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn with_extra_phase(mut self, phase: f64) -> Self {
        self.extra_phase = phase;
        self
    }

    pub fn with_hwp1(mut self, theta: f64) -> Self {
        self.hwp1_angle = theta;
        self
    }

    /// Relative `|V⟩|ℓ₂⟩` phase of the ideal output.
    pub fn total_phase(&self) -> f64 {
        self.chi + self.extra_phase
    }
}

/// Applies a 2×2 Jones matrix to photon A's polarization of a labeled ket.
pub fn apply_polarization(state: &Ket, jones: &ComplexMatrix) -> Result<Ket, CircuitError> {
    let labels = state.labels().ok_or(CircuitError::BadBasis)?;
    let mut pairs: BTreeMap<(i32, i32), [Complex64; 2]> = BTreeMap::new();
    for (label, &amp) in labels.iter().zip(state.amplitudes()) {
        pairs.entry((label.ell_a, label.ell_b)).or_default()[label.pol.index()] += amp;
    }
    let mut amps = Vec::with_capacity(2 * pairs.len());
    let mut out = Vec::with_capacity(2 * pairs.len());
    for ((ell_a, ell_b), v) in pairs {
        let w = jones.mul_vec(&v);
        for (pol, a) in [(Polarization::H, w[0]), (Polarization::V, w[1])] {
            if a != Complex64::new(0.0, 0.0) {
                out.push(ModeLabel::new(pol, ell_a, ell_b));
                amps.push(a);
            }
        }
    }
    Ok(Ket::labeled(amps, out))
}

/// The polarization-controlled OAM shifter.
pub fn gate_t(state: &Ket, spec: &HybridStateSpec) -> Result<Ket, CircuitError> {
    let labels = state.labels().ok_or(CircuitError::BadBasis)?;
    let arm_phase = Complex64::from_polar(1.0, spec.chi);
    let mut terms: BTreeMap<ModeLabel, Complex64> = BTreeMap::new();
    for (label, &amp) in labels.iter().zip(state.amplitudes()) {
        let (mapped, a) = match label.pol {
            Polarization::V => (
                ModeLabel::new(Polarization::H, label.ell_a + spec.ell1, label.ell_b),
                amp,
            ),
            Polarization::H => (
                ModeLabel::new(Polarization::V, label.ell_a + spec.ell2, label.ell_b),
                amp * arm_phase,
            ),
        };
        *terms.entry(mapped).or_default() += a;
    }
    let (labels, amps) = terms.into_iter().unzip();
    Ok(Ket::labeled(amps, labels))
}

/// Outcome of fiber post-selection on photon A.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelected {
    /// Normalized state in the `{|H⟩,|V⟩} ⊗ {|ℓ₁⟩,|ℓ₂⟩}` computational basis.
    pub state: Ket,
    pub ell1: i32,
    pub ell2: i32,
    /// Squared norm of the surviving component before renormalization.
    pub success_probability: f64,
}

/// Single-mode-fiber coupling with OAM-dependent efficiency `η₀^{|ℓ_B|}`.
///
/// The efficiency models the coincidence loss for higher-order modes on
/// photon B's detection side; `η₀ = 1` is ideal coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmfCoupling {
    pub eta0: f64,
}

impl Default for SmfCoupling {
    fn default() -> Self {
        Self { eta0: 1.0 }
    }
}

impl SmfCoupling {
    pub fn new(eta0: f64) -> Result<Self, CircuitError> {
        if !(eta0 > 0.0 && eta0 <= 1.0) {
            return Err(CircuitError::BadEfficiency(eta0));
        }
        Ok(Self { eta0 })
    }

    pub fn efficiency(&self, ell: i32) -> f64 {
        self.eta0.powi(ell.abs())
    }

    pub fn postselect(&self, state: &Ket, ell1: i32, ell2: i32) -> Result<PostSelected, CircuitError> {
        let labels = state.labels().ok_or(CircuitError::BadBasis)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); HYBRID_DIM];
        for (label, &amp) in labels.iter().zip(state.amplitudes()) {
            if label.ell_a != 0 {
                continue;
            }
            let b = if label.ell_b == ell1 {
                0
            } else if label.ell_b == ell2 {
                1
            } else {
                return Err(CircuitError::UnexpectedMode {
                    ell_b: label.ell_b,
                    ell1,
                    ell2,
                });
            };
            amps[2 * label.pol.index() + b] += amp * self.efficiency(label.ell_b).sqrt();
        }
        let mut ket = Ket::new(amps);
        let p = ket.norm_sqr();
        if p <= 0.0 {
            return Err(CircuitError::EmptyPostselection { ell1, ell2 });
        }
        ket.normalize();
        Ok(PostSelected {
            state: ket,
            ell1,
            ell2,
            success_probability: p,
        })
    }
}

/// Keeps the `ℓ_A = 0` terms and relabels photon B onto `{|ℓ₁⟩, |ℓ₂⟩}`.
pub fn postselect_smf(state: &Ket, ell1: i32, ell2: i32) -> Result<PostSelected, CircuitError> {
    SmfCoupling::default().postselect(state, ell1, ell2)
}

/// HWP₁ angle that equalizes the two post-selected arm amplitudes.
///
/// The `|H⟩|ℓ₁⟩` arm carries `sin2θ · c_|ℓ₁|` and the `|V⟩|ℓ₂⟩` arm
/// `cos2θ · c_|ℓ₂|`, so `θ = ½ atan2(c_|ℓ₂|, c_|ℓ₁|)`.
pub fn balance_hwp1(spectrum: &OamSpectrum, ell1: i32, ell2: i32) -> Result<f64, CircuitError> {
    balance_weights(spectrum.coefficient(ell1), spectrum.coefficient(ell2), ell1, ell2)
}

/// [`balance_hwp1`] including fiber coupling losses on each arm.
pub fn balance_hwp1_with_coupling(
    spectrum: &OamSpectrum,
    coupling: &SmfCoupling,
    ell1: i32,
    ell2: i32,
) -> Result<f64, CircuitError> {
    balance_weights(
        spectrum.coefficient(ell1) * coupling.efficiency(ell1).sqrt(),
        spectrum.coefficient(ell2) * coupling.efficiency(ell2).sqrt(),
        ell1,
        ell2,
    )
}

fn balance_weights(c1: f64, c2: f64, ell1: i32, ell2: i32) -> Result<f64, CircuitError> {
    if c1 <= 0.0 {
        return Err(CircuitError::Unbalanceable { ell: ell1 });
    }
    if c2 <= 0.0 {
        return Err(CircuitError::Unbalanceable { ell: ell2 });
    }
    Ok(0.5 * c2.atan2(c1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseChannel {
    #[default]
    None,
    /// `p ρ + (1-p) I/4`.
    Isotropic { p: f64 },
    /// `p ρ + (1-p) diag(ρ)`.
    Dephasing { p: f64 },
    /// Uniform accidental coincidences per setting; leaves ρ untouched and is
    /// applied by the count simulators.
    Background { rate: f64 },
}

impl NoiseChannel {
    pub fn validate(&self) -> Result<(), CircuitError> {
        match *self {
            NoiseChannel::Isotropic { p } | NoiseChannel::Dephasing { p } if !(0.0..=1.0).contains(&p) => {
                Err(CircuitError::BadNoise(p))
            }
            NoiseChannel::Background { rate } if !(rate >= 0.0 && rate.is_finite()) => {
                Err(CircuitError::BadNoise(rate))
            }
            _ => Ok(()),
        }
    }

    /// Accidental rate the count simulators should add.
    pub fn accidental_rate(&self) -> f64 {
        match *self {
            NoiseChannel::Background { rate } => rate,
            _ => 0.0,
        }
    }
}

pub fn apply_noise(rho: &DensityMatrix, channel: &NoiseChannel) -> Result<DensityMatrix, CircuitError> {
    channel.validate()?;
    let m = rho.matrix();
    let out = match *channel {
        NoiseChannel::None | NoiseChannel::Background { .. } => return Ok(rho.clone()),
        NoiseChannel::Isotropic { p } => {
            let mixed = ComplexMatrix::identity(HYBRID_DIM).scale_real(0.25 * (1.0 - p));
            &m.scale_real(p) + &mixed
        }
        NoiseChannel::Dephasing { p } => ComplexMatrix::from_fn(HYBRID_DIM, HYBRID_DIM, |i, j| {
            if i == j {
                m[(i, j)]
            } else {
                m[(i, j)] * p
            }
        }),
    };
    Ok(DensityMatrix::new_unchecked(out))
}

/// Everything produced by one pass through the circuit.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub rho: DensityMatrix,
    /// Pure post-selected ket before noise and `extra_phase`.
    pub postselected: PostSelected,
}

/// Source → HWP₁ → gate → fiber → extra phase → noise.
pub fn prepare_hybrid(
    spec: &HybridStateSpec,
    spectrum: &OamSpectrum,
    noise: &NoiseChannel,
    coupling: &SmfCoupling,
) -> Result<Preparation, CircuitError> {
    if spec.ell1 == spec.ell2 {
        return Err(CircuitError::DegenerateSubspace(spec.ell1));
    }
    let input = build_input_state(spectrum);
    let rotated = apply_polarization(&input, &hwp_jones(spec.hwp1_angle))?;
    let shifted = gate_t(&rotated, spec)?;
    let post = coupling.postselect(&shifted, spec.ell1, spec.ell2)?;
    let phase_plate = ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, spec.extra_phase),
        ],
    );
    let op = tensor_product(&phase_plate, &ComplexMatrix::identity(2));
    let ket = Ket::new(op.mul_vec(post.state.amplitudes()));
    let rho = apply_noise(&DensityMatrix::pure(&ket), noise)?;
    Ok(Preparation {
        rho,
        postselected: post,
    })
}

pub fn make_hybrid_density(
    spec: &HybridStateSpec,
    spectrum: &OamSpectrum,
    noise: &NoiseChannel,
) -> Result<DensityMatrix, CircuitError> {
    Ok(prepare_hybrid(spec, spectrum, noise, &SmfCoupling::default())?.rho)
}
