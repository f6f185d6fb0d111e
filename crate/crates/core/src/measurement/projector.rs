use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;

/// Angles closer than this (on the circle) identify the same analyzer phase.
pub const ANGLE_MATCH_TOL: f64 = 1e-5;

/// Maps an angle onto `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Photon A, polarization `{|H⟩, |V⟩}`.
    A,
    /// Photon B, OAM `{|ℓ₁⟩, |ℓ₂⟩}`.
    B,
}

/// Single-qubit analyzer state (normalized).
///
/// `Phase(θ)` is the equatorial state `(|0⟩ + e^{iθ}|1⟩)/√2` on photon A.
/// On photon B the hologram phase enters conjugated, `(|0⟩ + e^{-iθ}|1⟩)/√2`,
/// so joint fringes on `|0⟩|0⟩ + |1⟩|1⟩` depend on `θ_A - θ_B` only.
#[derive(Debug, Clone, Copy)]
pub enum Projector {
    Zero,
    One,
    Plus,
    PlusI,
    Minus,
    MinusI,
    Phase(f64),
}

impl Projector {
    /// Overcomplete tomography set, in measurement order.
    pub const TOMOGRAPHY: [Projector; 6] = [
        Projector::Zero,
        Projector::One,
        Projector::Plus,
        Projector::PlusI,
        Projector::Minus,
        Projector::MinusI,
    ];

    pub fn phase(theta: f64) -> Self {
        Projector::Phase(wrap_angle(theta))
    }

    pub fn vector(&self, side: Side) -> [Complex64; 2] {
        let s = FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match *self {
            Projector::Zero => [c(1.0, 0.0), c(0.0, 0.0)],
            Projector::One => [c(0.0, 0.0), c(1.0, 0.0)],
            Projector::Plus => [c(s, 0.0), c(s, 0.0)],
            Projector::Minus => [c(s, 0.0), c(-s, 0.0)],
            Projector::PlusI => [c(s, 0.0), c(0.0, s)],
            Projector::MinusI => [c(s, 0.0), c(0.0, -s)],
            Projector::Phase(theta) => {
                let sign = if side == Side::A { 1.0 } else { -1.0 };
                [c(s, 0.0), Complex64::from_polar(s, sign * theta)]
            }
        }
    }

    /// Pauli basis index (`0 = Z`, `1 = X`, `2 = Y`) and eigenvalue sign for
    /// the six tomography states.
    pub fn pauli_basis(&self) -> Option<(usize, f64)> {
        match self {
            Projector::Zero => Some((0, 1.0)),
            Projector::One => Some((0, -1.0)),
            Projector::Plus => Some((1, 1.0)),
            Projector::Minus => Some((1, -1.0)),
            Projector::PlusI => Some((2, 1.0)),
            Projector::MinusI => Some((2, -1.0)),
            Projector::Phase(_) => None,
        }
    }

    pub fn label(&self) -> Option<&'static str> {
        match self {
            Projector::Zero => Some("|0>"),
            Projector::One => Some("|1>"),
            Projector::Plus => Some("|+>"),
            Projector::PlusI => Some("|+i>"),
            Projector::Minus => Some("|->"),
            Projector::MinusI => Some("|-i>"),
            Projector::Phase(_) => None,
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Self::TOMOGRAPHY
            .iter()
            .find(|p| p.label() == Some(token))
            .copied()
            .or_else(|| token.parse::<f64>().ok().filter(|t| t.is_finite()).map(Projector::phase))
    }
}

impl PartialEq for Projector {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Projector::Phase(a), Projector::Phase(b)) => circular_distance(*a, *b) < ANGLE_MATCH_TOL,
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl fmt::Display for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projector::Phase(theta) => write!(f, "{theta:.6}"),
            other => f.write_str(other.label().unwrap_or("?")),
        }
    }
}

/// Joint analyzer setting for photon A (polarization) and photon B (OAM).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSetting {
    pub a: Projector,
    pub b: Projector,
}

impl ProjectionSetting {
    pub fn new(a: Projector, b: Projector) -> Self {
        Self { a, b }
    }

    pub fn phases(theta_a: f64, theta_b: f64) -> Self {
        Self::new(Projector::phase(theta_a), Projector::phase(theta_b))
    }

    /// `|a⟩ ⊗ |b⟩` in the hybrid computational basis.
    pub fn joint_vector(&self) -> [Complex64; 4] {
        let a = self.a.vector(Side::A);
        let b = self.b.vector(Side::B);
        [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    }

    /// The 36 tomography settings, photon A outer.
    pub fn tomography() -> Vec<ProjectionSetting> {
        Projector::TOMOGRAPHY
            .iter()
            .flat_map(|&a| Projector::TOMOGRAPHY.iter().map(move |&b| Self::new(a, b)))
            .collect()
    }
}
