use std::fmt;

use num_complex::Complex64;

use super::ComplexMatrix;

/// Linear polarization basis of photon A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    /// Computational-basis index, `H ≡ 0`, `V ≡ 1`.
    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// Basis label `|pol, ℓ_A⟩_A |ℓ_B⟩_B` (photon B polarization is fixed to H and omitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub pol: Polarization,
    pub ell_a: i32,
    pub ell_b: i32,
}

impl ModeLabel {
    pub fn new(pol: Polarization, ell_a: i32, ell_b: i32) -> Self {
        Self { pol, ell_a, ell_b }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>_A|{}>_B", self.pol, self.ell_a, self.ell_b)
    }
}

/// State vector, optionally carrying a label per basis element.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
    labels: Option<Vec<ModeLabel>>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes,
            labels: None,
        }
    }

    /// Panics if the label and amplitude counts differ.
    pub fn labeled(amplitudes: Vec<Complex64>, labels: Vec<ModeLabel>) -> Self {
        assert_eq!(amplitudes.len(), labels.len(), "one label per amplitude");
        Self {
            amplitudes,
            labels: Some(labels),
        }
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> Option<&[ModeLabel]> {
        self.labels.as_deref()
    }

    /// Iterates `(label, amplitude)` pairs; empty for unlabeled kets.
    pub fn terms(&self) -> impl Iterator<Item = (ModeLabel, Complex64)> + '_ {
        self.labels
            .iter()
            .flatten()
            .copied()
            .zip(self.amplitudes.iter().copied())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm; a zero vector is left unchanged.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}
