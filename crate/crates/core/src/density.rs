//! Two-qubit density operators on the hybrid polarization ⊗ OAM space.

use num_complex::Complex64;
use thiserror::Error;

use crate::qmath::{hermitian_eig, ComplexMatrix, Ket, LinalgError};

pub const HYBRID_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("density matrix must be 4x4, got {0}x{1}")]
    WrongShape(usize, usize),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A 4×4 Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), trace (1e-9) and positivity (-1e-8).
    pub fn new(m: ComplexMatrix) -> Result<Self, DensityError> {
        if m.rows() != HYBRID_DIM || m.cols() != HYBRID_DIM {
            return Err(DensityError::WrongShape(m.rows(), m.cols()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(DensityError::BadTrace(tr.re));
        }
        let eig = hermitian_eig(&m)?;
        let min = eig.values[HYBRID_DIM - 1];
        if min < -1e-8 {
            return Err(LinalgError::NotPsd { min_eigenvalue: min }.into());
        }
        Ok(Self(m))
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        debug_assert_eq!((m.rows(), m.cols()), (HYBRID_DIM, HYBRID_DIM));
        Self(m)
    }

    /// `|ψ⟩⟨ψ|` of the normalized ket. Panics if `ket` is not 4-dimensional or is zero.
    pub fn pure(ket: &Ket) -> Self {
        assert_eq!(ket.dim(), HYBRID_DIM);
        let k = ket.clone().normalized();
        assert!(k.norm() > 0.0, "zero ket has no density matrix");
        Self(k.projector())
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(HYBRID_DIM).scale_real(0.25))
    }

    /// Target hybrid state `(|H⟩|ℓ₁⟩ + e^{iφ}|V⟩|ℓ₂⟩)/√2`.
    pub fn hybrid_target(phase: f64) -> Self {
        Self::pure(&hybrid_target_ket(phase))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Real part of `Tr(ρ P)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        (&self.0 * op).trace().re
    }

    /// `⟨v|ρ|v⟩`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        self.0.expectation(v).re
    }
}

pub fn hybrid_target_ket(phase: f64) -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket::new(vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(s, phase),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_inputs() {
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::identity(2)),
            Err(DensityError::WrongShape(2, 2))
        ));
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::identity(4)),
            Err(DensityError::BadTrace(_))
        ));
        let neg = ComplexMatrix::from_real_diagonal(&[0.6, 0.6, 0.0, -0.2]);
        assert!(matches!(
            DensityMatrix::new(neg),
            Err(DensityError::Linalg(LinalgError::NotPsd { .. }))
        ));
    }

    #[test]
    fn target_is_valid() {
        let rho = DensityMatrix::hybrid_target(0.3);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        assert!((rho.get(3, 0).arg() - 0.3).abs() < 1e-15);
    }
}
