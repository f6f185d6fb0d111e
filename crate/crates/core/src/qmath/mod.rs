//! Dense complex linear algebra for 2- and 4-dimensional Hilbert spaces.
//!
//! Everything here is small and allocation-light: the largest matrices are
//! 16×16 and most are 4×4 two-qubit operators. Basis ordering is
//! `|H⟩ ≡ |0⟩` before `|V⟩ ≡ |1⟩` on photon A and `|ℓ₁⟩ ≡ |0⟩` before
//! `|ℓ₂⟩ ≡ |1⟩` on photon B, with photon A the left tensor factor.

mod eig;
mod gellmann;
mod ket;
mod matrix;

use thiserror::Error;

pub use eig::{hermitian_eig, psd_sqrt, HermitianEig, HERMITIAN_TOL, PSD_CLAMP};
pub use gellmann::{gellmann_basis, gellmann_basis_dim, gellmann_coefficients};
pub use ket::{Ket, ModeLabel, Polarization};
pub use matrix::{pauli_x, pauli_y, pauli_z, tensor_product, ComplexMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |m_ij - conj(m_ji)| = {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("operator is not unitary (max |U†U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
}
