use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::qmath::{hermitian_eig, pauli_y, psd_sqrt, tensor_product, ComplexMatrix, LinalgError};

use super::TomographyError;

/// Below this modulus the `|00⟩↔|11⟩` coherence is treated as absent.
pub const COHERENCE_FLOOR: f64 = 1e-6;

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, LinalgError> {
    let sr = psd_sqrt(rho.matrix())?;
    let inner = &(&sr * sigma.matrix()) * &sr;
    let inner = hermitize(&inner);
    let eig = hermitian_eig(&inner)?;
    let tr: f64 = eig.values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `γ = Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    m.hs_inner(m).re
}

/// `S_L = 1 - γ`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// Spin-flipped state `(σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> ComplexMatrix {
    let yy = tensor_product(&pauli_y(), &pauli_y());
    &(&yy * &rho.matrix().conj()) * &yy
}

/// Wootters concurrence from the eigenvalues of `R = √(√ρ ρ̃ √ρ)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64, LinalgError> {
    let sr = psd_sqrt(rho.matrix())?;
    let inner = hermitize(&(&(&sr * &spin_flip(rho)) * &sr));
    // eigenvalues of R are square roots of those of R²; rounding noise on
    // null directions would otherwise be amplified to ~1e-8
    let lambda: Vec<f64> = hermitian_eig(&inner)?
        .values
        .iter()
        .map(|&v| if v < 1e-14 { 0.0 } else { v.sqrt() })
        .collect();
    Ok((lambda[0] - lambda[1..].iter().sum::<f64>()).clamp(0.0, 1.0))
}

/// Concurrence from the square roots of the eigenvalues of the
/// non-Hermitian product `ρ ρ̃`.
///
/// Uses the characteristic polynomial (Faddeev–LeVerrier) and simultaneous
/// root iteration, independent of the Hermitian eigensolver. Roots that are
/// (nearly) repeated converge slowly, so this route is only accurate for
/// states whose `ρρ̃` spectrum is non-degenerate.
pub fn concurrence_from_product(rho: &DensityMatrix) -> f64 {
    let product = rho.matrix() * &spin_flip(rho);
    let coeffs = characteristic_polynomial(&product);
    let mut lambda: Vec<f64> = polynomial_roots(&coeffs)
        .into_iter()
        .map(|z| z.re.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1..].iter().sum::<f64>()).clamp(0.0, 1.0)
}

/// Coefficients `c_0..=c_n` (monic, `c_n = 1`) of `det(λI - A)`.
pub fn characteristic_polynomial(a: &ComplexMatrix) -> Vec<Complex64> {
    let n = a.rows();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let id = ComplexMatrix::identity(n);
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        m = &(a * &m) + &id.scale(c[n - k + 1]);
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    c
}

/// Durand–Kerner iteration on a monic polynomial.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let denom: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| roots[i] - roots[j])
                .product();
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

/// Phase of the `|V⟩|ℓ₂⟩` amplitude relative to `|H⟩|ℓ₁⟩`, `arg ⟨11|ρ|00⟩`.
pub fn extract_relative_phase(rho: &DensityMatrix) -> Result<f64, TomographyError> {
    let coherence = rho.get(3, 0);
    if coherence.norm() < COHERENCE_FLOOR {
        return Err(TomographyError::NoCoherence(coherence.norm()));
    }
    Ok(coherence.arg())
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}
