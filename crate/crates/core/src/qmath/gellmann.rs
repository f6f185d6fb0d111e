use num_complex::Complex64;

use super::ComplexMatrix;

/// Generalized Gell-Mann basis for 4×4 operators.
///
/// Element 0 is `I₄`; elements 1..=15 are the traceless Hermitian generators
/// normalized to `Tr(Γ_m Γ_n) = 2δ_mn`. Order: the six symmetric
/// off-diagonal generators, the six antisymmetric ones (both by `(j, k)` with
/// `j < k` lexicographic), then the three diagonal ones.
pub fn gellmann_basis() -> Vec<ComplexMatrix> {
    gellmann_basis_dim(4)
}

pub fn gellmann_basis_dim(d: usize) -> Vec<ComplexMatrix> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let mut basis = vec![ComplexMatrix::identity(d)];
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, k)] = one;
        m[(k, j)] = one;
        basis.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, k)] = -i;
        m[(k, j)] = i;
        basis.push(m);
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(l) {
            *v = norm;
        }
        diag[l] = -(l as f64) * norm;
        basis.push(ComplexMatrix::from_real_diagonal(&diag));
    }
    basis
}

/// Expansion coefficients `b_m` with `ρ = Σ b_m Γ_m`.
pub fn gellmann_coefficients(rho: &ComplexMatrix) -> Vec<f64> {
    gellmann_basis_dim(rho.rows())
        .iter()
        .map(|g| {
            let norm = g.hs_inner(g).re;
            g.hs_inner(rho).re / norm
        })
        .collect()
}
