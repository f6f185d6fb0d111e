use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Tolerance for the Hermiticity precondition of [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// Rebuilds `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * f(self.values[k]) * v[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic complex Jacobi eigensolver for small Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies a real Givens rotation that annihilates it.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let asym = m.hermiticity_error();
    if asym > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { max_asymmetry: asym });
    }
    let n = m.rows();
    // symmetrize so that round-off asymmetry does not leak into the rotations
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);

    let scale = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if g_abs <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = (g / g_abs).conj();
    let tau = (aqq - app) / (2.0 * g_abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iα}) · [[c, s], [-s, c]] on the (p, q) plane
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = phase * -s;
    let j_qq = phase * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

/// Eigenvalues above this are clamped to zero by [`psd_sqrt`].
pub const PSD_CLAMP: f64 = -1e-8;

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-1e-8, 0)` are treated as zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eig(m)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < PSD_CLAMP {
        return Err(LinalgError::NotPsd { min_eigenvalue: min });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::super::{pauli_z, tensor_product};
    use super::*;
    use proptest::prelude::*;

    fn hermitian_from(params: &[f64]) -> ComplexMatrix {
        // 16 reals -> 4x4 Hermitian
        let mut m = ComplexMatrix::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            m[(i, i)] = Complex64::new(params[k], 0.0);
            k += 1;
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                let z = Complex64::new(params[k], params[k + 1]);
                k += 2;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
    }

    #[test]
    fn maximally_mixed_spectrum() {
        let e = hermitian_eig(&ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        for v in e.values {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_and_sparse_inputs() {
        let zz = tensor_product(&pauli_z(), &pauli_z());
        let e = hermitian_eig(&zz).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, -1.0, -1.0]);
        assert!(e.reconstruct().max_abs_diff(&zz) < 1e-14);
        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(hermitian_eig(&zero).unwrap().values, vec![0.0; 3]);
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let i4 = ComplexMatrix::identity(4);
        assert!(psd_sqrt(&i4).unwrap().max_abs_diff(&i4) < 1e-14);
        let d = ComplexMatrix::from_real_diagonal(&[4.0, 1.0, 0.0, 0.0]);
        let s = psd_sqrt(&d).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 1.0, 0.0, 0.0])) < 1e-14);
    }

    #[test]
    fn sqrt_clamps_tiny_negative_and_rejects_large_negative() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -1e-9]);
        let s = psd_sqrt(&d).unwrap();
        assert_eq!(s[(1, 1)].re, 0.0);
        let bad = ComplexMatrix::from_real_diagonal(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&bad), Err(LinalgError::NotPsd { .. })));
    }

    proptest! {
        #[test]
        fn eig_round_trip(params in prop::collection::vec(-1.0f64..1.0, 16)) {
            let m = hermitian_from(&params);
            let e = hermitian_eig(&m).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&m) < 1e-10);
            prop_assert!(e.vectors.is_unitary(1e-10));
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let sum: f64 = e.values.iter().sum();
            prop_assert!((sum - m.trace().re).abs() < 1e-10);
        }

        #[test]
        fn sqrt_round_trip(params in prop::collection::vec(-1.0f64..1.0, 16)) {
            let h = hermitian_from(&params);
            let psd = &h * &h.adjoint();
            let s = psd_sqrt(&psd).unwrap();
            prop_assert!((&s * &s).max_abs_diff(&psd) < 1e-9);
            prop_assert!(s.is_hermitian(1e-12));
            let quarter = psd_sqrt(&s).unwrap();
            let q2 = &quarter * &quarter;
            prop_assert!((&q2 * &q2).max_abs_diff(&psd) < 1e-8);
        }
    }
}
