//! Nonlocal Stokes texture of the hybrid state and its skyrmion number.
//!
//! Photon B detected at transverse position `r` conditions photon A onto
//! the 2×2 polarization operator `M(r) = ⟨r|ρ|r⟩`, whose Pauli expectation
//! values form the Stokes vector `S(r)`. The skyrmion number is the degree
//! of the unit-normalized map `r ↦ S(r)/|S(r)|` from the plane to the sphere.

mod field;
mod io;

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::density::DensityMatrix;
use crate::qmath::{tensor_product, ComplexMatrix, LinalgError};

pub use field::{stokes_field, GridSpec, StokesField, StokesSampler, DEGENERACY_EPS};
pub use io::{phase_grid_text, FieldParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("{masked} of {total} grid points are degenerate (>= 50%)")]
    TooDegenerate { masked: usize, total: usize },
    #[error("grid needs n >= 3 and a positive extent")]
    BadGrid,
    #[error("waist must be positive, got {0}")]
    BadWaist(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Components of the skyrmion-number estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkyrmionIntegral {
    /// Surface integral over the grid interior (border ring excluded).
    pub interior: f64,
    /// Solid angle between the boundary image and its asymptotic direction,
    /// divided by `4π` and negated; zero when the boundary does not
    /// concentrate in one hemisphere.
    pub closure: f64,
}

impl SkyrmionIntegral {
    pub fn total(&self) -> f64 {
        self.interior + self.closure
    }
}

/// `N = (1/4π) ∫∫ S·(∂ₓS × ∂ᵧS) dx dy` of the normalized field.
pub fn skyrmion_number(field: &StokesField) -> Result<f64, TopologyError> {
    Ok(skyrmion_integral(field)?.total())
}

pub fn skyrmion_integral(field: &StokesField) -> Result<SkyrmionIntegral, TopologyError> {
    let total = field.len();
    let masked = field.masked_count();
    if 2 * masked >= total {
        return Err(TopologyError::TooDegenerate { masked, total });
    }
    Ok(SkyrmionIntegral {
        interior: interior_integral(field, field.unit_vectors()),
        closure: boundary_closure(field),
    })
}

/// Interior integral of the unnormalized (degree-of-polarization) field.
///
/// Mixedness shrinks this by roughly the cube of the polarization degree;
/// reported for diagnostics only.
pub fn raw_skyrmion_number(field: &StokesField) -> f64 {
    interior_integral(field, field.raw_vectors())
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn interior_integral(field: &StokesField, vectors: &[[f64; 3]]) -> f64 {
    let n = field.n();
    let h = field.spacing();
    let mask = field.mask();
    let ok = |i: usize, j: usize| !mask[j * n + i];
    let v = |i: usize, j: usize| vectors[j * n + i];
    let lin = |terms: &[(f64, [f64; 3])], w: f64| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, x) in terms {
            for d in 0..3 {
                out[d] += c * x[d];
            }
        }
        out.map(|o| o / w)
    };
    // fourth-order central stencil where all four neighbours exist and are
    // unmasked, then second-order central, then one-sided
    let derivative = |i: usize, j: usize, di: isize, dj: isize| -> [f64; 3] {
        let at = |k: isize| {
            let (x, y) = (i as isize + k * di, j as isize + k * dj);
            if x < 0 || y < 0 || x >= n as isize || y >= n as isize || !ok(x as usize, y as usize) {
                None
            } else {
                Some(v(x as usize, y as usize))
            }
        };
        let c = v(i, j);
        match (at(-2), at(-1), at(1), at(2)) {
            (Some(m2), Some(m1), Some(p1), Some(p2)) => {
                lin(&[(1.0, m2), (-8.0, m1), (8.0, p1), (-1.0, p2)], 12.0 * h)
            }
            (_, Some(m1), Some(p1), _) => lin(&[(-1.0, m1), (1.0, p1)], 2.0 * h),
            (_, None, Some(p1), _) => lin(&[(-1.0, c), (1.0, p1)], h),
            (_, Some(m1), None, _) => lin(&[(-1.0, m1), (1.0, c)], h),
            _ => [0.0; 3],
        }
    };
    // rows in parallel, summed in a fixed order so results are reproducible
    let sum: f64 = (1..n - 1)
        .into_par_iter()
        .map(|j| {
            let wy = if j == 1 || j == n - 2 { 0.5 } else { 1.0 };
            let mut row = 0.0;
            for i in 1..n - 1 {
                if !ok(i, j) {
                    continue;
                }
                let wx = if i == 1 || i == n - 2 { 0.5 } else { 1.0 };
                let dx = derivative(i, j, 1, 0);
                let dy = derivative(i, j, 0, 1);
                row += wx * dot(v(i, j), cross(dx, dy));
            }
            wy * row
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    sum * h * h / (4.0 * PI)
}

/// Signed solid angle of the spherical triangle `(p, a, b)`.
pub fn triangle_solid_angle(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let num = dot(p, cross(a, b));
    let den = 1.0 + dot(p, a) + dot(a, b) + dot(b, p);
    2.0 * num.atan2(den)
}

/// Counterclockwise ring of grid indices bounding the integrated interior.
fn interior_boundary(n: usize) -> Vec<(usize, usize)> {
    let (lo, hi) = (1, n - 2);
    let mut ring = Vec::with_capacity(4 * (hi - lo));
    for i in lo..hi {
        ring.push((i, lo));
    }
    for j in lo..hi {
        ring.push((hi, j));
    }
    for i in (lo + 1..=hi).rev() {
        ring.push((i, hi));
    }
    for j in (lo + 1..=hi).rev() {
        ring.push((lo, j));
    }
    ring
}

/// Contribution of the plane outside the grid, assuming the exterior
/// contracts the boundary loop onto its mean direction along geodesics.
///
/// Only applied when every boundary vector lies in the open hemisphere
/// around that direction; otherwise the exterior has no well-defined limit
/// and the closure is zero.
fn boundary_closure(field: &StokesField) -> f64 {
    let n = field.n();
    if n < 4 {
        return 0.0;
    }
    let unit = field.unit_vectors();
    let mask = field.mask();
    let loop_vectors: Vec<[f64; 3]> = interior_boundary(n)
        .into_iter()
        .map(|(i, j)| j * n + i)
        .filter(|&k| !mask[k])
        .map(|k| unit[k])
        .collect();
    if loop_vectors.len() < 3 {
        return 0.0;
    }
    let mut mean = [0.0; 3];
    for v in &loop_vectors {
        for d in 0..3 {
            mean[d] += v[d];
        }
    }
    let norm = dot(mean, mean).sqrt();
    if norm < 1e-12 {
        return 0.0;
    }
    let pole = mean.map(|c| c / norm);
    if loop_vectors.iter().any(|v| dot(*v, pole) <= 0.0) {
        return 0.0;
    }
    let fan: f64 = loop_vectors
        .iter()
        .zip(loop_vectors.iter().cycle().skip(1))
        .map(|(a, b)| triangle_solid_angle(pole, *a, *b))
        .sum();
    -fan / (4.0 * PI)
}

/// Stokes phase grids `φ_xy = atan2(S_y, S_x)`, `φ_yz = atan2(S_z, S_y)`,
/// `φ_zx = atan2(S_x, S_z)`, each in `(-π, π]`; masked points carry 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesPhases {
    pub xy: Vec<f64>,
    pub yz: Vec<f64>,
    pub zx: Vec<f64>,
    pub mask: Vec<bool>,
}

fn half_open_atan2(y: f64, x: f64) -> f64 {
    let a = y.atan2(x);
    if a <= -PI {
        PI
    } else {
        a
    }
}

pub fn stokes_phases(field: &StokesField) -> StokesPhases {
    let mask = field.mask().to_vec();
    let pick = |f: fn(&[f64; 3]) -> f64| -> Vec<f64> {
        field
            .unit_vectors()
            .iter()
            .zip(&mask)
            .map(|(s, &m)| if m { 0.0 } else { f(s) })
            .collect()
    };
    StokesPhases {
        xy: pick(|s| half_open_atan2(s[1], s[0])),
        yz: pick(|s| half_open_atan2(s[2], s[1])),
        zx: pick(|s| half_open_atan2(s[0], s[2])),
        mask,
    }
}

/// Net winding (in turns) of a closed sequence of phase samples.
pub fn winding_number(phases: &[f64]) -> f64 {
    if phases.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 0..phases.len() {
        let d = phases[(k + 1) % phases.len()] - phases[k];
        total += (d + PI).rem_euclid(2.0 * PI) - PI;
    }
    total / (2.0 * PI)
}

/// Skyrmion number from polarity and vorticity, `N = sgn(|ℓ₁|-|ℓ₂|)·(ℓ₁-ℓ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyPrediction {
    pub n: i32,
    pub polarity: i32,
    pub vorticity: i32,
}

pub fn predict_topology(ell1: i32, ell2: i32) -> TopologyPrediction {
    let polarity = (ell1.abs() - ell2.abs()).signum();
    let vorticity = ell1 - ell2;
    TopologyPrediction {
        n: polarity * vorticity,
        polarity,
        vorticity,
    }
}

/// `(U ⊗ I) ρ (U ⊗ I)†` for a polarization unitary `U`.
pub fn basis_rotation(rho: &DensityMatrix, u_pol: &ComplexMatrix) -> Result<DensityMatrix, TopologyError> {
    if u_pol.rows() != 2 || u_pol.cols() != 2 {
        return Err(LinalgError::DimensionMismatch {
            left: (u_pol.rows(), u_pol.cols()),
            right: (2, 2),
        }
        .into());
    }
    let deviation = (&u_pol.adjoint() * u_pol).max_abs_diff(&ComplexMatrix::identity(2));
    if deviation > 1e-10 {
        return Err(LinalgError::NotUnitary { deviation }.into());
    }
    let u = tensor_product(u_pol, &ComplexMatrix::identity(2));
    let out = &(&u * rho.matrix()) * &u.adjoint();
    Ok(DensityMatrix::new_unchecked(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyReport {
    pub skyrmion_number: f64,
    pub raw_skyrmion_number: f64,
    pub integral: SkyrmionIntegral,
    pub predicted: TopologyPrediction,
    pub extent: f64,
    pub n: usize,
    pub waist: f64,
    pub masked: usize,
}

impl TopologyReport {
    pub fn to_text(&self, ell1: i32, ell2: i32) -> String {
        format!(
            "subspace = {ell1} {ell2}\n\
             skyrmion_number = {:.6}\n\
             raw_skyrmion_number = {:.6}\n\
             interior = {:.6}\n\
             closure = {:.6}\n\
             predicted_n = {}\n\
             polarity = {}\n\
             vorticity = {}\n\
             grid_n = {}\n\
             extent = {}\n\
             waist = {}\n\
             masked = {}\n",
            self.skyrmion_number,
            self.raw_skyrmion_number,
            self.integral.interior,
            self.integral.closure,
            self.predicted.n,
            self.predicted.polarity,
            self.predicted.vorticity,
            self.n,
            self.extent,
            self.waist,
            self.masked,
        )
    }
}

/// Field plus report for one subspace.
pub fn analyze_topology(
    rho: &DensityMatrix,
    ell1: i32,
    ell2: i32,
    waist: f64,
    grid: GridSpec,
) -> Result<(StokesField, TopologyReport), TopologyError> {
    let field = stokes_field(rho, ell1, ell2, waist, grid)?;
    let integral = skyrmion_integral(&field)?;
    let report = TopologyReport {
        skyrmion_number: integral.total(),
        raw_skyrmion_number: raw_skyrmion_number(&field),
        integral,
        predicted: predict_topology(ell1, ell2),
        extent: grid.extent,
        n: grid.n,
        waist,
        masked: field.masked_count(),
    };
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_noise, hwp_jones, NoiseChannel};
    use crate::qmath::pauli_x;

    fn ideal() -> DensityMatrix {
        DensityMatrix::hybrid_target(0.0)
    }

    fn n_for(ell1: i32, ell2: i32, n: usize, extent: f64) -> f64 {
        let field = stokes_field(&ideal(), ell1, ell2, 1.0, GridSpec::new(n, extent)).unwrap();
        skyrmion_number(&field).unwrap()
    }

    #[test]
    fn prediction_examples() {
        assert_eq!(predict_topology(3, -2), TopologyPrediction { n: 5, polarity: 1, vorticity: 5 });
        assert_eq!(predict_topology(-3, 1), TopologyPrediction { n: -4, polarity: 1, vorticity: -4 });
        assert_eq!(predict_topology(1, -1), TopologyPrediction { n: 0, polarity: 0, vorticity: 2 });
        assert_eq!(predict_topology(0, 2).n, 2);
    }

    #[test]
    fn integer_numbers_on_default_grid() {
        for (l1, l2) in [(1, 0), (3, -2), (-3, 2), (1, -1), (2, 1)] {
            let got = n_for(l1, l2, 512, 6.0);
            let want = predict_topology(l1, l2).n as f64;
            assert!((got - want).abs() < 0.02, "({l1},{l2}): {got}");
        }
    }

    #[test]
    fn closure_vanishes_without_asymptotic_pole() {
        let field = stokes_field(&ideal(), 1, -1, 1.0, GridSpec::new(128, 6.0)).unwrap();
        let integral = skyrmion_integral(&field).unwrap();
        assert_eq!(integral.closure, 0.0);
    }

    #[test]
    fn extent_robustness() {
        for (l1, l2) in [(1, 0), (3, -2)] {
            let a = n_for(l1, l2, 512, 6.0);
            let b = n_for(l1, l2, 512, 10.0);
            assert!((a - b).abs() < 1e-2, "({l1},{l2}): {a} vs {b}");
        }
    }

    #[test]
    fn maximally_mixed_is_too_degenerate() {
        let field = stokes_field(&DensityMatrix::maximally_mixed(), 1, 0, 1.0, GridSpec::new(64, 6.0)).unwrap();
        assert_eq!(field.masked_count(), field.len());
        assert!(matches!(skyrmion_number(&field), Err(TopologyError::TooDegenerate { .. })));
    }

    #[test]
    fn isotropic_noise_keeps_normalized_number() {
        let rho = apply_noise(&ideal(), &NoiseChannel::Isotropic { p: 0.5 }).unwrap();
        let field = stokes_field(&rho, 2, 0, 1.0, GridSpec::new(256, 6.0)).unwrap();
        let n = skyrmion_number(&field).unwrap();
        assert!((n - 2.0).abs() < 0.05, "{n}");
        let raw = raw_skyrmion_number(&field);
        assert!(raw.abs() < n.abs());
    }

    #[test]
    fn phases_of_uniform_x_field_are_zero() {
        // |H⟩+|V⟩ on every mode: S = (1, 0, 0) wherever the field is defined
        let plus = crate::qmath::Ket::from_real(&[0.5, 0.5, 0.5, 0.5]);
        let rho = DensityMatrix::pure(&plus);
        let field = stokes_field(&rho, 0, 0, 1.0, GridSpec::new(16, 3.0)).unwrap();
        let phases = stokes_phases(&field);
        assert!(phases.xy.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn xy_phase_winding_follows_mode_difference() {
        for (l1, l2) in [(1, 0), (-1, 0), (3, -2), (2, 1)] {
            let sampler = StokesSampler::new(&ideal(), l1, l2, 1.0).unwrap();
            let loop_phases: Vec<f64> = (0..720)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / 720.0;
                    let s = sampler.stokes(phi.cos(), phi.sin()).unit;
                    s[1].atan2(s[0])
                })
                .collect();
            let w = winding_number(&loop_phases);
            assert!((w - (l2 - l1) as f64).abs() < 1e-9, "({l1},{l2}): {w}");
        }
    }

    #[test]
    fn basis_rotation_checks() {
        let rho = ideal();
        let same = basis_rotation(&rho, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(same.matrix().max_abs_diff(rho.matrix()), 0.0);
        let mut bad = ComplexMatrix::identity(2);
        bad[(0, 1)] = num_complex::Complex64::new(0.5, 0.0);
        assert!(matches!(
            basis_rotation(&rho, &bad),
            Err(TopologyError::Linalg(LinalgError::NotUnitary { .. }))
        ));

        let grid = GridSpec::new(256, 6.0);
        let base = stokes_field(&rho, 2, 0, 1.0, grid).unwrap();
        let n0 = skyrmion_number(&base).unwrap();
        let rotated = basis_rotation(&rho, &hwp_jones(PI / 8.0)).unwrap();
        let n1 = skyrmion_number(&stokes_field(&rotated, 2, 0, 1.0, grid).unwrap()).unwrap();
        assert!((n0 - n1).abs() < 0.02, "{n0} vs {n1}");

        // σ_x: S_z and S_y flip pointwise (a π rotation about S_x); N unchanged
        let flipped = basis_rotation(&rho, &pauli_x()).unwrap();
        let f = stokes_field(&flipped, 2, 0, 1.0, grid).unwrap();
        for (a, b) in base.unit_vectors().iter().zip(f.unit_vectors()) {
            assert!((a[2] + b[2]).abs() < 1e-12 && (a[1] + b[1]).abs() < 1e-12 && (a[0] - b[0]).abs() < 1e-12);
        }
        let n2 = skyrmion_number(&f).unwrap();
        assert!((n0 - n2).abs() < 0.02, "{n0} vs {n2}");
    }

    #[test]
    fn solid_angle_of_octant() {
        let o = triangle_solid_angle([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        assert!((o - PI / 2.0).abs() < 1e-14);
        let r = triangle_solid_angle([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]);
        assert!((r + PI / 2.0).abs() < 1e-14);
    }
}
