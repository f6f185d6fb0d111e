use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::DensityMatrix;
use crate::source::LgMode;

use super::TopologyError;

/// Points with `|S| <= DEGENERACY_EPS · Tr M` are masked.
pub const DEGENERACY_EPS: f64 = 1e-9;

/// Envelope-free intensity below which a point is masked.
const INTENSITY_FLOOR: f64 = 1e-12;

/// Square `n × n` grid on `[-extent, extent]²`, in units of the waist.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 512, extent: 6.0 }
    }
}

impl GridSpec {
    pub fn new(n: usize, extent: f64) -> Self {
        Self { n, extent }
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.n < 3 || !(self.extent > 0.0) || !self.extent.is_finite() {
            return Err(TopologyError::BadGrid);
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesSample {
    /// `S / |S|`, zero when masked.
    pub unit: [f64; 3],
    /// `S / Tr M`.
    pub raw: [f64; 3],
    pub masked: bool,
}

/// Evaluates the conditional Stokes vector at arbitrary points.
#[derive(Debug, Clone)]
pub struct StokesSampler {
    rho: [[Complex64; 4]; 4],
    modes: [LgMode; 2],
}

impl StokesSampler {
    pub fn new(rho: &DensityMatrix, ell1: i32, ell2: i32, waist: f64) -> Result<Self, TopologyError> {
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(TopologyError::BadWaist(waist));
        }
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = rho.get(i, j);
            }
        }
        Ok(Self {
            rho: m,
            modes: [LgMode::new(ell1, waist), LgMode::new(ell2, waist)],
        })
    }

    /// Stokes vector for a photon-B detection at `(x, y)` (physical units).
    pub fn stokes(&self, x: f64, y: f64) -> StokesSample {
        let r = x.hypot(y);
        let phi = y.atan2(x);
        let a = [
            self.modes[0].polynomial_amplitude(r, phi),
            self.modes[1].polynomial_amplitude(r, phi),
        ];
        // M_pq = Σ_mn ⟨r|m⟩ ρ_(p,m),(q,n) ⟨n|r⟩
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (p, mrow) in m.iter_mut().enumerate() {
            for (q, v) in mrow.iter_mut().enumerate() {
                for (mi, am) in a.iter().enumerate() {
                    for (ni, an) in a.iter().enumerate() {
                        *v += am * self.rho[2 * p + mi][2 * q + ni] * an.conj();
                    }
                }
            }
        }
        let tr = m[0][0].re + m[1][1].re;
        let s = [2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re];
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        let intensity = a[0].norm_sqr() + a[1].norm_sqr();
        if intensity < INTENSITY_FLOOR || !(tr > 0.0) || norm <= DEGENERACY_EPS * tr {
            return StokesSample {
                unit: [0.0; 3],
                raw: [0.0; 3],
                masked: true,
            };
        }
        StokesSample {
            unit: s.map(|c| c / norm),
            raw: s.map(|c| c / tr),
            masked: false,
        }
    }
}

/// Sampled texture; index `j * n + i` holds the point `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesField {
    pub(super) grid: GridSpec,
    pub(super) waist: f64,
    pub(super) ell1: i32,
    pub(super) ell2: i32,
    pub(super) unit: Vec<[f64; 3]>,
    pub(super) raw: Vec<[f64; 3]>,
    pub(super) mask: Vec<bool>,
}

impl StokesField {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn extent(&self) -> f64 {
        self.grid.extent
    }

    /// Grid spacing in waist units.
    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn subspace(&self) -> (i32, i32) {
        (self.ell1, self.ell2)
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    pub fn unit_vectors(&self) -> &[[f64; 3]] {
        &self.unit
    }

    pub fn raw_vectors(&self) -> &[[f64; 3]] {
        &self.raw
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<[f64; 3]> {
        let k = j * self.grid.n + i;
        (!self.mask[k]).then(|| self.unit[k])
    }
}

/// Samples the texture of `rho` in subspace `(ell1, ell2)`.
///
/// Grid coordinates are in waist units; the integral is scale invariant.
pub fn stokes_field(
    rho: &DensityMatrix,
    ell1: i32,
    ell2: i32,
    waist: f64,
    grid: GridSpec,
) -> Result<StokesField, TopologyError> {
    grid.validate()?;
    let sampler = StokesSampler::new(rho, ell1, ell2, waist)?;
    let n = grid.n;
    let samples: Vec<StokesSample> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            sampler.stokes(grid.coordinate(i) * waist, grid.coordinate(j) * waist)
        })
        .collect();
    Ok(StokesField {
        grid,
        waist,
        ell1,
        ell2,
        unit: samples.iter().map(|s| s.unit).collect(),
        raw: samples.iter().map(|s| s.raw).collect(),
        mask: samples.iter().map(|s| s.masked).collect(),
    })
}
