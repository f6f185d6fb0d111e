//! Overcomplete 36-setting tomography of the hybrid state and
//! least-squares maximum-likelihood reconstruction.
//!
//! The fit parameterizes `ρ = T†T / Tr(T†T)` with `T` lower triangular
//! (16 real parameters), which keeps every candidate physical. Counts are
//! normalized within each of the nine local-basis blocks so the unknown pair
//! rate drops out, and the squared error against `Tr(ρ P_i ⊗ P_j)` is
//! minimized with Nelder–Mead, starting from the PSD projection of the
//! linear-inversion estimate.

mod metrics;
mod report;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::density::DensityMatrix;
use crate::measurement::{sample_counts, CountTable, MeasurementError, ProjectionSetting};
use crate::optimize::NelderMead;
use crate::qmath::{gellmann_coefficients, hermitian_eig, pauli_x, pauli_y, pauli_z, tensor_product, ComplexMatrix, LinalgError};
use crate::seeding;

pub use metrics::{
    characteristic_polynomial, concurrence, concurrence_from_product, extract_relative_phase, fidelity,
    linear_entropy, polynomial_roots, purity, spin_flip, COHERENCE_FLOOR,
};
pub use report::{parse_density_block, ReportParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomographyError {
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error("count table has no counts")]
    NoCounts,
    #[error("no |00>-|11> coherence (|rho_30| = {0:e})")]
    NoCoherence(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Poisson counts with mean `n0·Tr(ρ P_i⊗P_j) + accidental` for all 36 settings.
pub fn simulate_tomography(
    rho: &DensityMatrix,
    n0: f64,
    accidental: f64,
    seed: u64,
) -> Result<CountTable, MeasurementError> {
    sample_counts(rho, &ProjectionSetting::tomography(), n0, accidental, seed)
}

#[derive(Debug, Clone)]
pub struct MleOptions {
    /// Random restarts after the initial descent.
    pub restarts: usize,
    pub optimizer: NelderMead,
    /// Seed for the restart perturbations.
    pub seed: u64,
    /// Reference state for the reported fidelity; defaults to the phase-free
    /// hybrid target.
    pub target: Option<DensityMatrix>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            optimizer: NelderMead::default(),
            seed: 0x5eed,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleDiagnostics {
    pub evaluations: usize,
    pub iterations: usize,
    pub restarts: usize,
    /// Squared error at the optimum.
    pub final_residual: f64,
    /// `false` when the evaluation budget ran out before the stall criterion.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub rho_hat: DensityMatrix,
    pub fidelity: f64,
    pub purity: f64,
    pub linear_entropy: f64,
    pub concurrence: f64,
    /// `None` when the state carries no `|00⟩↔|11⟩` coherence.
    pub relative_phase: Option<f64>,
    /// Gell-Mann coefficients `b_m`, `ρ = Σ b_m Γ_m`.
    pub gellmann: Vec<f64>,
    pub diagnostics: MleDiagnostics,
}

impl ReconstructionResult {
    /// Metrics for an already-known state (no fit).
    pub fn evaluate(
        rho_hat: DensityMatrix,
        target: &DensityMatrix,
        diagnostics: MleDiagnostics,
    ) -> Result<Self, TomographyError> {
        let purity = purity(&rho_hat);
        Ok(Self {
            fidelity: fidelity(&rho_hat, target)?,
            purity,
            linear_entropy: 1.0 - purity,
            concurrence: concurrence(&rho_hat)?,
            relative_phase: extract_relative_phase(&rho_hat).ok(),
            gellmann: gellmann_coefficients(rho_hat.matrix()),
            rho_hat,
            diagnostics,
        })
    }
}

struct Observation {
    vector: [Complex64; 4],
    value: f64,
}

/// Block-normalized frequencies for the 36 tomography settings.
fn normalized_observations(table: &CountTable) -> Result<Vec<(ProjectionSetting, f64)>, TomographyError> {
    let settings = ProjectionSetting::tomography();
    let mut counts = Vec::with_capacity(settings.len());
    let mut missing = Vec::new();
    for s in &settings {
        match table.count(s) {
            Some(n) => counts.push(n as f64),
            None => missing.push(*s),
        }
    }
    if !missing.is_empty() {
        return Err(MeasurementError::MissingSetting(missing).into());
    }
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(TomographyError::NoCounts);
    }
    let block = |s: &ProjectionSetting| {
        let (ba, _) = s.a.pauli_basis().expect("tomography projector");
        let (bb, _) = s.b.pauli_basis().expect("tomography projector");
        3 * ba + bb
    };
    let mut totals = [0.0; 9];
    for (s, n) in settings.iter().zip(&counts) {
        totals[block(s)] += n;
    }
    Ok(settings
        .iter()
        .zip(&counts)
        .filter(|(s, _)| totals[block(s)] > 0.0)
        .map(|(s, n)| (*s, n / totals[block(s)]))
        .collect())
}

/// Linear-inversion estimate from Pauli correlators (may be unphysical).
fn linear_inversion(obs: &[(ProjectionSetting, f64)]) -> ComplexMatrix {
    let paulis = [ComplexMatrix::identity(2), pauli_z(), pauli_x(), pauli_y()];
    // correlators[i][j] for i, j in {I, Z, X, Y}; local terms averaged over blocks
    let mut sums = [[0.0f64; 4]; 4];
    let mut weights = [[0.0f64; 4]; 4];
    let mut block_present = [[false; 3]; 3];
    for (s, f) in obs {
        let (ba, sa) = s.a.pauli_basis().expect("tomography projector");
        let (bb, sb) = s.b.pauli_basis().expect("tomography projector");
        block_present[ba][bb] = true;
        sums[ba + 1][bb + 1] += sa * sb * f;
        sums[ba + 1][0] += sa * f;
        sums[0][bb + 1] += sb * f;
    }
    for ba in 0..3 {
        for bb in 0..3 {
            if block_present[ba][bb] {
                weights[ba + 1][bb + 1] = 1.0;
                weights[ba + 1][0] += 1.0;
                weights[0][bb + 1] += 1.0;
            }
        }
    }
    let mut rho = ComplexMatrix::identity(4).scale_real(0.25);
    for i in 0..4 {
        for j in 0..4 {
            if (i, j) == (0, 0) || weights[i][j] == 0.0 {
                continue;
            }
            let t = sums[i][j] / weights[i][j];
            rho = &rho + &tensor_product(&paulis[i], &paulis[j]).scale_real(0.25 * t);
        }
    }
    rho
}

/// Eigenvalue-clipped, renormalized projection onto the PSD cone.
fn project_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eig(m)?;
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Ok(ComplexMatrix::identity(4).scale_real(0.25));
    }
    let rebuilt = crate::qmath::HermitianEig {
        values: clipped.iter().map(|v| v / total).collect(),
        vectors: eig.vectors,
    };
    Ok(rebuilt.reconstruct())
}

/// Lower-triangular `L` with `m = L L†`; zero pivots give zero columns.
fn cholesky_semidefinite(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 1e-14 {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    l
}

const N_PARAMS: usize = 16;

/// Lower-triangular factor from the 16 real parameters: four diagonal
/// entries, then `(re, im)` of the six sub-diagonal entries row by row.
fn unpack(params: &[f64]) -> [[Complex64; 4]; 4] {
    let mut t = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        t[i][i] = Complex64::new(params[i], 0.0);
    }
    let mut k = 4;
    for i in 1..4 {
        for j in 0..i {
            t[i][j] = Complex64::new(params[k], params[k + 1]);
            k += 2;
        }
    }
    t
}

fn pack(t: &ComplexMatrix) -> Vec<f64> {
    let mut p = Vec::with_capacity(N_PARAMS);
    for i in 0..4 {
        p.push(t[(i, i)].re);
    }
    for i in 1..4 {
        for j in 0..i {
            p.push(t[(i, j)].re);
            p.push(t[(i, j)].im);
        }
    }
    p
}

/// Parameters whose `T†T` equals the (PSD, unit-trace) `rho`.
fn params_for(rho: &ComplexMatrix) -> Vec<f64> {
    // reverse the basis order so an ordinary Cholesky yields the T†T form
    let n = rho.rows();
    let flipped = ComplexMatrix::from_fn(n, n, |i, j| rho[(n - 1 - i, n - 1 - j)]);
    let l = cholesky_semidefinite(&flipped);
    let t = ComplexMatrix::from_fn(n, n, |i, j| l[(n - 1 - j, n - 1 - i)].conj());
    pack(&t)
}

fn density_from_params(params: &[f64]) -> ComplexMatrix {
    let t = unpack(params);
    let m = ComplexMatrix::from_fn(4, 4, |i, j| (0..4).map(|k| t[k][i].conj() * t[k][j]).sum());
    let tr = m.trace().re;
    if tr > 0.0 {
        m.scale_real(1.0 / tr)
    } else {
        ComplexMatrix::identity(4).scale_real(0.25)
    }
}

fn residual(params: &[f64], obs: &[Observation]) -> f64 {
    let t = unpack(params);
    let tr: f64 = t.iter().flatten().map(|z| z.norm_sqr()).sum();
    if tr <= 0.0 {
        return f64::INFINITY;
    }
    obs.iter()
        .map(|o| {
            // ⟨v|T†T|v⟩ = ‖T v‖²
            let mut p = 0.0;
            for row in &t {
                let tv: Complex64 = row.iter().zip(&o.vector).map(|(a, b)| a * b).sum();
                p += tv.norm_sqr();
            }
            let d = o.value - p / tr;
            d * d
        })
        .sum()
}

/// Least-squares fit of a physical `ρ̂` to the 36 block-normalized counts.
pub fn mle_reconstruct(table: &CountTable, options: &MleOptions) -> Result<ReconstructionResult, TomographyError> {
    let normalized = normalized_observations(table)?;
    let obs: Vec<Observation> = normalized
        .iter()
        .map(|(s, f)| Observation {
            vector: s.joint_vector(),
            value: *f,
        })
        .collect();
    let start = project_psd(&linear_inversion(&normalized))?;
    let x0 = params_for(&start);
    let objective = |p: &[f64]| residual(p, &obs);

    let mut budget = options.optimizer.clone();
    let mut best = budget.minimize(objective, &x0, &[0.05; N_PARAMS]);
    let mut evaluations = best.evaluations;
    let mut iterations = best.iterations;
    let mut converged = best.converged;
    let mut rng = seeding::rng(options.seed);
    let mut restarts = 0;
    for _ in 0..options.restarts {
        if evaluations >= options.optimizer.max_evaluations || best.value == 0.0 {
            break;
        }
        budget.max_evaluations = options.optimizer.max_evaluations - evaluations;
        let scale = rng.gen_range(0.01..0.2);
        let step: Vec<f64> = (0..N_PARAMS).map(|_| scale * rng.gen_range(0.5..1.5)).collect();
        let run = budget.minimize(objective, &best.x, &step);
        evaluations += run.evaluations;
        iterations += run.iterations;
        converged = converged && run.converged;
        restarts += 1;
        if run.value < best.value {
            best = run;
        }
    }
    let rho_hat = DensityMatrix::new_unchecked(density_from_params(&best.x));
    let target = options
        .target
        .clone()
        .unwrap_or_else(|| DensityMatrix::hybrid_target(0.0));
    ReconstructionResult::evaluate(
        rho_hat,
        &target,
        MleDiagnostics {
            evaluations,
            iterations,
            restarts,
            final_residual: best.value,
            converged,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_noise, NoiseChannel};
    use crate::measurement::{CountMeta, Projector};
    use std::f64::consts::PI;

    #[test]
    fn bell_tomography_means() {
        let bell = DensityMatrix::hybrid_target(0.0);
        let means = crate::measurement::expected_counts(&bell, &ProjectionSetting::tomography(), 1000.0, 0.0);
        assert!((means[0] - 500.0).abs() < 1e-9); // (|0>,|0>)
        assert!(means[1].abs() < 1e-9); // (|0>,|1>)
        let mixed = crate::measurement::expected_counts(
            &DensityMatrix::maximally_mixed(),
            &ProjectionSetting::tomography(),
            1000.0,
            0.0,
        );
        assert!(mixed.iter().all(|m| (m - 250.0).abs() < 1e-9));
    }

    #[test]
    fn simulation_is_reproducible() {
        let rho = DensityMatrix::hybrid_target(0.5);
        let a = simulate_tomography(&rho, 1e4, 0.0, 3).unwrap();
        let b = simulate_tomography(&rho, 1e4, 0.0, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 36);
    }

    #[test]
    fn parameter_packing_round_trip() {
        let rho = apply_noise(&DensityMatrix::hybrid_target(0.7), &NoiseChannel::Isotropic { p: 0.6 }).unwrap();
        let back = density_from_params(&params_for(rho.matrix()));
        assert!(back.max_abs_diff(rho.matrix()) < 1e-12);
        // rank-one input survives the semidefinite factorization
        let pure = DensityMatrix::hybrid_target(-1.1);
        let back = density_from_params(&params_for(pure.matrix()));
        assert!(back.max_abs_diff(pure.matrix()) < 1e-7);
    }

    #[test]
    fn uniform_counts_give_maximally_mixed() {
        let table = CountTable::new(
            ProjectionSetting::tomography().into_iter().map(|s| (s, 250)).collect(),
            CountMeta::default(),
        );
        let r = mle_reconstruct(&table, &MleOptions::default()).unwrap();
        assert!(r.rho_hat.matrix().max_abs_diff(DensityMatrix::maximally_mixed().matrix()) < 1e-6);
        assert!((r.gellmann[0] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn noiseless_round_trip_and_phase() {
        for phase in [PI / 6.0, -3.0 * PI / 8.0, -7.0 * PI / 12.0] {
            let rho = DensityMatrix::hybrid_target(phase);
            let table = crate::measurement::expected_counts(&rho, &ProjectionSetting::tomography(), 1e6, 0.0);
            let table = CountTable::new(
                ProjectionSetting::tomography()
                    .into_iter()
                    .zip(table)
                    .map(|(s, m)| (s, m.round() as u64))
                    .collect(),
                CountMeta::default(),
            );
            let opts = MleOptions {
                target: Some(rho.clone()),
                ..Default::default()
            };
            let r = mle_reconstruct(&table, &opts).unwrap();
            assert!(r.fidelity > 0.9999, "F = {}", r.fidelity);
            assert!(r.concurrence > 0.999);
            assert!((r.relative_phase.unwrap() - phase).abs() < 1e-3);
        }
    }

    #[test]
    fn missing_and_empty_tables() {
        let mut table = simulate_tomography(&DensityMatrix::maximally_mixed(), 100.0, 0.0, 1).unwrap();
        table.entries_mut().retain(|(s, _)| s.a != Projector::MinusI);
        assert!(matches!(
            mle_reconstruct(&table, &MleOptions::default()),
            Err(TomographyError::Measurement(MeasurementError::MissingSetting(m))) if m.len() == 6
        ));
        let empty = CountTable::new(
            ProjectionSetting::tomography().into_iter().map(|s| (s, 0)).collect(),
            CountMeta::default(),
        );
        assert!(matches!(
            mle_reconstruct(&empty, &MleOptions::default()),
            Err(TomographyError::NoCounts)
        ));
    }
}
