//! Projective measurements on the hybrid state, Poisson coincidence
//! synthesis, fringe visibility and the CHSH parameter.

mod counts;
mod projector;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::density::DensityMatrix;
use crate::seeding;

pub use counts::{CountMeta, CountTable, ParseError};
pub use projector::{wrap_angle, ProjectionSetting, Projector, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error("count table is missing settings: {}", format_missing(.0))]
    MissingSetting(Vec<ProjectionSetting>),
    #[error("visibility undefined: J_max + J_min = 0")]
    Degenerate,
    #[error("need at least two samples per trace, got {0}")]
    TooFewSamples(usize),
    #[error("counts scale n0 must be positive, got {0}")]
    BadScale(f64),
    #[error("wavelengths must be positive")]
    BadWavelength,
}

fn format_missing(settings: &[ProjectionSetting]) -> String {
    settings
        .iter()
        .map(|s| format!("({}, {})", s.a, s.b))
        .collect::<Vec<_>>()
        .join(", ")
}

/// `Tr(ρ P_A ⊗ P_B)`, clamped to `[0, 1]`.
pub fn joint_probability(rho: &DensityMatrix, setting: &ProjectionSetting) -> f64 {
    rho.quadratic_form(&setting.joint_vector()).clamp(0.0, 1.0)
}

/// One Poisson draw; a non-positive mean yields zero.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// Expected coincidences `n0·J + accidental` for every setting.
pub fn expected_counts(
    rho: &DensityMatrix,
    settings: &[ProjectionSetting],
    n0: f64,
    accidental: f64,
) -> Vec<f64> {
    settings
        .iter()
        .map(|s| n0 * joint_probability(rho, s) + accidental)
        .collect()
}

/// Poisson-sampled counts for `settings` from a stream seeded with `seed`.
pub fn sample_counts(
    rho: &DensityMatrix,
    settings: &[ProjectionSetting],
    n0: f64,
    accidental: f64,
    seed: u64,
) -> Result<CountTable, MeasurementError> {
    if !(n0 > 0.0) {
        return Err(MeasurementError::BadScale(n0));
    }
    let mut rng = seeding::rng(seed);
    let entries = settings
        .iter()
        .zip(expected_counts(rho, settings, n0, accidental))
        .map(|(s, mean)| (*s, sample_poisson(&mut rng, mean)))
        .collect();
    Ok(CountTable::new(
        entries,
        CountMeta {
            n0,
            accidental,
            seed: Some(seed),
        },
    ))
}

/// Analyzer-phase grid for Bell fringes.
pub fn fringe_settings(theta_a: &[f64], theta_b: &[f64]) -> Vec<ProjectionSetting> {
    theta_a
        .iter()
        .flat_map(|&a| theta_b.iter().map(move |&b| ProjectionSetting::phases(a, b)))
        .collect()
}

/// `n` equally spaced angles in `[0, 2π)`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Poisson-sampled fringe table over `θ_A × θ_B`.
pub fn coincidence_curve(
    rho: &DensityMatrix,
    theta_a: &[f64],
    theta_b: &[f64],
    n0: f64,
    accidental: f64,
    seed: u64,
) -> Result<CountTable, MeasurementError> {
    sample_counts(rho, &fringe_settings(theta_a, theta_b), n0, accidental, seed)
}

/// One noiseless fringe at fixed `θ_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeTrace {
    pub theta_a: f64,
    pub theta_b: Vec<f64>,
    pub values: Vec<f64>,
}

impl FringeTrace {
    /// Values divided by their maximum.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        self.values.iter().map(|v| if max > 0.0 { v / max } else { 0.0 }).collect()
    }
}

/// Expected (noiseless) fringes, `n0·J + accidental`.
pub fn expected_curve(
    rho: &DensityMatrix,
    theta_a: &[f64],
    theta_b: &[f64],
    n0: f64,
    accidental: f64,
) -> Vec<FringeTrace> {
    theta_a
        .iter()
        .map(|&a| {
            let settings: Vec<_> = theta_b.iter().map(|&b| ProjectionSetting::phases(a, b)).collect();
            FringeTrace {
                theta_a: a,
                theta_b: theta_b.to_vec(),
                values: expected_counts(rho, &settings, n0, accidental),
            }
        })
        .collect()
}

/// `(J_max - J_min)/(J_max + J_min)` of a single trace.
pub fn visibility(values: &[f64]) -> Result<f64, MeasurementError> {
    if values.len() < 2 {
        return Err(MeasurementError::TooFewSamples(values.len()));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        return Err(MeasurementError::Degenerate);
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

/// Visibility per `θ_A` trace, averaged.
pub fn mean_visibility<'a, I>(traces: I) -> Result<f64, MeasurementError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let vs = traces
        .into_iter()
        .map(visibility)
        .collect::<Result<Vec<_>, _>>()?;
    if vs.is_empty() {
        return Err(MeasurementError::TooFewSamples(0));
    }
    Ok(vs.iter().sum::<f64>() / vs.len() as f64)
}

/// Visibility `√(b² + c²)/a` of the least-squares fit
/// `a + b cos θ + c sin θ` to one fringe.
///
/// Less biased than [`visibility`] on Poisson data, where the extreme
/// samples overshoot the true maximum and minimum.
pub fn fitted_visibility(theta: &[f64], values: &[f64]) -> Result<f64, MeasurementError> {
    if theta.len() != values.len() || theta.len() < 3 {
        return Err(MeasurementError::TooFewSamples(theta.len().min(values.len())));
    }
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (&t, &y) in theta.iter().zip(values) {
        let row = [1.0, t.cos(), t.sin()];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&ata);
    if d.abs() < 1e-12 {
        return Err(MeasurementError::Degenerate);
    }
    // Cramer's rule
    let mut coef = [0.0; 3];
    for (k, c) in coef.iter_mut().enumerate() {
        let mut m = ata;
        for i in 0..3 {
            m[i][k] = aty[i];
        }
        *c = det(&m) / d;
    }
    if coef[0] <= 0.0 {
        return Err(MeasurementError::Degenerate);
    }
    Ok((coef[1].hypot(coef[2]) / coef[0]).clamp(0.0, 1.0))
}

/// Analyzer phases `(a, a′; b, b′)` for the CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshAngles {
    fn default() -> Self {
        Self {
            a: 0.0,
            a_prime: FRAC_PI_2,
            b: FRAC_PI_4,
            b_prime: 3.0 * FRAC_PI_4,
        }
    }
}

impl ChshAngles {
    /// Shifts photon A's analyzers, e.g. to compensate a known state phase.
    pub fn offset_a(self, delta: f64) -> Self {
        Self {
            a: self.a + delta,
            a_prime: self.a_prime + delta,
            ..self
        }
    }

    fn pairs(&self) -> [(f64, f64, f64); 4] {
        // (x, y, sign in S)
        [
            (self.a, self.b, 1.0),
            (self.a, self.b_prime, -1.0),
            (self.a_prime, self.b, 1.0),
            (self.a_prime, self.b_prime, 1.0),
        ]
    }

    /// The 16 settings `{x, x+π} × {y, y+π}` needed by [`chsh_from_counts`].
    pub fn settings(&self) -> Vec<ProjectionSetting> {
        let mut out = Vec::with_capacity(16);
        for x in [self.a, self.a_prime] {
            for dx in [0.0, PI] {
                for y in [self.b, self.b_prime] {
                    for dy in [0.0, PI] {
                        out.push(ProjectionSetting::phases(x + dx, y + dy));
                    }
                }
            }
        }
        out
    }
}

fn correlation(j: [f64; 4]) -> f64 {
    // [J(x,y), J(x+π,y+π), J(x+π,y), J(x,y+π)]
    let total: f64 = j.iter().sum();
    if total <= 0.0 {
        0.0
    } else {
        (j[0] + j[1] - j[2] - j[3]) / total
    }
}

fn quad(x: f64, y: f64) -> [ProjectionSetting; 4] {
    [
        ProjectionSetting::phases(x, y),
        ProjectionSetting::phases(x + PI, y + PI),
        ProjectionSetting::phases(x + PI, y),
        ProjectionSetting::phases(x, y + PI),
    ]
}

/// Correlator `E(x, y)` from the four-projector combination.
pub fn correlator(rho: &DensityMatrix, x: f64, y: f64) -> f64 {
    correlation(quad(x, y).map(|s| joint_probability(rho, &s)))
}

/// `S = E(a,b) - E(a,b′) + E(a′,b) + E(a′,b′)`.
pub fn chsh_s(rho: &DensityMatrix, angles: &ChshAngles) -> f64 {
    angles
        .pairs()
        .iter()
        .map(|&(x, y, sign)| sign * correlator(rho, x, y))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshEstimate {
    pub s: f64,
    /// One-sigma Poisson uncertainty.
    pub sigma: f64,
}

/// Bell parameter from raw counts, without accidental subtraction.
pub fn chsh_from_counts(table: &CountTable, angles: &ChshAngles) -> Result<ChshEstimate, MeasurementError> {
    let missing: Vec<_> = angles
        .settings()
        .into_iter()
        .filter(|s| table.count(s).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(MeasurementError::MissingSetting(missing));
    }
    let mut s = 0.0;
    let mut var = 0.0;
    for (x, y, sign) in angles.pairs() {
        let n = quad(x, y).map(|st| table.count(&st).unwrap_or(0) as f64);
        let total: f64 = n.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let e = correlation(n);
        s += sign * e;
        // ∂E/∂N for the '+' bins is (1-E)/T, for the '-' bins -(1+E)/T
        var += ((1.0 - e) / total).powi(2) * (n[0] + n[1]) + ((1.0 + e) / total).powi(2) * (n[2] + n[3]);
    }
    Ok(ChshEstimate { s, sigma: var.sqrt() })
}

/// Poisson-sampled counts for the 16 CHSH settings.
pub fn simulate_chsh_counts(
    rho: &DensityMatrix,
    angles: &ChshAngles,
    n0: f64,
    accidental: f64,
    seed: u64,
) -> Result<CountTable, MeasurementError> {
    sample_counts(rho, &angles.settings(), n0, accidental, seed)
}

/// Coherence length `λ²/Δλ` in micrometres, inputs in nanometres.
pub fn coherence_length(lambda_nm: f64, delta_lambda_nm: f64) -> Result<f64, MeasurementError> {
    if !(lambda_nm > 0.0 && delta_lambda_nm > 0.0) {
        return Err(MeasurementError::BadWavelength);
    }
    Ok(lambda_nm * lambda_nm / delta_lambda_nm * 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_noise, NoiseChannel};
    use std::f64::consts::SQRT_2;

    #[test]
    fn fitted_visibility_of_exact_sinusoid() {
        let theta = uniform_angles(36);
        let values: Vec<f64> = theta.iter().map(|t| 3.0 + 2.0 * (t - 0.7).cos()).collect();
        assert!((fitted_visibility(&theta, &values).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((visibility(&values).unwrap() - 2.0 / 3.0).abs() < 1e-2);
        assert_eq!(fitted_visibility(&theta[..2], &values[..2]), Err(MeasurementError::TooFewSamples(2)));
    }

    fn bell() -> DensityMatrix {
        DensityMatrix::hybrid_target(0.0)
    }

    #[test]
    fn joint_probability_values() {
        let rho = bell();
        assert!((joint_probability(&rho, &ProjectionSetting::phases(0.7, 0.7)) - 0.5).abs() < 1e-15);
        assert!(joint_probability(&rho, &ProjectionSetting::phases(0.2, 0.2 + PI)) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed();
        for s in fringe_settings(&[0.0, 1.0], &[0.3, 2.0]) {
            assert!((joint_probability(&mixed, &s) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn dephased_fringe_visibility_closed_form() {
        let rho = apply_noise(&bell(), &NoiseChannel::Dephasing { p: 0.9 }).unwrap();
        let grid = uniform_angles(72);
        let traces = expected_curve(&rho, &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2], &grid, 1.0, 0.0);
        for t in &traces {
            for (b, v) in t.theta_b.iter().zip(&t.values) {
                let j = (1.0 + 0.9 * (t.theta_a - b).cos()) / 4.0;
                assert!((v - j).abs() < 1e-15);
            }
        }
        let v = mean_visibility(traces.iter().map(|t| t.values.as_slice())).unwrap();
        assert!((v - 0.9).abs() < 1e-9);
    }

    #[test]
    fn visibility_edge_cases() {
        assert_eq!(visibility(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(visibility(&[0.0, 2.0]).unwrap(), 1.0);
        assert_eq!(visibility(&[0.0, 0.0]), Err(MeasurementError::Degenerate));
        assert_eq!(visibility(&[1.0]), Err(MeasurementError::TooFewSamples(1)));
    }

    #[test]
    fn chsh_closed_forms() {
        let angles = ChshAngles::default();
        assert!((chsh_s(&bell(), &angles) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!(chsh_s(&DensityMatrix::maximally_mixed(), &angles).abs() < 1e-15);
        for p in [0.5, 0.83, 0.9] {
            let rho = apply_noise(&bell(), &NoiseChannel::Dephasing { p }).unwrap();
            assert!((chsh_s(&rho, &angles) - 2.0 * SQRT_2 * p).abs() < 1e-12);
        }
    }

    #[test]
    fn chsh_counts_paths() {
        let angles = ChshAngles::default();
        let table = simulate_chsh_counts(&bell(), &angles, 1e5, 0.0, 11).unwrap();
        let est = chsh_from_counts(&table, &angles).unwrap();
        assert!((est.s - 2.0 * SQRT_2).abs() < 0.01 + 3.0 * est.sigma, "{est:?}");
        assert!(est.sigma > 0.0 && est.sigma < 0.01);

        let flat = CountTable::new(
            angles.settings().into_iter().map(|s| (s, 500)).collect(),
            CountMeta::default(),
        );
        assert_eq!(chsh_from_counts(&flat, &angles).unwrap().s, 0.0);

        let mut short = table.clone();
        short.entries_mut().pop();
        match chsh_from_counts(&short, &angles) {
            Err(MeasurementError::MissingSetting(m)) => assert_eq!(m.len(), 1),
            other => panic!("expected MissingSetting, got {other:?}"),
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = coincidence_curve(&bell(), &[0.0], &uniform_angles(8), 100.0, 1.0, 5).unwrap();
        let b = coincidence_curve(&bell(), &[0.0], &uniform_angles(8), 100.0, 1.0, 5).unwrap();
        assert_eq!(a, b);
        assert!(coincidence_curve(&bell(), &[0.0], &[0.0], 0.0, 0.0, 5).is_err());
    }

    #[test]
    fn poisson_mean_within_three_sigma() {
        let mut rng = seeding::rng(99);
        let mean = 37.5;
        let n = 10_000;
        let total: u64 = (0..n).map(|_| sample_poisson(&mut rng, mean)).sum();
        let empirical = total as f64 / n as f64;
        assert!((empirical - mean).abs() < 3.0 * (mean / n as f64).sqrt());
        assert_eq!(sample_poisson(&mut rng, 0.0), 0);
    }

    #[test]
    fn coherence_length_values() {
        assert!((coherence_length(810.0, 10.0).unwrap() - 65.61).abs() < 1e-9);
        assert!((coherence_length(810.0, 810.0).unwrap() - 0.81).abs() < 1e-12);
        let one = coherence_length(700.0, 3.0).unwrap();
        assert_eq!(coherence_length(700.0, 6.0).unwrap(), one / 2.0);
        assert_eq!(coherence_length(-1.0, 3.0), Err(MeasurementError::BadWavelength));
    }
}
