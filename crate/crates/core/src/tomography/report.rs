use std::fmt::Write as _;

use thiserror::Error;

use crate::density::{DensityError, DensityMatrix, HYBRID_DIM};
use crate::qmath::ComplexMatrix;

use super::ReconstructionResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportParseError {
    #[error("expected 16 're im' lines, found {0}")]
    WrongLength(usize),
    #[error("bad number on line {0}")]
    BadNumber(usize),
    #[error(transparent)]
    Density(#[from] DensityError),
}

impl ReconstructionResult {
    /// Key-value summary followed by `rho_hat` as 16 `re im` lines
    /// (row-major, 12 significant digits).
    pub fn to_report(&self) -> String {
        let d = &self.diagnostics;
        let mut s = String::new();
        let _ = writeln!(s, "fidelity = {:.6}", self.fidelity);
        let _ = writeln!(s, "purity = {:.6}", self.purity);
        let _ = writeln!(s, "linear_entropy = {:.6}", self.linear_entropy);
        let _ = writeln!(s, "concurrence = {:.6}", self.concurrence);
        match self.relative_phase {
            Some(p) => {
                let _ = writeln!(s, "relative_phase = {p:.6}");
            }
            None => s.push_str("relative_phase = none\n"),
        }
        let coeffs: Vec<String> = self.gellmann.iter().map(|b| format!("{b:.6e}")).collect();
        let _ = writeln!(s, "gellmann = {}", coeffs.join(" "));
        let _ = writeln!(s, "evaluations = {}", d.evaluations);
        let _ = writeln!(s, "iterations = {}", d.iterations);
        let _ = writeln!(s, "restarts = {}", d.restarts);
        let _ = writeln!(s, "final_residual = {:.6e}", d.final_residual);
        let _ = writeln!(s, "converged = {}", d.converged);
        s.push_str("[rho]\n");
        s.push_str(&density_block(&self.rho_hat));
        s
    }
}

/// `ρ` as 16 `re im` lines, row-major, 12 significant digits.
pub fn density_block(rho: &DensityMatrix) -> String {
    let mut s = String::new();
    for z in rho.matrix().as_slice() {
        let _ = writeln!(s, "{:.11e} {:.11e}", z.re, z.im);
    }
    s
}

/// Reads the 16-line block written by [`density_block`]; other lines are ignored
/// up to and including a `[rho]` marker if present.
pub fn parse_density_block(text: &str) -> Result<DensityMatrix, ReportParseError> {
    let body = text.split_once("[rho]").map(|(_, b)| b).unwrap_or(text);
    let mut data = Vec::with_capacity(HYBRID_DIM * HYBRID_DIM);
    for (i, line) in body.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let mut parts = line.split_whitespace().map(str::parse::<f64>);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(re)), Some(Ok(im)), None) => data.push(num_complex::Complex64::new(re, im)),
            _ => return Err(ReportParseError::BadNumber(i + 1)),
        }
    }
    if data.len() != HYBRID_DIM * HYBRID_DIM {
        return Err(ReportParseError::WrongLength(data.len()));
    }
    Ok(DensityMatrix::new(ComplexMatrix::from_vec(HYBRID_DIM, HYBRID_DIM, data))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::MleDiagnostics;

    #[test]
    fn report_contains_block_that_parses_back() {
        let rho = DensityMatrix::hybrid_target(0.3);
        let r = ReconstructionResult::evaluate(
            rho.clone(),
            &rho,
            MleDiagnostics {
                evaluations: 1,
                iterations: 1,
                restarts: 0,
                final_residual: 0.0,
                converged: true,
            },
        )
        .unwrap();
        let text = r.to_report();
        assert!(text.contains("fidelity = 1.000000"));
        let back = parse_density_block(&text).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-11);
        assert_eq!(
            parse_density_block("[rho]\n1 0\n"),
            Err(ReportParseError::WrongLength(1))
        );
    }
}
