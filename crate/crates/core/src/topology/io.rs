use std::fmt::Write as _;

use thiserror::Error;

use super::field::{GridSpec, StokesField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldParseError {
    #[error("missing header field `{0}`")]
    MissingHeader(&'static str),
    #[error("bad value on line {0}")]
    BadLine(usize),
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

impl StokesField {
    /// Plain-text export: a `#` header then one `x y Sx Sy Sz mask` row per
    /// point, `x` fastest. Floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut s = String::with_capacity(n * n * 80);
        s.push_str("# stokes-field v1\n");
        let _ = writeln!(s, "# n {n}");
        let _ = writeln!(s, "# extent {}", self.extent());
        let _ = writeln!(s, "# waist {}", self.waist);
        let _ = writeln!(s, "# subspace {} {}", self.ell1, self.ell2);
        s.push_str("# x y Sx Sy Sz mask\n");
        for j in 0..n {
            let y = self.grid.coordinate(j);
            for i in 0..n {
                let k = j * n + i;
                let v = self.unit[k];
                let _ = writeln!(
                    s,
                    "{} {} {} {} {} {}",
                    self.grid.coordinate(i),
                    y,
                    v[0],
                    v[1],
                    v[2],
                    u8::from(self.mask[k])
                );
            }
        }
        s
    }

    /// Inverse of [`StokesField::to_text`]. The raw (unnormalized) field is
    /// not stored, so the parsed field carries the unit vectors in its place.
    pub fn from_text(text: &str) -> Result<Self, FieldParseError> {
        let mut n = None;
        let mut extent = None;
        let mut waist = None;
        let mut subspace = None;
        let mut unit = Vec::new();
        let mut mask = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || FieldParseError::BadLine(idx + 1);
            if let Some(header) = line.strip_prefix('#') {
                let mut parts = header.split_whitespace();
                match parts.next() {
                    Some("n") => n = Some(parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?),
                    Some("extent") => extent = Some(parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?),
                    Some("waist") => waist = Some(parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?),
                    Some("subspace") => {
                        let a = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                        let b = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                        subspace = Some((a, b));
                    }
                    _ => {}
                }
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 6 {
                return Err(bad());
            }
            let mut v = [0.0; 3];
            for d in 0..3 {
                v[d] = cols[2 + d].parse().map_err(|_| bad())?;
            }
            let m = match cols[5] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            unit.push(v);
            mask.push(m);
        }
        let n: usize = n.ok_or(FieldParseError::MissingHeader("n"))?;
        let extent = extent.ok_or(FieldParseError::MissingHeader("extent"))?;
        let waist = waist.ok_or(FieldParseError::MissingHeader("waist"))?;
        let (ell1, ell2) = subspace.ok_or(FieldParseError::MissingHeader("subspace"))?;
        if unit.len() != n * n {
            return Err(FieldParseError::RowCount {
                expected: n * n,
                found: unit.len(),
            });
        }
        Ok(StokesField {
            grid: GridSpec::new(n, extent),
            waist,
            ell1,
            ell2,
            raw: unit.clone(),
            unit,
            mask,
        })
    }
}

/// `x y phi mask` rows in the same layout as the field export.
pub fn phase_grid_text(field: &StokesField, component: &str, phases: &[f64]) -> String {
    let n = field.n();
    let grid = field.grid();
    let mut s = String::with_capacity(n * n * 48);
    s.push_str("# stokes-phase v1\n");
    let _ = writeln!(s, "# component {component}");
    let _ = writeln!(s, "# n {n}");
    let _ = writeln!(s, "# extent {}", grid.extent);
    s.push_str("# x y phi mask\n");
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            let _ = writeln!(
                s,
                "{} {} {} {}",
                grid.coordinate(i),
                grid.coordinate(j),
                phases[k],
                u8::from(field.mask()[k])
            );
        }
    }
    s
}
