use std::fmt::Write as _;

use thiserror::Error;

use super::projector::{Projector, ProjectionSetting};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
}

/// Acquisition metadata carried alongside the counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CountMeta {
    /// Expected pair count scale (mean counts per unit probability).
    pub n0: f64,
    /// Uniform accidental rate added to every bin.
    pub accidental: f64,
    pub seed: Option<u64>,
}

/// Coincidence counts keyed by joint projection setting, in acquisition order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountTable {
    entries: Vec<(ProjectionSetting, u64)>,
    pub meta: CountMeta,
}

impl CountTable {
    pub fn new(entries: Vec<(ProjectionSetting, u64)>, meta: CountMeta) -> Self {
        Self { entries, meta }
    }

    pub fn entries(&self) -> &[(ProjectionSetting, u64)] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Vec<(ProjectionSetting, u64)> {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, n)| n).sum()
    }

    /// Count for `setting`, matching analyzer phases to within 1e-5 rad.
    pub fn count(&self, setting: &ProjectionSetting) -> Option<u64> {
        self.entries.iter().find(|(s, _)| s == setting).map(|&(_, n)| n)
    }

    /// Groups phase-analyzer rows by photon A's phase, preserving order.
    ///
    /// Returns `(θ_A, [(θ_B, counts)])`; rows with labeled projectors are skipped.
    pub fn fringes(&self) -> Vec<(f64, Vec<(f64, u64)>)> {
        let mut out: Vec<(f64, Vec<(f64, u64)>)> = Vec::new();
        for (s, n) in &self.entries {
            let (Projector::Phase(a), Projector::Phase(b)) = (s.a, s.b) else {
                continue;
            };
            match out.iter_mut().find(|(ta, _)| Projector::Phase(*ta) == Projector::Phase(a)) {
                Some((_, trace)) => trace.push((b, *n)),
                None => out.push((a, vec![(b, *n)])),
            }
        }
        out
    }

    /// Flat text form: metadata comments, then `theta_a theta_b counts` rows.
    ///
    /// Analyzer phases are written in radians with 6 decimals; tomography
    /// states as `|0>`, `|1>`, `|+>`, `|+i>`, `|->`, `|-i>`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# count-table v1\n");
        let _ = writeln!(s, "# n0 {}", self.meta.n0);
        let _ = writeln!(s, "# accidental {}", self.meta.accidental);
        if let Some(seed) = self.meta.seed {
            let _ = writeln!(s, "# seed {seed}");
        }
        s.push_str("# theta_a theta_b counts\n");
        for (setting, n) in &self.entries {
            let _ = writeln!(s, "{} {} {}", setting.a, setting.b, n);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut table = CountTable::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| ParseError::Line { line, msg };
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some("n0"), Some(v)) => {
                        table.meta.n0 = v.parse().map_err(|_| err(format!("bad n0 '{v}'")))?
                    }
                    (Some("accidental"), Some(v)) => {
                        table.meta.accidental = v.parse().map_err(|_| err(format!("bad accidental '{v}'")))?
                    }
                    (Some("seed"), Some(v)) => {
                        table.meta.seed = Some(v.parse().map_err(|_| err(format!("bad seed '{v}'")))?)
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let [a, b, n] = fields[..] else {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            };
            let pa = Projector::parse(a).ok_or_else(|| err(format!("bad analyzer '{a}'")))?;
            let pb = Projector::parse(b).ok_or_else(|| err(format!("bad analyzer '{b}'")))?;
            let count = n.parse::<u64>().map_err(|_| err(format!("bad count '{n}'")))?;
            table.entries.push((ProjectionSetting::new(pa, pb), count));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_malformed_rows() {
        assert!(CountTable::from_text("0.1 0.2\n").is_err());
        assert!(CountTable::from_text("0.1 0.2 -4\n").is_err());
        assert!(CountTable::from_text("|q> 0.2 4\n").is_err());
    }

    #[test]
    fn fringes_group_by_theta_a() {
        let t = CountTable::new(
            vec![
                (ProjectionSetting::phases(0.0, 0.0), 1),
                (ProjectionSetting::phases(0.0, 1.0), 2),
                (ProjectionSetting::phases(1.0, 0.0), 3),
                (ProjectionSetting::new(Projector::Zero, Projector::One), 9),
            ],
            CountMeta::default(),
        );
        let f = t.fringes();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].1.len(), 2);
        assert_eq!(f[1], (1.0, vec![(0.0, 3)]));
    }

    proptest! {
        #[test]
        fn text_round_trip(
            rows in prop::collection::vec((0.0f64..6.28, 0.0f64..6.28, 0u64..1_000_000, 0usize..7), 0..40),
            seed in any::<u64>(),
        ) {
            let entries: Vec<_> = rows.iter().map(|&(a, b, n, k)| {
                let pa = if k < 6 { Projector::TOMOGRAPHY[k] } else { Projector::phase(a) };
                (ProjectionSetting::new(pa, Projector::phase(b)), n)
            }).collect();
            let t = CountTable::new(entries, CountMeta { n0: 1234.5, accidental: 0.25, seed: Some(seed) });
            let back = CountTable::from_text(&t.to_text()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
