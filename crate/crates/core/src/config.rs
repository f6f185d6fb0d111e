//! Experiment configuration: a TOML file whose values can be overridden
//! from the command line.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::NoiseChannel;
use crate::measurement::ChshAngles;
use crate::source::SpectrumModel;
use crate::topology::GridSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("subspace ({0}, {0}) is degenerate; l1 must differ from l2")]
    DegenerateSubspace(i32),
    #[error("n0 must be >= 1, got {0}")]
    BadScale(f64),
    #[error("grid needs n >= 64 and a positive extent, got {n}:{extent}")]
    BadGrid { n: usize, extent: f64 },
    #[error("waist must be positive, got {0}")]
    BadWaist(f64),
    #[error("bad value `{value}` for {what}: expected {expected}")]
    Parse {
        what: &'static str,
        value: String,
        expected: &'static str,
    },
    #[error(transparent)]
    Noise(#[from] crate::circuit::CircuitError),
}

/// The twelve subspaces of the published summary table.
pub const TABLE_SUBSPACES: [(i32, i32); 12] = [
    (1, 0),
    (-1, 0),
    (2, 0),
    (-2, 0),
    (3, 0),
    (-3, 0),
    (1, -1),
    (2, 1),
    (-3, 1),
    (3, -1),
    (-3, 2),
    (3, -2),
];

/// The eight subspaces whose textures are shown in the published figure.
pub const TEXTURE_SUBSPACES: [(i32, i32); 8] = [(1, 0), (1, -1), (3, 0), (3, -2), (-1, 0), (-2, 0), (-3, 1), (-3, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub spectrum: SpectrumModel,
    /// Largest `|ℓ|` kept in the SPDC expansion.
    pub cutoff: u32,
    /// Single-mode-fiber coupling `η₀`; efficiency `η₀^{|ℓ|}`.
    pub eta0: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            spectrum: SpectrumModel::default(),
            cutoff: 6,
            eta0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub chi: f64,
    pub extra: f64,
}

/// HWP₁ setting: balanced automatically unless an angle is given.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub hwp1_angle: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Half-width in units of the waist.
    pub extent: f64,
    pub waist: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 512,
            extent: 6.0,
            waist: 1.0,
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.n, self.extent)
    }
}

/// How tomography counts are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Poisson draws around the expected counts.
    #[default]
    Poisson,
    /// Expected counts, rounded; for noiseless reference runs.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    pub restarts: usize,
    pub sampling: Sampling,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            sampling: Sampling::Poisson,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BellConfig {
    /// Photon-A analyzer phases, one fringe each.
    pub theta_a: Vec<f64>,
    /// Samples of `θ_B` over `[0, 2π)`.
    pub samples: usize,
    pub chsh: ChshAngles,
    /// Shift A's CHSH analyzers by the configured state phase.
    pub compensate_phase: bool,
}

impl Default for BellConfig {
    fn default() -> Self {
        Self {
            theta_a: vec![0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4],
            samples: 72,
            chsh: ChshAngles::default(),
            compensate_phase: true,
        }
    }
}

/// Polarization unitary applied to photon A before texture analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RotationConfig {
    Hwp { angle: f64 },
    Qwp { angle: f64 },
    /// `σ_x`, swapping `H` and `V`.
    Flip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Counts scale per setting.
    pub n0: f64,
    /// Worker threads; 0 uses available parallelism.
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub subspaces: Vec<(i32, i32)>,
    pub source: SourceConfig,
    pub gate: GateConfig,
    pub phases: PhaseConfig,
    pub noise: NoiseChannel,
    pub grid: GridConfig,
    pub tomography: TomographyConfig,
    pub bell: BellConfig,
    pub rotation: Option<RotationConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n0: 1e4,
            jobs: 0,
            out: None,
            subspaces: TABLE_SUBSPACES.to_vec(),
            source: SourceConfig::default(),
            gate: GateConfig::default(),
            phases: PhaseConfig::default(),
            noise: NoiseChannel::None,
            grid: GridConfig::default(),
            tomography: TomographyConfig::default(),
            bell: BellConfig::default(),
            rotation: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Canonical TOML form, used as the manifest's config echo.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(&(l, _)) = self.subspaces.iter().find(|(a, b)| a == b) {
            return Err(ConfigError::DegenerateSubspace(l));
        }
        if !(self.n0 >= 1.0) || !self.n0.is_finite() {
            return Err(ConfigError::BadScale(self.n0));
        }
        if self.grid.n < 64 || !(self.grid.extent > 0.0) || !self.grid.extent.is_finite() {
            return Err(ConfigError::BadGrid {
                n: self.grid.n,
                extent: self.grid.extent,
            });
        }
        if !(self.grid.waist > 0.0) || !self.grid.waist.is_finite() {
            return Err(ConfigError::BadWaist(self.grid.waist));
        }
        self.noise.validate()?;
        Ok(())
    }
}

fn parse_err(what: &'static str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::Parse {
        what,
        value: value.to_string(),
        expected,
    }
}

/// `L1,L2` subspace argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceArg(pub i32, pub i32);

impl FromStr for SubspaceArg {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || parse_err("--subspace", s, "L1,L2 with integer mode numbers");
        let (a, b) = s.split_once(',').ok_or_else(err)?;
        let a = a.trim().parse().map_err(|_| err())?;
        let b = b.trim().parse().map_err(|_| err())?;
        Ok(SubspaceArg(a, b))
    }
}

/// `KIND:P` noise argument, e.g. `dephasing:0.88`, `background:5`, `none`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseArg(pub NoiseChannel);

impl FromStr for NoiseArg {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || parse_err("--noise", s, "none, isotropic:P, dephasing:P or background:RATE");
        let (kind, value) = match s.split_once(':') {
            Some((k, v)) => (k, Some(v.parse::<f64>().map_err(|_| err())?)),
            None => (s, None),
        };
        let channel = match (kind.to_ascii_lowercase().as_str(), value) {
            ("none", None) => NoiseChannel::None,
            ("isotropic", Some(p)) => NoiseChannel::Isotropic { p },
            ("dephasing", Some(p)) => NoiseChannel::Dephasing { p },
            ("background", Some(rate)) => NoiseChannel::Background { rate },
            _ => return Err(err()),
        };
        channel.validate()?;
        Ok(NoiseArg(channel))
    }
}

/// `N:EXTENT` grid argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg {
    pub n: usize,
    pub extent: f64,
}

impl FromStr for GridArg {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || parse_err("--grid", s, "N:EXTENT, e.g. 512:6");
        let (n, e) = s.split_once(':').ok_or_else(err)?;
        Ok(GridArg {
            n: n.parse().map_err(|_| err())?,
            extent: e.parse().map_err(|_| err())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.subspaces.len(), 12);
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            seed = 7
            n0 = 100000.0
            subspaces = [[1, 0], [3, -2]]

            [source]
            cutoff = 4
            spectrum = { model = "uniform" }

            [noise]
            kind = "dephasing"
            p = 0.88

            [grid]
            n = 128

            [rotation]
            kind = "hwp"
            angle = 0.3
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.subspaces, vec![(1, 0), (3, -2)]);
        assert_eq!(cfg.source.spectrum, SpectrumModel::Uniform);
        assert_eq!(cfg.noise, NoiseChannel::Dephasing { p: 0.88 });
        assert_eq!(cfg.grid.n, 128);
        assert_eq!(cfg.grid.extent, 6.0);
        assert_eq!(cfg.rotation, Some(RotationConfig::Hwp { angle: 0.3 }));
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.subspaces = vec![(2, 2)];
        assert!(matches!(cfg.validate(), Err(ConfigError::DegenerateSubspace(2))));
        let mut cfg = ExperimentConfig::default();
        cfg.grid.n = 32;
        assert!(matches!(cfg.validate(), Err(ConfigError::BadGrid { .. })));
        let mut cfg = ExperimentConfig::default();
        cfg.n0 = 0.5;
        assert!(matches!(cfg.validate(), Err(ConfigError::BadScale(_))));
    }

    #[test]
    fn flag_parsers() {
        assert_eq!("3,-2".parse::<SubspaceArg>().unwrap(), SubspaceArg(3, -2));
        assert!("3".parse::<SubspaceArg>().is_err());
        assert_eq!(
            "dephasing:0.88".parse::<NoiseArg>().unwrap().0,
            NoiseChannel::Dephasing { p: 0.88 }
        );
        assert_eq!("none".parse::<NoiseArg>().unwrap().0, NoiseChannel::None);
        assert!("isotropic:1.5".parse::<NoiseArg>().is_err());
        assert!("thermal:0.1".parse::<NoiseArg>().is_err());
        assert_eq!("256:8".parse::<GridArg>().unwrap(), GridArg { n: 256, extent: 8.0 });
        assert!("256".parse::<GridArg>().is_err());
    }
}
