//! Config-driven runs: build each subspace's state, push it through
//! tomography, Bell or texture analysis, and write plain-text artifacts plus
//! a checksummed manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{balance_hwp1_with_coupling, hwp_jones, prepare_hybrid, qwp_jones, CircuitError, HybridStateSpec, Preparation, SmfCoupling};
use crate::config::{ConfigError, ExperimentConfig, RotationConfig, Sampling};
use crate::density::DensityMatrix;
use crate::measurement::{
    coincidence_curve, expected_counts, fitted_visibility, simulate_chsh_counts, chsh_from_counts, uniform_angles,
    CountMeta, CountTable, MeasurementError, ParseError, ProjectionSetting,
};
use crate::qmath::pauli_x;
use crate::seeding::{subspace_seed, Stage};
use crate::source::{spdc_spectrum, SpectrumError};
use crate::tomography::{mle_reconstruct, MleOptions, ReconstructionResult, TomographyError};
use crate::topology::{analyze_topology, basis_rotation, phase_grid_text, stokes_phases, TopologyError, TopologyReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("cannot parse count table: {0}")]
    Counts(#[from] ParseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// A written file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug)]
pub struct SubspaceResult<R> {
    pub ell1: i32,
    pub ell2: i32,
    pub outcome: Result<R, String>,
}

#[derive(Debug)]
pub struct RunOutput<R> {
    pub out_dir: PathBuf,
    pub rows: Vec<SubspaceResult<R>>,
    pub artifacts: Vec<Artifact>,
    pub manifest: PathBuf,
}

impl<R> RunOutput<R> {
    pub fn failures(&self) -> impl Iterator<Item = (i32, i32, &str)> {
        self.rows.iter().filter_map(|r| match &r.outcome {
            Err(e) => Some((r.ell1, r.ell2, e.as_str())),
            Ok(_) => None,
        })
    }

    pub fn is_success(&self) -> bool {
        self.failures().next().is_none()
    }
}

struct Writer<'a> {
    root: &'a Path,
}

impl Writer<'_> {
    fn write(&self, rel: &str, contents: &str) -> Result<Artifact, PipelineError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(&path, contents).map_err(|source| PipelineError::Io { path, source })?;
        Ok(Artifact {
            path: rel.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        })
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn tag(ell1: i32, ell2: i32) -> String {
    format!("{ell1}_{ell2}")
}

/// Source, gate, fiber and noise for one subspace under `cfg`.
pub fn prepare_subspace(cfg: &ExperimentConfig, ell1: i32, ell2: i32) -> Result<(HybridStateSpec, Preparation), PipelineError> {
    let spectrum = spdc_spectrum(&cfg.source.spectrum, cfg.source.cutoff)?;
    let coupling = SmfCoupling::new(cfg.source.eta0)?;
    let hwp1 = match cfg.gate.hwp1_angle {
        Some(theta) => theta,
        None => balance_hwp1_with_coupling(&spectrum, &coupling, ell1, ell2)?,
    };
    let spec = HybridStateSpec::new(ell1, ell2)?
        .with_hwp1(hwp1)
        .with_chi(cfg.phases.chi)
        .with_extra_phase(cfg.phases.extra);
    let prep = prepare_hybrid(&spec, &spectrum, &cfg.noise, &coupling)?;
    Ok((spec, prep))
}

/// Tomography counts for `rho` as configured (Poisson or rounded expectation).
pub fn tomography_counts(cfg: &ExperimentConfig, rho: &DensityMatrix, seed: u64) -> Result<CountTable, PipelineError> {
    let accidental = cfg.noise.accidental_rate();
    let settings = ProjectionSetting::tomography();
    Ok(match cfg.tomography.sampling {
        Sampling::Poisson => crate::tomography::simulate_tomography(rho, cfg.n0, accidental, seed)?,
        Sampling::Exact => {
            let means = expected_counts(rho, &settings, cfg.n0, accidental);
            CountTable::new(
                settings.into_iter().zip(means.iter().map(|m| m.round() as u64)).collect(),
                CountMeta {
                    n0: cfg.n0,
                    accidental,
                    seed: None,
                },
            )
        }
    })
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs `job` for every configured subspace in the worker pool.
fn per_subspace<R: Send>(
    cfg: &ExperimentConfig,
    job: impl Fn(i32, i32) -> Result<(R, Vec<Artifact>), PipelineError> + Sync + Send,
) -> Result<(Vec<SubspaceResult<R>>, Vec<Artifact>), PipelineError> {
    let results: Vec<(SubspaceResult<R>, Vec<Artifact>)> = with_pool(cfg.jobs, || {
        cfg.subspaces
            .par_iter()
            .map(|&(ell1, ell2)| match job(ell1, ell2) {
                Ok((r, arts)) => (SubspaceResult { ell1, ell2, outcome: Ok(r) }, arts),
                Err(e) => (
                    SubspaceResult {
                        ell1,
                        ell2,
                        outcome: Err(e.to_string()),
                    },
                    Vec::new(),
                ),
            })
            .collect()
    })?;
    let mut rows = Vec::with_capacity(results.len());
    let mut artifacts = Vec::new();
    for (row, arts) in results {
        rows.push(row);
        artifacts.extend(arts);
    }
    Ok((rows, artifacts))
}

fn finish<R>(
    command: &str,
    cfg: &ExperimentConfig,
    out: &Path,
    rows: Vec<SubspaceResult<R>>,
    mut artifacts: Vec<Artifact>,
) -> Result<RunOutput<R>, PipelineError> {
    artifacts.sort();
    let mut text = String::from("# qsky manifest v1\n");
    let _ = writeln!(text, "command = {command}");
    let _ = writeln!(text, "seed = {}", cfg.seed);
    text.push_str("[config]\n");
    text.push_str(&cfg.to_toml());
    text.push_str("[artifacts]\n");
    for a in &artifacts {
        let _ = writeln!(text, "{}  {}", a.sha256, a.path);
    }
    let name = format!("manifest_{command}.txt");
    Writer { root: out }.write(&name, &text)?;
    Ok(RunOutput {
        out_dir: out.to_path_buf(),
        rows,
        artifacts,
        manifest: out.join(name),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.6}"))
}

/// One row of the summary table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub reconstruction: ReconstructionResult,
    pub topology: TopologyReport,
}

/// Per subspace: state → tomography counts → MLE → metrics → texture of `ρ̂`.
pub fn run_table(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput<TableRow>, PipelineError> {
    cfg.validate()?;
    let w = Writer { root: out };
    let (rows, mut artifacts) = per_subspace(cfg, |ell1, ell2| {
        let (spec, prep) = prepare_subspace(cfg, ell1, ell2)?;
        let counts = tomography_counts(cfg, &prep.rho, subspace_seed(cfg.seed, ell1, ell2, Stage::Tomography))?;
        let options = MleOptions {
            restarts: cfg.tomography.restarts,
            seed: subspace_seed(cfg.seed, ell1, ell2, Stage::Reconstruction),
            target: Some(DensityMatrix::hybrid_target(spec.total_phase())),
            ..Default::default()
        };
        let reconstruction = mle_reconstruct(&counts, &options)?;
        let (_, topology) = analyze_topology(&reconstruction.rho_hat, ell1, ell2, cfg.grid.waist, cfg.grid.spec())?;
        let t = tag(ell1, ell2);
        let arts = vec![
            w.write(&format!("table/counts_{t}.txt"), &counts.to_text())?,
            w.write(&format!("table/reconstruction_{t}.txt"), &reconstruction.to_report())?,
        ];
        Ok((TableRow { reconstruction, topology }, arts))
    })?;

    let mut tsv = String::from("l1\tl2\tF\tgamma\tC\tphase\tN_predicted\tN_measured\tN_raw\tstatus\n");
    let mut summary = String::from(" (l1,l2)        F    gamma        C  N_pred   N_meas\n");
    for r in &rows {
        match &r.outcome {
            Ok(row) => {
                let (rec, top) = (&row.reconstruction, &row.topology);
                let _ = writeln!(
                    tsv,
                    "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{:.6}\t{:.6}\tok",
                    r.ell1,
                    r.ell2,
                    rec.fidelity,
                    rec.purity,
                    rec.concurrence,
                    fmt_opt(rec.relative_phase),
                    top.predicted.n,
                    top.skyrmion_number,
                    top.raw_skyrmion_number
                );
                let _ = writeln!(
                    summary,
                    "{:>8} {:>8.4} {:>8.4} {:>8.4} {:>7} {:>8.4}",
                    format!("({},{})", r.ell1, r.ell2),
                    rec.fidelity,
                    rec.purity,
                    rec.concurrence,
                    top.predicted.n,
                    top.skyrmion_number
                );
            }
            Err(e) => {
                let _ = writeln!(tsv, "{}\t{}\tnan\tnan\tnan\tnan\tnan\tnan\tnan\terror: {e}", r.ell1, r.ell2);
                let _ = writeln!(summary, "{:>8} failed: {e}", format!("({},{})", r.ell1, r.ell2));
            }
        }
    }
    artifacts.push(w.write("table.tsv", &tsv)?);
    artifacts.push(w.write("table.txt", &summary)?);
    finish("table", cfg, out, rows, artifacts)
}

#[derive(Debug, Clone)]
pub struct BellRow {
    /// Fitted visibility per configured `θ_A`.
    pub visibilities: Vec<f64>,
    pub mean_visibility: f64,
    pub s: f64,
    pub sigma: f64,
}

/// Per subspace: fringes over `θ_B` at each configured `θ_A`, and the CHSH
/// parameter from Poisson counts.
pub fn run_bell(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput<BellRow>, PipelineError> {
    cfg.validate()?;
    let w = Writer { root: out };
    let theta_b = uniform_angles(cfg.bell.samples);
    let (rows, mut artifacts) = per_subspace(cfg, |ell1, ell2| {
        let (spec, prep) = prepare_subspace(cfg, ell1, ell2)?;
        let accidental = cfg.noise.accidental_rate();
        let curve = coincidence_curve(
            &prep.rho,
            &cfg.bell.theta_a,
            &theta_b,
            cfg.n0,
            accidental,
            subspace_seed(cfg.seed, ell1, ell2, Stage::BellCurve),
        )?;
        let mut visibilities = Vec::with_capacity(cfg.bell.theta_a.len());
        for (_, trace) in curve.fringes() {
            let (t, v): (Vec<f64>, Vec<f64>) = trace.iter().map(|&(b, n)| (b, n as f64)).unzip();
            visibilities.push(fitted_visibility(&t, &v)?);
        }
        let mean_visibility = visibilities.iter().sum::<f64>() / visibilities.len().max(1) as f64;
        let angles = if cfg.bell.compensate_phase {
            cfg.bell.chsh.offset_a(spec.total_phase())
        } else {
            cfg.bell.chsh
        };
        let chsh_counts = simulate_chsh_counts(
            &prep.rho,
            &angles,
            cfg.n0,
            accidental,
            subspace_seed(cfg.seed, ell1, ell2, Stage::Chsh),
        )?;
        let est = chsh_from_counts(&chsh_counts, &angles)?;
        let t = tag(ell1, ell2);
        let arts = vec![
            w.write(&format!("bell/curve_{t}.txt"), &curve.to_text())?,
            w.write(&format!("bell/chsh_{t}.txt"), &chsh_counts.to_text())?,
        ];
        Ok((
            BellRow {
                visibilities,
                mean_visibility,
                s: est.s,
                sigma: est.sigma,
            },
            arts,
        ))
    })?;

    let header: Vec<String> = cfg.bell.theta_a.iter().map(|a| format!("V({a:.4})")).collect();
    let mut tsv = format!("l1\tl2\t{}\tV_mean\tS\tsigma_S\tstatus\n", header.join("\t"));
    for r in &rows {
        match &r.outcome {
            Ok(b) => {
                let vs: Vec<String> = b.visibilities.iter().map(|v| format!("{v:.6}")).collect();
                let _ = writeln!(
                    tsv,
                    "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\tok",
                    r.ell1,
                    r.ell2,
                    vs.join("\t"),
                    b.mean_visibility,
                    b.s,
                    b.sigma
                );
            }
            Err(e) => {
                let _ = writeln!(tsv, "{}\t{}\terror: {e}", r.ell1, r.ell2);
            }
        }
    }
    artifacts.push(w.write("bell.tsv", &tsv)?);
    finish("bell", cfg, out, rows, artifacts)
}

fn rotation_matrix(rotation: &RotationConfig) -> crate::qmath::ComplexMatrix {
    match *rotation {
        RotationConfig::Hwp { angle } => hwp_jones(angle),
        RotationConfig::Qwp { angle } => qwp_jones(angle),
        RotationConfig::Flip => pauli_x(),
    }
}

/// Per subspace: Stokes field of the prepared state, three phase grids and a
/// topology report.
pub fn run_texture(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput<TopologyReport>, PipelineError> {
    cfg.validate()?;
    let w = Writer { root: out };
    let (rows, mut artifacts) = per_subspace(cfg, |ell1, ell2| {
        let (_, prep) = prepare_subspace(cfg, ell1, ell2)?;
        let rho = match &cfg.rotation {
            Some(r) => basis_rotation(&prep.rho, &rotation_matrix(r))?,
            None => prep.rho,
        };
        let (field, report) = analyze_topology(&rho, ell1, ell2, cfg.grid.waist, cfg.grid.spec())?;
        let phases = stokes_phases(&field);
        let t = tag(ell1, ell2);
        let arts = vec![
            w.write(&format!("texture/field_{t}.txt"), &field.to_text())?,
            w.write(&format!("texture/phase_xy_{t}.txt"), &phase_grid_text(&field, "xy", &phases.xy))?,
            w.write(&format!("texture/phase_yz_{t}.txt"), &phase_grid_text(&field, "yz", &phases.yz))?,
            w.write(&format!("texture/phase_zx_{t}.txt"), &phase_grid_text(&field, "zx", &phases.zx))?,
            w.write(&format!("texture/report_{t}.txt"), &report.to_text(ell1, ell2))?,
        ];
        Ok((report, arts))
    })?;

    let mut tsv = String::from("l1\tl2\tN_predicted\tN\tN_raw\tclosure\tmasked\tstatus\n");
    for r in &rows {
        match &r.outcome {
            Ok(t) => {
                let _ = writeln!(
                    tsv,
                    "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\tok",
                    r.ell1, r.ell2, t.predicted.n, t.skyrmion_number, t.raw_skyrmion_number, t.integral.closure, t.masked
                );
            }
            Err(e) => {
                let _ = writeln!(tsv, "{}\t{}\tnan\tnan\tnan\tnan\tnan\terror: {e}", r.ell1, r.ell2);
            }
        }
    }
    artifacts.push(w.write("texture.tsv", &tsv)?);
    finish("texture", cfg, out, rows, artifacts)
}

/// Reconstructs one state from an ingested count table.
pub fn run_tomo(cfg: &ExperimentConfig, counts: &Path, out: &Path) -> Result<RunOutput<ReconstructionResult>, PipelineError> {
    let text = std::fs::read_to_string(counts).map_err(|source| PipelineError::Io {
        path: counts.to_path_buf(),
        source,
    })?;
    let table = CountTable::from_text(&text)?;
    let options = MleOptions {
        restarts: cfg.tomography.restarts,
        seed: crate::seeding::derive_seed(cfg.seed, &[Stage::Reconstruction as u64]),
        target: Some(DensityMatrix::hybrid_target(cfg.phases.chi + cfg.phases.extra)),
        ..Default::default()
    };
    let result = mle_reconstruct(&table, &options)?;
    let artifact = Writer { root: out }.write("tomo/reconstruction.txt", &result.to_report())?;
    let row = SubspaceResult {
        ell1: 0,
        ell2: 0,
        outcome: Ok(result),
    };
    finish("tomo", cfg, out, vec![row], vec![artifact])
}
