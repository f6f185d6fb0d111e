use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skyrmion_circuit::config::{ExperimentConfig, GridArg, NoiseArg, SubspaceArg};
use skyrmion_circuit::pipeline::{self, RunOutput};

/// Default output directory when neither `--out` nor the config sets one.
const OUT_DIR_ENV: &str = "QSKY_OUT_DIR";

#[derive(Parser)]
#[command(name = "qsky", version, about = "Hybrid-entanglement circuit simulator: tomography, Bell tests and skyrmion textures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Tomography, metrics and skyrmion number for every subspace
    Table,
    /// Coincidence fringes, visibility and CHSH parameter
    Bell,
    /// Stokes fields, phase grids and topology reports
    Texture,
    /// Reconstruct one state from a count-table file
    Tomo {
        counts: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: $QSKY_OUT_DIR or ./qsky-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Subspace L1,L2; repeat to run several
    #[arg(long = "subspace", global = true, allow_hyphen_values = true)]
    subspaces: Vec<SubspaceArg>,
    /// none | isotropic:P | dephasing:P | background:RATE
    #[arg(long, global = true)]
    noise: Option<NoiseArg>,
    /// N:EXTENT
    #[arg(long, global = true)]
    grid: Option<GridArg>,
    #[arg(long, global = true)]
    n0: Option<f64>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf), String> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if !self.subspaces.is_empty() {
            cfg.subspaces = self.subspaces.iter().map(|s| (s.0, s.1)).collect();
        }
        if let Some(n) = self.noise {
            cfg.noise = n.0;
        }
        if let Some(g) = self.grid {
            cfg.grid.n = g.n;
            cfg.grid.extent = g.extent;
        }
        if let Some(n0) = self.n0 {
            cfg.n0 = n0;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("qsky-out"));
        cfg.validate().map_err(|e| e.to_string())?;
        Ok((cfg, out))
    }
}

fn report<R>(out: RunOutput<R>) -> ExitCode {
    let failures: Vec<_> = out.failures().collect();
    println!("wrote {} artifacts, manifest {}", out.artifacts.len(), out.manifest.display());
    if failures.is_empty() {
        return ExitCode::SUCCESS;
    }
    eprintln!("{} subspace(s) failed:", failures.len());
    for (l1, l2, e) in failures {
        eprintln!("  ({l1},{l2}): {e}");
    }
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, out) = match cli.common.resolve() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Table => pipeline::run_table(&cfg, &out).map(report),
        Command::Bell => pipeline::run_bell(&cfg, &out).map(report),
        Command::Texture => pipeline::run_texture(&cfg, &out).map(report),
        Command::Tomo { counts } => pipeline::run_tomo(&cfg, counts, &out).map(report),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
