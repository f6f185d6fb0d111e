//! The full per-subspace summary table under a dephasing model.
//!
//!     cargo run --release --example table_reproduction -- configs/reference_table.toml out

use std::path::PathBuf;

use skyrmion_circuit::config::ExperimentConfig;
use skyrmion_circuit::pipeline::run_table;

fn main() {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => ExperimentConfig::load(path.as_ref()).unwrap(),
        None => ExperimentConfig::from_toml(include_str!("../configs/reference_table.toml")).unwrap(),
    };
    let out = args.next().map_or_else(|| std::env::temp_dir().join("qsky-table"), PathBuf::from);

    let run = run_table(&cfg, &out).unwrap();
    print!("{}", std::fs::read_to_string(out.join("table.txt")).unwrap());
    println!("artifacts in {}", run.out_dir.display());
    for (l1, l2, e) in run.failures() {
        eprintln!("({l1},{l2}) failed: {e}");
    }
}
