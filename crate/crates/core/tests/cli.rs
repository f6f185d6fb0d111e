use std::path::Path;
use std::process::{Command, Output};

fn qsky(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qsky"));
    cmd.args(args).env_remove("QSKY_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("QSKY_OUT_DIR", dir);
    }
    cmd.output().expect("qsky runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn table_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsky(
        &[
            "table", "--subspace", "1,0", "--subspace", "-3,2", "--grid", "64:6", "--n0", "5000", "--seed", "9",
            "--noise", "dephasing:0.9", "--out", &out_arg(dir.path()),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tsv = std::fs::read_to_string(dir.path().join("table.tsv")).unwrap();
    let rows: Vec<&str> = tsv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1\t0\t") && rows[1].starts_with("-3\t2\t"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest_table.txt")).unwrap();
    assert!(manifest.contains("seed = 9"));
    assert!(manifest.contains("table/counts_-3_2.txt"));
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsky(&["bell", "--subspace", "2,0", "--n0", "1000"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("bell.tsv").exists());
    assert!(dir.path().join("bell/curve_2_0.txt").exists());
}

#[test]
fn failures_give_nonzero_exit_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsky(
        &["texture", "--subspace", "1,0", "--grid", "64:6", "--noise", "isotropic:0", "--out", &out_arg(dir.path())],
        None,
    );
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("(1,0)") && err.contains("degenerate"), "{err}");
    assert!(dir.path().join("texture.tsv").exists());
}

#[test]
fn invalid_arguments_are_rejected() {
    let o = qsky(&["table", "--subspace", "2,2"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = qsky(&["table", "--noise", "thermal:0.2"], None);
    assert!(!o.status.success());
    let o = qsky(&["table", "--grid", "16:6"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tomo_reconstructs_an_exported_count_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = qsky(&["table", "--subspace", "2,1", "--grid", "64:6", "--out", &out], None);
    assert!(o.status.success());
    let counts = dir.path().join("table/counts_2_1.txt");
    let o = qsky(&["tomo", counts.to_str().unwrap(), "--out", &out], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("tomo/reconstruction.txt")).unwrap();
    let fidelity: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("fidelity = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(fidelity > 0.98, "{fidelity}");
}

#[test]
fn config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\nsubspaces = [[3, -2]]\n[grid]\nn = 64\n[rotation]\nkind = \"flip\"\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = qsky(&["texture", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("texture/report_3_-2.txt")).unwrap();
    assert!(report.contains("grid_n = 64"));
    assert!(report.contains("predicted_n = 5"));
}
