use skyrmion_circuit::circuit::NoiseChannel;
use skyrmion_circuit::config::{ExperimentConfig, Sampling, TEXTURE_SUBSPACES};
use skyrmion_circuit::pipeline::{run_bell, run_table, run_texture};
use skyrmion_circuit::topology::{skyrmion_number, StokesField};

#[test]
fn texture_run_covers_figure_subspaces_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.subspaces = TEXTURE_SUBSPACES.to_vec();
    cfg.grid.n = 128;
    let out = run_texture(&cfg, dir.path()).unwrap();
    assert!(out.is_success());
    let mut classes: Vec<i32> = Vec::new();
    for row in &out.rows {
        let report = row.outcome.as_ref().unwrap();
        classes.push(report.predicted.n);
        let text = std::fs::read_to_string(dir.path().join(format!("texture/field_{}_{}.txt", row.ell1, row.ell2))).unwrap();
        let field = StokesField::from_text(&text).unwrap();
        assert_eq!(skyrmion_number(&field).unwrap().to_bits(), report.skyrmion_number.to_bits());
        for c in ["xy", "yz", "zx"] {
            assert!(dir.path().join(format!("texture/phase_{c}_{}_{}.txt", row.ell1, row.ell2)).exists());
        }
    }
    classes.sort();
    assert_eq!(classes, vec![-5, -4, -2, -1, 0, 1, 3, 5]);
}

#[test]
fn ideal_table_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.tomography.sampling = Sampling::Exact;
    cfg.n0 = 1e6;
    cfg.grid.n = 256;
    let out = run_table(&cfg, dir.path()).unwrap();
    for row in &out.rows {
        let r = row.outcome.as_ref().unwrap();
        let rec = &r.reconstruction;
        assert!(rec.fidelity > 0.9999 && rec.purity > 0.9999 && rec.concurrence > 0.9999, "{:?}", (row.ell1, row.ell2));
        assert!((r.topology.skyrmion_number - r.topology.predicted.n as f64).abs() < 0.02);
    }
}

#[test]
fn bell_run_matches_dephasing_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.subspaces = vec![(1, 0), (3, -2)];
    cfg.noise = NoiseChannel::Dephasing { p: 0.91 };
    cfg.n0 = 1e5;
    cfg.phases.chi = std::f64::consts::PI / 6.0;
    let out = run_bell(&cfg, dir.path()).unwrap();
    for row in &out.rows {
        let b = row.outcome.as_ref().unwrap();
        assert!((b.mean_visibility - 0.91).abs() < 0.02, "{}", b.mean_visibility);
        assert!((b.s - 2.0 * std::f64::consts::SQRT_2 * 0.91).abs() < 0.04, "{}", b.s);
    }
}
