use std::fs;
use std::path::Path;

use bandloc::harness::{self, ExperimentConfig, RunError, RunManifest};

fn config(dir: &Path, estimator: &str, samples: usize, workers: usize) -> ExperimentConfig {
    let text = format!(
        r#"{{
          "name": "run",
          "ensemble": {{"W": 2, "N": 40, "symmetry": "complex",
                        "diag_law": {{"kind": "gaussian_wigner"}},
                        "offdiag_law": {{"kind": "gaussian_triangular"}}, "seed": 11}},
          "estimator": {estimator},
          "samples": {samples},
          "workers": {workers},
          "output_dir": {:?}
        }}"#,
        dir.display().to_string()
    );
    ExperimentConfig::from_json(&text).unwrap()
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn worker_count_does_not_change_bytes() {
    let estimators = [
        r#"{"kind": "sample"}"#,
        r#"{"kind": "resolvent", "lambda": 0.3, "x": 1, "y": 40}"#,
        r#"{"kind": "decay", "lambda": 0.0, "x0": 1, "distances": [0, 4, 8, 12, 16, 20, 24, 28], "fit_window": 6}"#,
        r#"{"kind": "tail", "lambda": 0.0, "x": 3, "y": 3, "t_grid": [1, 2, 4]}"#,
        r#"{"kind": "dos", "bins": 16}"#,
        r#"{"kind": "eigvec", "r": 1.0, "site_pairs": [[1, 1], [1, 9], [1, 17], [1, 25], [1, 33]], "fit_window": 6}"#,
        r#"{"kind": "simplicity"}"#,
    ];
    for est in estimators {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        harness::run(&config(a.path(), est, 64, 1)).unwrap();
        harness::run(&config(b.path(), est, 64, 8)).unwrap();
        let (ba, bb) = (csv_bytes(a.path()), csv_bytes(b.path()));
        assert!(!ba.is_empty());
        assert_eq!(ba, bb, "{est}");
    }
}

#[test]
fn manifest_describes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"kind": "moment", "lambda": 0.0, "x": 1, "y": 7}"#, 200, 3);
    let (manifest, _) = harness::run(&cfg).unwrap();
    let on_disk: RunManifest =
        serde_json::from_slice(&fs::read(dir.path().join("run.manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);
    assert_eq!(manifest.worker_ranges, vec![(0, 67), (67, 134), (134, 200)]);
    assert_eq!(
        manifest.config_hash,
        harness::output::sha256_hex(cfg.to_json().as_bytes())
    );
    for f in &manifest.files {
        let bytes = fs::read(dir.path().join(&f.name)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes);
        assert_eq!(harness::output::sha256_hex(&bytes), f.sha256);
    }
    let csv = String::from_utf8(fs::read(dir.path().join("run.moments.csv")).unwrap()).unwrap();
    assert!(csv.starts_with("estimator,lambda,x,y,dist,s,value,stderr,n,rejected\n"));
}

#[test]
fn seed_override_changes_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let est = r#"{"kind": "sample"}"#;
    harness::run(&config(a.path(), est, 1, 1)).unwrap();
    let mut cfg = config(b.path(), est, 1, 1);
    cfg.apply_overrides(Some(12), None, None, None);
    harness::run(&cfg).unwrap();
    assert_ne!(csv_bytes(a.path()), csv_bytes(b.path()));
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = config(&out, r#"{"kind": "decay", "lambda": 0.0, "x0": 1, "distances": [1, 2], "fit_window": 2}"#, 10, 1);
    match harness::run(&cfg) {
        Err(e @ RunError::Validation(_)) => {
            assert_eq!(e.exit_code(), 1);
            let msg = e.to_string();
            assert!(msg.contains("estimator.fit_window"), "{msg}");
            assert!(msg.contains("estimator.distances"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
    assert!(!out.exists());
}

#[test]
fn runtime_failure_leaves_no_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let est = r#"{"kind": "moment", "lambda": 0.0, "x": 1, "y": 7}"#;
    harness::run(&config(dir.path(), est, 50, 1)).unwrap();
    assert!(dir.path().join("run.manifest.json").exists());
    // too few draws for a resolved decade
    let est = r#"{"kind": "minami", "lengths": [0.001, 0.01, 0.1]}"#;
    let err = harness::run(&config(dir.path(), est, 2, 1)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join("run.manifest.json").exists());
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_json(&fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert_eq!(count, bandloc::harness::Estimator::KINDS.len());
}
