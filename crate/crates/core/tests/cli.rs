use std::fs;
use std::process::Command;

fn bandloc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bandloc"))
}

fn write_config(dir: &std::path::Path, estimator: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        format!(
            r#"{{"name": "cli", "samples": 20,
                "ensemble": {{"W": 1, "n": 8, "symmetry": "real",
                              "diag_law": {{"kind": "scalar_density", "law": {{"kind": "uniform", "a": -1.0, "b": 1.0}}}},
                              "offdiag_law": {{"kind": "deterministic", "block": {{"re": [[1.0]]}}}}}},
                "estimator": {estimator}}}"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn subcommand_runs_and_honours_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "moment", "lambda": 0.0, "x": 1, "y": 8}"#);
    let out = dir.path().join("out");
    for workers in ["1", "4"] {
        let status = bandloc()
            .args(["--seed", "5", "--workers", workers, "--out"])
            .arg(&out)
            .arg("moments")
            .arg("--config")
            .arg(&cfg)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("cli.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["workers"], 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = write_config(dir.path(), r#"{"kind": "bogus"}"#);
    let output = bandloc().arg("moments").arg("--config").arg(&bogus).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("estimator.kind"));

    let moment = write_config(dir.path(), r#"{"kind": "moment", "lambda": 0.0, "x": 1, "y": 8}"#);
    let output = bandloc().arg("dos").arg("--config").arg(&moment).output().unwrap();
    assert_eq!(output.status.code(), Some(1));

    // 8 eigenvalues per draw cannot give 1000 spacings
    let spacing = write_config(dir.path(), r#"{"kind": "spacing", "lambda0": 0.0, "window": 1.0}"#);
    let output = bandloc()
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("spacing")
        .arg("--config")
        .arg(&spacing)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("spacings"));
}
