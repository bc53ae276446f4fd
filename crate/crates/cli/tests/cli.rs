//! End-to-end checks of the batch front door: exit classes, output files,
//! and byte-for-byte reproducibility.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shilnikov"))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn m0_path() -> PathBuf {
    workspace_root().join("configs/m0.json")
}

#[test]
fn validate_passes_on_m0() {
    let dir = tempdir("validate");
    let status = bin()
        .args(["validate", "--model"])
        .arg(m0_path())
        .arg("--out-dir")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("validation.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], serde_json::json!(true));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 0);
    assert!(manifest["model_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn validation_failure_exits_with_class_2() {
    let dir = tempdir("mutant");
    // Break the spectral gap: alpha < gamma fails.
    let mut model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(m0_path()).unwrap()).unwrap();
    model["spectrum"]["gamma"] = serde_json::json!(0.5);
    let mutant_path = dir.join("mutant.json");
    std::fs::write(&mutant_path, serde_json::to_string_pretty(&model).unwrap()).unwrap();

    let status = bin()
        .args(["validate", "--model"])
        .arg(&mutant_path)
        .arg("--out-dir")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // The failure is recorded in the manifest, never silent.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(!manifest["failures"].as_array().unwrap().is_empty());
}

#[test]
fn fixed_points_sweep_writes_gap_column() {
    let dir = tempdir("sweep");
    let status = bin()
        .args(["fixed-points", "--ell", "30..40", "--model"])
        .arg(m0_path())
        .arg("--out-dir")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("fixed_points.csv")).unwrap();
    let mut gaps = Vec::new();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[5], "true");
        gaps.push(fields[3].parse::<f64>().unwrap());
    }
    assert_eq!(gaps.len(), 11);
    assert!(
        gaps.windows(2).all(|w| w[1] < w[0]),
        "gap column not decreasing over the converged tail: {gaps:?}"
    );
}

#[test]
fn shadow_is_byte_identical_across_runs() {
    let dir_a = tempdir("shadow-a");
    let dir_b = tempdir("shadow-b");
    for dir in [&dir_a, &dir_b] {
        let status = bin()
            .args([
                "shadow", "--word", "010011", "--ell", "4", "--seed", "7", "--model",
            ])
            .arg(m0_path())
            .arg("--out-dir")
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["certificates.csv", "conley_moser_4.json"] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shilnikov-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
