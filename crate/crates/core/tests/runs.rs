//! End-to-end runs of the experiment commands into temporary directories.

use std::fs;
use std::path::{Path, PathBuf};

use bakerweyl::expio::{manifest_name, run, run_file, sha256_hex, Command, TaskState};
use bakerweyl::{ExperimentConfig, RunOptions};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn example_config() -> PathBuf {
    repo_root().join("configs/middle_thirds.conf")
}

fn opts(dir: &Path) -> RunOptions {
    RunOptions {
        out: Some(dir.to_path_buf()),
        jobs: Some(2),
    }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

#[test]
fn example_config_reproduces_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    for c in [Command::Spectrum, Command::Count] {
        let out = run_file(c, &example_config(), &opts(dir.path())).unwrap();
        assert_eq!(out.exit_code(), 0);
    }
    for name in ["spectrum_k03.csv", "counting.csv"] {
        let got = fs::read(dir.path().join(name)).unwrap();
        let want = fs::read(repo_root().join("configs/golden").join(name)).unwrap();
        assert!(got == want, "{name} differs from the golden file");
    }
}

#[test]
fn manifest_hashes_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_file(Command::Fup, &example_config(), &opts(dir.path())).unwrap();
    assert_eq!(out.manifest.failed(), 0);
    assert!(dir.path().join(manifest_name(Command::Fup)).exists());
    for f in &out.manifest.files {
        let bytes = fs::read(dir.path().join(&f.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.path);
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    let resolved = fs::read_to_string(dir.path().join("config.resolved")).unwrap();
    assert_eq!(sha256_hex(resolved.as_bytes()), out.manifest.config_sha256);
    assert_eq!(
        ExperimentConfig::parse(&resolved).unwrap(),
        ExperimentConfig::from_file(&example_config()).unwrap()
    );
    let checks = fs::read_to_string(dir.path().join("checks.jsonl")).unwrap();
    assert!(checks.lines().count() > 10);
    for line in checks.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["holds"], true, "{line}");
    }
}

#[test]
fn unitary_config_puts_spectrum_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("base = 2\nletters = 0, 1\ncutoff = indicator-one\nk = 3..5\n");
    let out = run(Command::Spectrum, &c, &opts(dir.path())).unwrap();
    assert_eq!(out.exit_code(), 0);
    for k in 3..=5 {
        let text = fs::read_to_string(dir.path().join(format!("spectrum_k{k:02}.csv"))).unwrap();
        for row in text.lines().skip(2) {
            let abs: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert!((abs - 1.0).abs() <= 1e-8, "{row}");
        }
    }
}

#[test]
fn empty_depth_list_writes_only_bookkeeping() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("base = 3\nletters = 0, 2\nk =\n");
    let out = run(Command::Spectrum, &c, &opts(dir.path())).unwrap();
    assert!(out.manifest.tasks.is_empty());
    let names: Vec<&str> = out.manifest.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["config.resolved", "spectrum_summary.jsonl"]);
    assert!(fs::read(dir.path().join("spectrum_summary.jsonl"))
        .unwrap()
        .is_empty());
}

#[test]
fn trivial_bound_rejected_for_improper_alphabets() {
    for letters in ["0, 1, 2", "1"] {
        let dir = tempfile::tempdir().unwrap();
        let c = config(&format!(
            "base = 3\nletters = {letters}\nk = 2, 3\nchecks = trivial-bound\n"
        ));
        let out = run(Command::Fup, &c, &opts(dir.path())).unwrap();
        let rejected: Vec<_> = out
            .manifest
            .tasks
            .iter()
            .filter(|t| t.task.starts_with("trivial-bound"))
            .collect();
        assert_eq!(rejected.len(), 2);
        for t in rejected {
            assert_eq!(t.status, TaskState::Rejected);
            assert!(t.detail.starts_with("rejected:"), "{}", t.detail);
        }
        assert_eq!(out.exit_code(), 0);
    }
}

#[test]
fn failing_task_does_not_stop_the_run() {
    let dir = tempfile::tempdir().unwrap();
    // Depth 1 is below the operator's minimum depth.
    let c = config("base = 3\nletters = 0, 2\nk = 1, 2\n");
    let out = run(Command::Spectrum, &c, &opts(dir.path())).unwrap();
    assert_eq!(out.exit_code(), 1);
    assert_eq!(out.manifest.tasks[0].status, TaskState::Failed);
    assert_eq!(out.manifest.tasks[1].status, TaskState::Ok);
    assert!(dir.path().join("spectrum_k02.csv").exists());
}

#[test]
fn theory_and_energy_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("base = 3\nletters = 0, 2\nk = 1..6\nbeta_bd = 0.1\nbeta = 0.01\ngamma = 0.1\ntheory_nu = 0:1:11\n");
    assert_eq!(
        run(Command::Theory, &c, &opts(dir.path()))
            .unwrap()
            .exit_code(),
        0
    );
    let theory = fs::read_to_string(dir.path().join("theory.csv")).unwrap();
    assert_eq!(theory.lines().count(), 2 + 11);
    assert!(dir.path().join("beta_bd_sanity.json").exists());
    assert_eq!(
        run(Command::Energy, &c, &opts(dir.path()))
            .unwrap()
            .exit_code(),
        0
    );
    let energy = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(energy.lines().nth(2), Some("1,3,2,6"));
    let gamma: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("gamma.json")).unwrap()).unwrap();
    assert!(gamma["gamma"].as_f64().unwrap() > 0.0);
}

#[test]
fn operator_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "base = 3\nletters = 0, 2\nk = 3\nexport_operator = true\nresiduals = true\nnu0 = 1\n",
    );
    run(Command::Spectrum, &c, &opts(dir.path())).unwrap();
    let bytes = fs::read(dir.path().join("operator_k03.bin")).unwrap();
    let op = bakerweyl::qbaker::read_operator(&bytes[..]).unwrap();
    let spec = c.family().unwrap().at_depth(3).unwrap();
    let direct = bakerweyl::qbaker::build_baker(&spec, 4096).unwrap();
    assert_eq!(op.max_abs_diff(&direct), 0.0);
    let summary = fs::read_to_string(dir.path().join("spectrum_summary.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(summary.lines().next().unwrap()).unwrap();
    assert!(v["backward_error"].as_f64().unwrap() < 1e-12);
    assert!(v["annulus_count"].as_u64().is_some());
}
