use std::path::Path;
use std::process::Command;

use muskat_bubble::io::snapshot::read_snapshots;

const BIN: &str = env!("CARGO_BIN_EXE_muskat");

fn write_config(dir: &Path, out: &str, t_end: f64) -> std::path::PathBuf {
    let path = dir.join(format!("{out}.toml"));
    std::fs::write(
        &path,
        format!(
            "A_mu = 0.25\nA_rhosigma = 1\ninitial = [[2, 0.01, 0.0]]\n[integrator]\nn_max = 16\ndt = 5e-3\nt_end = {t_end}\n[output]\ndir = \"{out}\"\ncurve_stride = 10\nspectrum_stride = 10\ndecay_window = [0.0, 0.1]\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_and_resume_under_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let first = write_config(tmp.path(), "first", 0.05);
    let status = Command::new(BIN)
        .args(["run", first.to_str().unwrap()])
        .env("MUSKAT_OUTPUT_ROOT", tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    let spectrum = tmp.path().join("first").join("spectrum.jsonl");
    assert!(spectrum.exists());
    assert!(tmp.path().join("first").join("curves").read_dir().unwrap().count() >= 2);

    let second = write_config(tmp.path(), "second", 0.1);
    let status = Command::new(BIN)
        .args(["resume", spectrum.to_str().unwrap(), second.to_str().unwrap()])
        .env("MUSKAT_OUTPUT_ROOT", tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    let last = read_snapshots(&tmp.path().join("second").join("spectrum.jsonl")).unwrap();
    assert!((last.last().unwrap().t - 0.1).abs() < 1e-12);
}

#[test]
fn bad_config_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, "A_mu = 1.5\nA_rhosigma = 1\ninitial = [[2, 0.01, 0.0]]\n").unwrap();
    let out = Command::new(BIN)
        .args(["run", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("A_mu"));
}

#[test]
fn verify_quick_and_fault_injection() {
    let out = Command::new(BIN).args(["verify", "--level", "quick"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let out = Command::new(BIN)
        .args(["verify", "--inject-fault", "flip-coupling-sign"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL  diagonalization_residual"));
}
