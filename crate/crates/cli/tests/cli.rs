use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeboundary"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn reports(path: &Path) -> Vec<serde_json::Value> {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bin(
        &["solve", "--seed", "disk", "--refine", "3", "--out", "."],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["disk.noff", "disk.noff.stats.json", "disk.log.csv"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let o = bin(
        &[
            "verify",
            "--mesh",
            "disk.noff",
            "--checks",
            "main,isoperimetric",
            "--tol-disc",
            "1e-2",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = reports(&d.join("disk.report.json"));
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|x| x["passed"] == true));
    assert_eq!(r[0]["check_name"], "main_theorem");
}

#[test]
fn raw_and_tampered_meshes_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&bin(&["solve", "--seed", "disk", "--refine", "2"], d)),
        0
    );
    let text = fs::read_to_string(d.join("disk.noff")).unwrap();
    fs::write(d.join("raw.noff"), &text).unwrap();
    let o = bin(&["verify", "--mesh", "raw.noff", "--checks", "main"], d);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("attestation"));
    // Monotonicity needs no attestation.
    let o = bin(
        &[
            "verify",
            "--mesh",
            "raw.noff",
            "--checks",
            "monotonicity",
            "--set",
            "mono_radii=0.2,0.5",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // A sidecar issued for another mesh.
    fs::copy(
        d.join("disk.noff.stats.json"),
        d.join("raw.noff.stats.json"),
    )
    .unwrap();
    assert_eq!(
        code(&bin(
            &["solve", "--seed", "disk", "--refine", "3", "--name", "other"],
            d
        )),
        0
    );
    fs::copy(d.join("other.noff"), d.join("raw.noff")).unwrap();
    let o = bin(&["verify", "--mesh", "raw.noff", "--checks", "main"], d);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("digest"));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.cfg"),
        "seed = disk\nrefine = 2\ngrad_tol = zero\n",
    )
    .unwrap();
    let o = bin(&["solve", "--config", "run.cfg"], d);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grad_tol"));
    // A flag overrides the bad file value.
    let o = bin(&["solve", "--config", "run.cfg", "--grad-tol", "1e-8"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(
        &["verify", "--mesh", "disk.noff", "--checks", "main,nonsense"],
        d,
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("checks"));
}

#[test]
fn stall_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &[
            "solve",
            "--seed",
            "perturbed_disk",
            "--refine",
            "2",
            "--set",
            "initial_step=100",
            "--set",
            "max_halvings=1",
            "--set",
            "spectral=false",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("perturbed_disk.log.csv").exists());
}

#[test]
fn field_sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "field-sample",
        "--k",
        "3",
        "--samples",
        "500",
        "--rng",
        "42",
    ];
    assert_eq!(code(&bin(&args, d)), 0);
    let csv = fs::read(d.join("field_k3.csv")).unwrap();
    let json = fs::read(d.join("field_k3.report.json")).unwrap();
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 501);
    assert_eq!(code(&bin(&args, d)), 0);
    assert_eq!(fs::read(d.join("field_k3.csv")).unwrap(), csv);
    assert_eq!(fs::read(d.join("field_k3.report.json")).unwrap(), json);
    let r = reports(&d.join("field_k3.report.json"));
    assert_eq!(r[0]["rng"]["generator"], "ChaCha8");
    assert_eq!(r[0]["rng"]["seed"], 42);
}

#[test]
fn report_on_selected_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "report",
        "--fixtures",
        "chord,great-circle,small-circle",
        "--set",
        "lemmas=false",
    ];
    let o = bin(&args, d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let first = fs::read(d.join("suite_report.json")).unwrap();
    assert_eq!(code(&bin(&args, d)), 0);
    assert_eq!(fs::read(d.join("suite_report.json")).unwrap(), first);
    let r = reports(&d.join("suite_report.json"));
    let small = r.iter().find(|x| x["subject"] == "small-circle").unwrap();
    assert_eq!(small["passed"], false);
    assert_eq!(small["expected_fail"], true);
    let o = bin(&["report", "--fixtures", "nope"], d);
    assert_eq!(code(&o), 2);
    let o = bin(&["report", "--list-fixtures"], d);
    assert!(String::from_utf8_lossy(&o.stdout).contains("spike-negative"));
}
