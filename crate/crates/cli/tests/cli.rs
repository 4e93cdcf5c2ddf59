use std::path::Path;
use std::process::{Command, Output};

fn wave_lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wave-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WAVE_LAB_OUT")
        .output()
        .expect("spawn wave-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "p = 5\ndt = fast\n").unwrap();
    let o = wave_lab(
        &["energy-conservation", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let err: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert_eq!(err["error"]["field"], "dt");
    assert!(dir.path().join("out/error.json").exists());
}

#[test]
fn unknown_key_and_scenario_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = wave_lab(&["linear-exactness", "--speed", "9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"field\": \"speed\""));
    let o = wave_lab(&["no-such-scenario"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"kind\": \"usage\""));
}

#[test]
fn bad_timestep_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wave_lab(&["energy-conservation", "--dt", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("\"field\": \"dt\""));
}

#[test]
fn failing_assertions_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = wave_lab(
        &["energy-conservation", "--N", "128", "--drift_tol", "1e-30"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["passed"], false);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["prop-1-3-bound", "--ensemble", "3", "--seed", "7", "--N", "128"];
    let a = wave_lab(&args, &dir.path().join("a"));
    let b = wave_lab(&args, &dir.path().join("b"));
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(b.status.code(), Some(0));
    for f in ["ledger.csv", "report.json"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let manifest = |d: &str| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(d).join("manifest.json")).unwrap()).unwrap()
    };
    assert_eq!(manifest("a")["content_hash"], manifest("b")["content_hash"]);
}

#[test]
fn jobs_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["prop-1-3-bound", "--ensemble", "4", "--N", "128"];
    let mut with_jobs: Vec<&str> = args.to_vec();
    with_jobs.extend(["--jobs", "3"]);
    wave_lab(&args, &dir.path().join("a"));
    wave_lab(&with_jobs, &dir.path().join("b"));
    let x = std::fs::read(dir.path().join("a/report.json")).unwrap();
    let y = std::fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn build_ladder_usage_and_extension() {
    let dir = tempfile::tempdir().unwrap();
    let o = wave_lab(&["build-ladder", "--rungs", "0"], &dir.path().join("zero"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"kind\": \"usage\""));

    let five = dir.path().join("five");
    assert_eq!(wave_lab(&["build-ladder", "--rungs", "5"], &five).status.code(), Some(0));
    let six = dir.path().join("six");
    assert_eq!(wave_lab(&["build-ladder", "--rungs", "6"], &six).status.code(), Some(0));
    let ext = dir.path().join("ext");
    let base = five.join("ladder.json");
    let o = wave_lab(
        &["build-ladder", "--rungs", "6", "--extend", base.to_str().unwrap()],
        &ext,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(
        std::fs::read(six.join("ladder.json")).unwrap(),
        std::fs::read(ext.join("ladder.json")).unwrap()
    );

    let o = wave_lab(
        &[
            "ladder-validate",
            "--ladder_file",
            six.join("ladder.json").to_str().unwrap(),
        ],
        &dir.path().join("validate"),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn list_names_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = wave_lab(&["list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 10);
}
