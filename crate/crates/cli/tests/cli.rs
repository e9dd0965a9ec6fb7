use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_metspec"));
    cmd.env_remove("METSPEC_OUT_DIR");
    cmd
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn list_shows_every_experiment_as_valid() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "drift",
        "functional",
        "wolff-denjoy",
        "mean-ergodic",
        "lyapunov",
        "thurston",
        "curve-growth",
        "invariants",
    ] {
        assert!(
            text.contains(&format!("{name} -> ")),
            "{name} missing from\n{text}"
        );
    }
    assert_eq!(text.matches("example config: valid").count(), 8);
}

#[test]
fn drift_example_writes_a_passing_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .arg(example("drift"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}{}",
        stdout(&out),
        stderr(&out)
    );
    assert!(stdout(&out).starts_with("drift: PASS"));

    let r = report(tmp.path());
    assert_eq!(r["schema"], 1);
    assert_eq!(r["experiment"], "drift");
    assert_eq!(r["passed"], true);
    let tau = r["estimates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "maps[0] translation: tau_hat")
        .unwrap();
    assert_eq!(tau["value"], 5.0);
    assert_eq!(r["config"]["output"]["dir"], tmp.path().to_str().unwrap());
    assert!(r["config"].get("driver").is_none());

    let csv = std::fs::read_to_string(tmp.path().join("orbit_0.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,a_k,a_k_over_k,b_k,record,h_k"));
    assert_eq!(lines.count(), 101);
    let timing: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("timing.json")).unwrap())
            .unwrap();
    assert!(timing["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    // both runs write to the same relative dir so the config echo matches
    for dir in [a.path(), b.path()] {
        let out = bin()
            .current_dir(dir)
            .arg("run")
            .arg(example("functional"))
            .arg("--out")
            .arg("o")
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["report.json", "orbit_0.csv"] {
        let x = std::fs::read(a.path().join("o").join(name)).unwrap();
        let y = std::fs::read(b.path().join("o").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn overrides_and_env_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .env("METSPEC_OUT_DIR", tmp.path())
        .arg("run")
        .arg(example("drift"))
        .args(["--seed", "11", "--horizon", "20"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let r = report(tmp.path());
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["config"]["horizon"], 20);
    let csv = std::fs::read_to_string(tmp.path().join("orbit_0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);

    let flag = tempfile::tempdir().unwrap();
    let out = bin()
        .env("METSPEC_OUT_DIR", tmp.path())
        .arg("run")
        .arg(example("drift"))
        .arg("--out")
        .arg(flag.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag.path().join("report.json").exists());
}

#[test]
fn config_errors_exit_with_usage_status() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example("drift")).unwrap();

    let cfg = write_config(
        tmp.path(),
        &text.replace("p = 2.0", "p = 2.0\ncurvature = -1.0"),
    );
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("space"), "{}", stderr(&out));
    assert!(stderr(&out).contains("curvature"), "{}", stderr(&out));

    let cfg = write_config(tmp.path(), &text.replace("schema = 1", "schema = 9"));
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());

    let out = bin()
        .arg("run")
        .arg(tmp.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["run", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example("drift")).unwrap();
    let cfg = write_config(tmp.path(), &text.replace("tau = 5.0", "tau = 4.0"));
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
    assert!(stdout(&out).contains("expect.tau"));
    assert_eq!(report(&tmp.path().join("o"))["passed"], false);
}
