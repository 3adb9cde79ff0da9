use std::path::Path;
use std::process::{Command, Output};

fn indilab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indilab"))
        .args(args)
        .env("INDILAB_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(&["run", "fig2_nominal"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"), "{}", stdout(&o));
    for f in ["log.csv", "log.json", "companion_log.csv", "metrics.json", "scenario.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert!(csv.starts_with("# indilab-log 1\n"));
    assert!(csv.contains("# seed: 42\n"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["seed"], 42);
    assert_eq!(metrics["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn written_scenario_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(indilab(&["run", "ndi_baseline", "--out", a.to_str().unwrap()], dir.path()).status.success());
    let scenario = a.join("scenario.json");
    assert!(indilab(&["run", scenario.to_str().unwrap(), "--out", b.to_str().unwrap()], dir.path()).status.success());
    assert_eq!(std::fs::read(a.join("log.csv")).unwrap(), std::fs::read(b.join("log.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "fig2_nominal", "--set", "duration=0"][..],
        &["run", "fig2_nominal", "--set", "controller.kp=[3]"],
        &["run", "fig2_nominal", "--set", "controller=NOPE"],
        &["run", "no_such_preset"],
        &["gainmap", "--kp", "0", "--gbar", "-119"],
    ] {
        let o = indilab(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = indilab(&["run", "fig2_nominal", "--set", "controller.kp=[3]"], dir.path());
    assert!(stderr(&o).contains("kp"), "{}", stderr(&o));
}

#[test]
fn runtime_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(&["run", "tde_sweep", "--set", "controller.gbar=[1]"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn controller_override_switches_the_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(&["run", "tde_sweep", "--set", "controller=NDI"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("NDI:"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert!(csv.contains("# controller: NDI\n"));
}

#[test]
fn gainmap_prints_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(&["gainmap", "--kp", "50", "--gbar", "-119.07", "--ts", "0.01"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("T_I  = [0.02]"), "{text}");
    assert!(text.contains(&format!("K    = [{:?}]", 100.0 / -119.07)), "{text}");

    let o = indilab(&["gainmap", "--kp", "50", "--kd", "20", "--gbar", "-119.07", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["t_d"][0], 0.05);
}

#[test]
fn presets_are_listed_and_shown() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&indilab(&["presets"], dir.path()));
    for name in ["fig2_nominal", "fig2_actuator_lag", "ndi_baseline", "mismatch_study", "tde_sweep"] {
        assert!(text.contains(name), "{name}");
    }
    let o = indilab(&["presets", "--show", "ndi_baseline"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["controller"]["kind"], "NDI");
}

#[test]
fn compare_reports_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(
        &["compare", "fig2_nominal", "fig2_nominal", "--set-a", "controller=INDI_GBAR", "--set-b", "controller=PI_INCR"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"), "{}", stdout(&o));

    let o = indilab(&["compare", "ndi_baseline", "ndi_baseline", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command_deviation"], 0.0);
    assert_eq!(v["state_deviation"], 0.0);
}

#[test]
fn compare_rejects_different_setups() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(&["compare", "fig2_nominal", "ndi_baseline"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn tde_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = indilab(&["sweep", "tde", "tde_sweep", "--periods", "0.01,0.005"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("tde_sweep.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("# config_hash:")));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}
