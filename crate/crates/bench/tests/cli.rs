use std::path::Path;
use std::process::{Command, Output};

use fjsp_core::io::load_instance;
use fjsp_core::schedule::load_schedule;
use fjsp_core::validate;

fn fjsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fjsp")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_solve_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    std::fs::write(
        &cfg,
        r#"{"num_machines": 2, "n_ini": 2, "n_add": 1, "ops_per_job": {"min": 1, "max": 2},
            "proc_time": {"min": 1.0, "max": 9.0}, "compat_count": {"min": 1, "max": 2}, "lambda": 0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("inst");
    let o = fjsp(&["generate", "--kind", "homo", "--config", s(&cfg), "--seed", "4", "--count", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let inst_path = out.join("instance_001.json");
    let inst = load_instance(&inst_path).unwrap();
    assert_eq!(inst.num_machines, 2);

    let sched = dir.path().join("sched.json");
    let lp = dir.path().join("model.lp");
    let o = fjsp(&["solve", "--instance", s(&inst_path), "--export-lp", s(&lp), "--out", s(&sched)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Optimal"));
    assert!(std::fs::read_to_string(&lp).unwrap().contains("Subject To"));
    let file = load_schedule(&sched).unwrap();
    assert!(validate(&inst, &file.schedule(), true).ok);

    let svg = dir.path().join("g.svg");
    let o = fjsp(&["gantt", "--instance", s(&inst_path), "--schedule", s(&sched), "--out", s(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("makespan"));
}

#[test]
fn train_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("policy.json");
    let curve = dir.path().join("curve.csv");
    let o = fjsp(&["train", "--steps", "512", "--seed", "2", "--checkpoint", s(&ckpt), "--curve", s(&curve)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&curve).unwrap().lines().count(), 3);

    let runs = dir.path().join("runs.csv");
    let summary = dir.path().join("summary.csv");
    let args = [
        "evaluate", "--methods", "drl,besthh,rule1", "--checkpoint", s(&ckpt), "--lambda", "0.2,0.05", "--runs", "2",
        "--seed", "9", "--out", s(&runs), "--summary", s(&summary),
    ];
    let o = fjsp(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&runs).unwrap().lines().count(), 1 + 3 * 2 * 2);
    assert_eq!(std::fs::read_to_string(&summary).unwrap().lines().count(), 1 + 3 * 2);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("DRL") && table.contains("lambda=0.05"));

    let first = std::fs::read(&runs).unwrap();
    assert!(fjsp(&args).status.success());
    assert_eq!(first, std::fs::read(&runs).unwrap());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = fjsp(&["evaluate", "--methods", "rule7", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = fjsp(&["evaluate", "--methods", "drl", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = fjsp(&["evaluate", "--methods", "rule1", "--runs", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = fjsp(&["solve", "--instance", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = fjsp(&["generate", "--lambda", "-1", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mismatched_checkpoint_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hetero4.json");
    let hetero = fjsp_core::HeteroGenConfig { num_machines: 4, ..Default::default() };
    std::fs::write(&cfg, serde_json::to_string(&hetero).unwrap()).unwrap();
    let ckpt = dir.path().join("p.json");
    let o = fjsp(&["train", "--kind", "hetero", "--config", s(&cfg), "--steps", "256", "--checkpoint", s(&ckpt)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("r.csv");
    let o = fjsp(&["evaluate", "--methods", "drl", "--checkpoint", s(&ckpt), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}
