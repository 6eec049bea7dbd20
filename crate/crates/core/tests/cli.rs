//! End-to-end runs of the `atc-stack` binary.

use std::path::Path;
use std::process::{Command, Output};

fn atc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atc-stack"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ATC_STACK_OUTPUT_DIR")
        .env_remove("ATC_STACK_WORKERS")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Trains for zero steps, which writes the freshly initialized policy.
fn untrained(dir: &Path, kind: &str, name: &str) -> String {
    let out = dir.join(name);
    let stdout = ok(&atc(&["train", "--kind", kind, "--steps", "0", "--output-dir", out.to_str().unwrap()], dir));
    assert_eq!(stdout.trim(), out.join("checkpoint.json").to_str().unwrap());
    assert!(out.join("train_config.json").exists());
    stdout.trim().to_string()
}

#[test]
fn zero_step_training_then_repeatable_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let ck = untrained(tmp.path(), "lateral_nav", "run");
    let eval = |name: &str| {
        let out = tmp.path().join(name);
        let args = ["eval", "--checkpoint", &ck, "--episodes", "4", "--mode", "both", "--trace", "--render", "--output-dir", out.to_str().unwrap()];
        let stdout = ok(&atc(&args, tmp.path()));
        assert!(stdout.contains("unstacked") && stdout.contains("stacked"));
        out
    };
    let (a, b) = (eval("e1"), eval("e2"));
    for f in ["unstacked_stats.json", "stacked_stats.json", "unstacked_episodes.csv", "traces/stacked_seed3.csv", "traces/stacked_seed3_macros.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty(), "{f}");
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs between reruns");
    }
    let svg = std::fs::read_to_string(a.join("renders/unstacked_seed0.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn missing_sector_fails_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let r = atc(&["train", "--kind", "lateral_nav", "--sector", "no_such_sector.toml", "--steps", "0", "--output-dir", out.to_str().unwrap()], tmp.path());
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("no_such_sector.toml"));
    assert!(!out.exists());
}

#[test]
fn eval_rejects_a_checkpoint_of_another_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let ck = untrained(tmp.path(), "vertical", "v");
    let r = atc(&["eval", "--checkpoint", &ck, "--kind", "lateral_nav", "--episodes", "1"], tmp.path());
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("vertical") && err.contains("lateral_nav"), "{err}");
}

#[test]
fn compare_pairs_two_checkpoints_on_shared_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let a = untrained(tmp.path(), "lateral_nav", "a");
    let out = tmp.path().join("cmp");
    let args = ["compare", "--a", &a, "--b", &a, "--mode-b", "stacked", "--episodes", "3", "--output-dir", out.to_str().unwrap()];
    ok(&atc(&args, tmp.path()));
    let pairs = std::fs::read_to_string(out.join("pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 4);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(report["pairs"].as_array().unwrap().len(), 3);

    let v = untrained(tmp.path(), "vertical", "v");
    let r = atc(&["compare", "--a", &a, "--b", &v, "--episodes", "1", "--output-dir", out.to_str().unwrap()], tmp.path());
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn config_file_supplies_unset_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from_file");
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, format!("[train]\nkind = \"vertical\"\nsteps = 0\noutput_dir = {:?}\n", out.to_str().unwrap())).unwrap();
    ok(&atc(&["train", "--config", cfg.to_str().unwrap()], tmp.path()));
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("train_config.json")).unwrap()).unwrap();
    assert_eq!(written["kind"], "vertical");

    std::fs::write(&cfg, "[train]\nstepz = 3\n").unwrap();
    let r = atc(&["train", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("stepz"));
}

#[test]
fn malformed_arguments_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(atc(&["train", "--steps", "many"], tmp.path()).status.code(), Some(2));
    assert_eq!(atc(&["launch"], tmp.path()).status.code(), Some(2));
}

#[test]
fn bundled_run_configs_parse_and_start() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["undamped", "damped", "large_space", "vertical", "avoidance"] {
        let cfg = configs.join(format!("{name}.toml"));
        let out = tmp.path().join(name);
        ok(&atc(&["train", "--config", cfg.to_str().unwrap(), "--steps", "0", "--output-dir", out.to_str().unwrap()], tmp.path()));
        let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("train_config.json")).unwrap()).unwrap();
        assert_eq!(written["eval_interval"], 20, "{name}");
    }
}
