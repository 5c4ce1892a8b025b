use std::path::Path;
use std::process::{Command, Output};

use hybridrx::dsp::Modulation;
use hybridrx::pipeline::DatasetSpec;
use serde_json::{json, Value};

fn hybridrx(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridrx"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hybridrx(&[], dir.path()).status.code(), Some(1));
    assert_eq!(hybridrx(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(hybridrx(&["evm", "--profile", "huge"], dir.path()).status.code(), Some(1));
    assert_eq!(hybridrx(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_json(dir.path(), "bad.json", &json!({"backoffs_db": [3.0], "colour": 1}));
    let out = hybridrx(&["evm", "--config", &bad], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let sweep = write_json(
        dir.path(),
        "sweep.json",
        &serde_json::to_value(hybridrx::eval::SweepSpec::new(
            vec![hybridrx::eval::ReceiverName::Hybrid],
            Modulation::Qam16,
        ))
        .unwrap(),
    );
    let out = hybridrx(&["ber-sweep", "--config", &sweep], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hybrid"));
}

#[test]
fn link_budget_writes_stamped_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = hybridrx(&["link-budget"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("link_budget.json")).unwrap()).unwrap();
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);
    let rows = v["report"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["max_path_loss_db"].as_f64().unwrap().round(), 125.0);
    assert_eq!(rows[1]["max_path_loss_db"].as_f64().unwrap().round(), 128.0);
}

#[test]
fn evm_csv_has_header_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hybridrx(&["evm"], dir.path()).status.success());
    let csv = std::fs::read_to_string(dir.path().join("evm.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config_sha256="));
    assert_eq!(lines[1], "backoff_db,evm_percent");
    assert_eq!(lines.len(), 2 + 5);
}

#[test]
fn train_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut train = DatasetSpec::mini_train(Modulation::Qam16, 3.0, 5);
    train.num_ttis = 6;
    let mut val = DatasetSpec::mini_val(Modulation::Qam16, 3.0, 6);
    val.num_ttis = 3;
    let job = json!({
        "receiver": "deeprx",
        "train": train,
        "val": val,
        "hyper": {"lr": 1e-3, "batch_size": 3, "epochs": 1, "seed": 0, "grad_clip": 10.0},
    });
    let cfg = write_json(dir.path(), "train.json", &job);
    let out = hybridrx(&["train", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2 + 4);
    assert!(dir.path().join("timing.csv").exists());

    let ckpt = dir.path().join("model.ckpt");
    let eval = json!({
        "receivers": ["lmmse_known", "deeprx"],
        "dataset": DatasetSpec::evaluation(Modulation::Qam16, 3.0, 14.0, 2, 9),
        "checkpoints": {"deeprx": ckpt},
    });
    let cfg = write_json(dir.path(), "eval.json", &eval);
    let out = hybridrx(&["eval", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("lmmse_known,14,"));
    assert!(rows[1].starts_with("deeprx,14,"));
}

#[test]
fn datagen_manifest_matches_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = DatasetSpec::mini_train(Modulation::Qam16, 3.0, 0);
    spec.num_ttis = 4;
    let cfg = write_json(dir.path(), "d.json", &serde_json::to_value(&spec).unwrap());
    let run = |seed: &str| {
        let out = hybridrx(&["datagen", "--config", &cfg, "--seed", seed], dir.path());
        assert!(out.status.success());
        let m: Value = serde_json::from_slice(&out.stdout).unwrap();
        m["content_hash"].as_str().unwrap().to_owned()
    };
    let a = run("3");
    assert_eq!(a, run("3"));
    assert_ne!(a, run("4"));
}

fn repo_config(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn shipped_configs_parse() {
    use hybridrx::eval::{LinkBudgetParams, SweepSpec};
    for name in ["ber_sweep_qam16.json", "backoff_sweep_qam64.json"] {
        let spec: SweepSpec = serde_json::from_str(&std::fs::read_to_string(repo_config(name)).unwrap()).unwrap();
        spec.validate().unwrap();
    }
    let budget: LinkBudgetParams =
        serde_json::from_str(&std::fs::read_to_string(repo_config("link_budget.json")).unwrap()).unwrap();
    assert_eq!(budget, LinkBudgetParams::table2());

    let dir = tempfile::tempdir().unwrap();
    for (cmd, cfg) in [("link-budget", "link_budget.json"), ("evm", "evm.json")] {
        let path = repo_config(cfg);
        let out = hybridrx(&[cmd, "--config", path.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // Train and eval configs are checked for schema only: an unknown field
    // makes the binary fail before any work starts.
    for (cmd, cfg) in [("train", "train_hybrid_qam16.json"), ("eval", "eval_qam16.json")] {
        let text = std::fs::read_to_string(repo_config(cfg)).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v["bogus_field"] = json!(1);
        let path = write_json(dir.path(), cfg, &v);
        let out = hybridrx(&[cmd, "--config", &path], dir.path());
        assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_field"), "{cmd}");
    }
}
