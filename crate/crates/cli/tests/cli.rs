//! End-to-end tests of the `deepbrain` binary: every subcommand, exit codes,
//! and file-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deepbrain"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen(dir: &Path, name: &str, classes_per: usize, noisy: bool, seed: u64) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec![
        "gen".to_string(),
        "--classes-per".to_string(),
        classes_per.to_string(),
        "--seed".to_string(),
        seed.to_string(),
        "--out".to_string(),
        out.display().to_string(),
    ];
    if noisy {
        args.push("--noisy".to_string());
    }
    let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run_ok(&args);
    out
}

fn train_tiny(dir: &Path, data: &Path, model: &str, name: &str) -> PathBuf {
    let ckpt = dir.join(name);
    run_ok(&[
        "train",
        "--data",
        &data.display().to_string(),
        "--model",
        model,
        "--epochs",
        "2",
        "--batch",
        "32",
        "--lr",
        "0.003",
        "--seed",
        "5",
        "--out",
        &ckpt.display().to_string(),
    ]);
    ckpt
}

#[test]
fn gen_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.jsonl", 5, false, 3);
    let b = gen(dir.path(), "b.jsonl", 5, false, 3);
    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same flags must give byte-identical data");
    assert_eq!(bytes_a.iter().filter(|&&c| c == b'\n').count(), 20);
    assert!(a.with_file_name("a.jsonl.manifest.json").exists());

    let c = gen(dir.path(), "c.jsonl", 5, false, 4);
    assert_ne!(bytes_a, fs::read(&c).unwrap());
}

#[test]
fn gen_800_lines_at_paper_scale() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "full.jsonl", 200, false, 1);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 800);
}

#[test]
fn gen_without_out_is_a_usage_error() {
    let out = bin().args(["gen", "--classes-per", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 3, false, 1);
    let out = bin()
        .args([
            "train",
            "--data",
            &data.display().to_string(),
            "--model",
            "transformer",
            "--out",
            &dir.path().join("x.json").display().to_string(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_model_kind_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 4, false, 1);
    for model in ["mlp", "lstm", "stacked", "deepbrain"] {
        train_tiny(dir.path(), &data, model, &format!("{}.json", model));
    }
}

#[test]
fn train_writes_a_reloadable_checkpoint_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 4, false, 1);
    let ckpt = train_tiny(dir.path(), &data, "deepbrain", "ckpt.json");
    assert!(ckpt.exists());
    assert!(dir.path().join("ckpt.json.history.csv").exists());
    assert!(dir.path().join("ckpt.json.manifest.json").exists());
    let history = fs::read_to_string(dir.path().join("ckpt.json.history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_loss,valid_accuracy\n"));
    assert_eq!(history.lines().count(), 3); // header + 2 epochs

    // reloads: eval runs against the same data
    let out_dir = dir.path().join("eval");
    run_ok(&[
        "eval",
        "--checkpoint",
        &ckpt.display().to_string(),
        "--data",
        &data.display().to_string(),
        "--out-dir",
        &out_dir.display().to_string(),
    ]);
    assert!(out_dir.join("metrics.json").exists());
    assert!(out_dir.join("metrics.csv").exists());
    assert!(out_dir.join("roc.svg").exists());
    let roc = fs::read_to_string(out_dir.join("roc_relaxed.csv")).unwrap();
    assert!(roc.starts_with("threshold,fpr,tpr\n"));
}

#[test]
fn training_is_deterministic_at_the_file_level() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 4, false, 1);
    let a = train_tiny(dir.path(), &data, "stacked", "a.json");
    let b = train_tiny(dir.path(), &data, "stacked", "b.json");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn eval_metrics_match_training_history_on_the_training_set() {
    // evaluating a checkpoint against its own training data must agree with
    // the history's final validation column when the split is the same; here
    // we check the weaker but exact contract that eval is deterministic
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 4, false, 1);
    let ckpt = train_tiny(dir.path(), &data, "mlp", "m.json");
    for name in ["e1", "e2"] {
        run_ok(&[
            "eval",
            "--checkpoint",
            &ckpt.display().to_string(),
            "--data",
            &data.display().to_string(),
            "--out-dir",
            &dir.path().join(name).display().to_string(),
        ]);
    }
    assert_eq!(
        fs::read(dir.path().join("e1/metrics.json")).unwrap(),
        fs::read(dir.path().join("e2/metrics.json")).unwrap()
    );
}

#[test]
fn missing_checkpoint_is_a_data_error() {
    let out = bin()
        .args(["eval", "--checkpoint", "/nonexistent.json", "--data", "/nonexistent.jsonl", "--out-dir", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infer_pipes_one_window_to_one_log_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 4, false, 1);
    let ckpt = train_tiny(dir.path(), &data, "mlp", "m.json");
    let samples: String = (0..180).map(|i| format!("{}\n", 50 + (i % 7))).collect();
    let mut child = bin()
        .args([
            "infer",
            "--checkpoint",
            &ckpt.display().to_string(),
            "--map",
            "relaxed=halt",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.as_mut().unwrap().write_all(samples.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1, "stdout: {:?}", stdout);
    assert!(lines[0].starts_with(r#"{"i":180,"class":""#));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("windows processed: 1"), "stderr: {}", stderr);
    // the override only shows when the smoothed class is relaxed; the wire
    // format always carries a command on the first inference
    let record: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert!(record.get("command").is_some());
    if record["class"] == "relaxed" {
        assert_eq!(record["command"], "halt");
    }
}

#[test]
fn infer_with_bad_checkpoint_path_fails() {
    let out = bin()
        .args(["infer", "--checkpoint", "/no/such/ckpt.json"])
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn similarity_emits_the_table_schema() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", 6, false, 1);
    let out_csv = dir.path().join("sim.csv");
    run_ok(&[
        "similarity",
        "--data",
        &data.display().to_string(),
        "--pairs",
        "10",
        "--seed",
        "2",
        "--out",
        &out_csv.display().to_string(),
    ]);
    let text = fs::read_to_string(&out_csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "class,relaxed,relaxed_to_focused,focused_to_relaxed,focused,self,cross"
    );
    assert_eq!(lines.count(), 4);

    // deterministic under the same seed
    let out2 = dir.path().join("sim2.csv");
    run_ok(&[
        "similarity",
        "--data",
        &data.display().to_string(),
        "--pairs",
        "10",
        "--seed",
        "2",
        "--out",
        &out2.display().to_string(),
    ]);
    assert_eq!(text, fs::read_to_string(&out2).unwrap());
}

#[test]
fn compare_emits_both_tables_with_exact_columns() {
    let dir = tempfile::tempdir().unwrap();
    let quiet = gen(dir.path(), "q.jsonl", 6, false, 1);
    let noisy = gen(dir.path(), "n.jsonl", 6, true, 2);
    let out_dir = dir.path().join("cmp");
    run_ok(&[
        "compare",
        "--quiet",
        &quiet.display().to_string(),
        "--noisy",
        &noisy.display().to_string(),
        "--models",
        "mlp,lstm",
        "--seeds",
        "1,2",
        "--epochs",
        "1",
        "--out-dir",
        &out_dir.display().to_string(),
    ]);
    for name in ["compare_quiet.csv", "compare_noisy.csv"] {
        let text = fs::read_to_string(out_dir.join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "method,accuracy,precision,recall,f1,auc");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].starts_with("MLP,"));
        assert!(rows[1].starts_with("LSTM,"));
    }
    assert!(out_dir.join("compare.json").exists());
    assert!(out_dir.join("compare.json.manifest.json").exists());
}

#[test]
fn gradcheck_reports_all_kinds_and_passes() {
    let out = run_ok(&["gradcheck"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    for kind in ["deepbrain", "stacked", "lstm", "mlp"] {
        assert!(stdout.contains(&format!("{}:", kind)), "missing {} in {}", kind, stdout);
    }
    assert_eq!(stdout.matches("PASS").count(), 4, "stdout: {}", stdout);
    assert!(stdout.contains("worst:"));
}

#[test]
fn gradcheck_single_model_flag() {
    let out = run_ok(&["gradcheck", "--model", "mlp"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("mlp:"));
}
