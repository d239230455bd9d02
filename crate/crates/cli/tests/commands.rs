//! The `grounded` binary: exit codes, diagnostics and file handling.

use std::path::Path;
use std::process::{Command, Output};

fn grounded(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grounded")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = grounded(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = grounded(dir, args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(!err.trim().is_empty());
    err
}

#[test]
fn small_session() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = ok(d, &["gen", "--scenes", "30", "--thesaurus", "thesaurus.txt"]);
    assert!(gen.starts_with("file,sentences,scenes\ndsup.json,"));
    let boot = ok(d, &["--model", "boot.json", "bootstrap"]);
    assert!(boot.contains("parse_accuracy,"));
    let train = ok(
        d,
        &[
            "--model",
            "boot.json",
            "train",
            "--epochs",
            "1",
            "--test",
            "test.json",
            "--save",
            "joint.json",
            "--out",
            "train.csv",
        ],
    );
    assert_eq!(std::fs::read_to_string(d.join("train.csv")).unwrap(), train);
    let eval = ok(d, &["--model", "joint.json", "eval"]);
    let last = eval.lines().last().unwrap();
    assert!(last.starts_with("all,"), "{last}");
    let inspect = ok(d, &["--model", "joint.json", "inspect", "--words", "thing,zorp"]);
    assert!(inspect.starts_with("word,NEW0,NEW1,NEW2,NEW3,NEW4,NEW5,null,argmax\n"));
    assert!(inspect.contains("zorp,0.00,0.00,0.00,0.00,0.00,0.00,0.00,?"));
    assert!(ok(d, &["ablate-vision", "--thesaurus", "thesaurus.txt"]).contains("\nvision,"));
    assert!(ok(d, &["--model", "boot.json", "ablate-language"]).contains("\nlanguage,"));
}

#[test]
fn zero_epochs_leave_the_model_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--scenes", "20"]);
    ok(d, &["--model", "boot.json", "bootstrap"]);
    ok(d, &["--model", "boot.json", "train", "--epochs", "0", "--save", "same.json"]);
    assert_eq!(ok(d, &["--model", "boot.json", "eval"]), ok(d, &["--model", "same.json", "eval"]));
}

#[test]
fn several_runs_write_suffixed_models() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--scenes", "20"]);
    ok(d, &["--model", "boot.json", "bootstrap"]);
    let out = ok(d, &["--model", "boot.json", "train", "--epochs", "1", "--runs", "2", "--save", "m.json"]);
    assert!(out.contains("\nmean,"));
    assert!(d.join("m-run0.json").exists() && d.join("m-run1.json").exists());
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let err = fails(d, &["eval"]);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("--model"));
    let err = fails(d, &["--model", "missing.json", "eval"]);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    fails(d, &["gen", "--noise", "-1"]);
    fails(d, &["synonym", "--scenes", "10", "--new-classifiers", "3"]);
    fails(d, &["ablate-vision", "--thesaurus", "none.txt"]);
    fails(d, &["no-such-command"]);
}

#[test]
fn newer_model_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--scenes", "20"]);
    ok(d, &["--model", "boot.json", "bootstrap"]);
    let text = std::fs::read_to_string(d.join("boot.json")).unwrap();
    std::fs::write(d.join("future.json"), text.replacen("\"version\": 1", "\"version\": 2", 1)).unwrap();
    let err = fails(d, &["--model", "future.json", "eval"]);
    assert!(err.contains("version 2"), "{err}");
}
