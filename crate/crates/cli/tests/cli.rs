use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mini() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini")
}

/// Copies the mini fixture (minus any previous output) into a temp dir.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&mini(), dir.path());
    dir
}

fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name();
        if name == "out" || name == "golden" {
            continue;
        }
        let target = to.join(&name);
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn apisync(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apisync"))
        .args(args)
        .arg("--config")
        .arg(dir.join("config.json"))
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn missing_prerequisite_exits_3() {
    let dir = workspace();
    let out = apisync(dir.path(), &["diff"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extract"));
}

#[test]
fn unknown_stage_and_bad_config_exit_2() {
    let dir = workspace();
    assert_eq!(apisync(dir.path(), &["polish"]).status.code(), Some(2));

    let cfg = dir.path().join("config.json");
    let text = fs::read_to_string(&cfg).unwrap().replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
    fs::write(&cfg, text).unwrap();
    assert_eq!(apisync(dir.path(), &["extract"]).status.code(), Some(2));
}

#[test]
fn held_lock_blocks_until_resume() {
    let dir = workspace();
    let root = dir.path().join("out");
    fs::create_dir_all(&root).unwrap();
    fs::write(root.join(".lock"), "12345\n").unwrap();

    let blocked = apisync(dir.path(), &["extract"]);
    assert_eq!(blocked.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&blocked.stderr).contains("lock"));

    let resumed = apisync(dir.path(), &["extract", "--resume"]);
    assert!(resumed.status.success(), "{}", String::from_utf8_lossy(&resumed.stderr));
    assert!(!root.join(".lock").exists(), "lock released after the run");
}

#[test]
fn rerun_reports_up_to_date() {
    let dir = workspace();
    let first = apisync(dir.path(), &["extract"]);
    assert!(String::from_utf8_lossy(&first.stdout).starts_with("extract: done"));
    let second = apisync(dir.path(), &["extract"]);
    assert!(String::from_utf8_lossy(&second.stdout).starts_with("extract: up to date"));
}
