//! Stage orchestration on a copy of the mini corpus.

use std::fs;
use std::path::{Path, PathBuf};

use apisync_core::pipeline::{Pipeline, PipelineError, Stage};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini")
}

fn copy_tree(from: &Path, to: &Path) {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(from).unwrap();
        if rel.starts_with("out") || rel.starts_with("golden") {
            continue;
        }
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).unwrap();
        } else {
            fs::copy(entry.path(), &dest).unwrap();
        }
    }
}

fn workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&fixture(), dir.path());
    let cfg = dir.path().join("config.json");
    (dir, cfg)
}

#[test]
fn second_run_skips_every_stage() {
    let (_dir, cfg) = workspace();
    let p = Pipeline::load(&cfg, None).unwrap();
    let first = p.run_all().unwrap();
    assert!(first.iter().all(|o| !o.skipped));
    let second = p.run_all().unwrap();
    assert!(second.iter().all(|o| o.skipped));
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.manifest, b.manifest);
    }
    let build = &first[6].manifest.counts;
    assert_eq!((build["cct"], build["ect"], build["mcq"]), (15, 15, 15));
    assert_eq!(build["train_pairs"], 30);
}

#[test]
fn missing_prerequisite_is_reported() {
    let (_dir, cfg) = workspace();
    let p = Pipeline::load(&cfg, None).unwrap();
    let err = p.run_stage(Stage::Locate).unwrap_err();
    assert!(matches!(err, PipelineError::MissingPrerequisite { stage: Stage::Locate, missing: Stage::Extract }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn changes_invalidate_downstream_stages_only() {
    let (dir, cfg) = workspace();
    Pipeline::load(&cfg, None).unwrap().run_all().unwrap();

    // a different seed leaves extraction through locating untouched
    let reseeded = Pipeline::load(&cfg, Some(8)).unwrap();
    let outcomes = reseeded.run_all().unwrap();
    let skipped: Vec<bool> = outcomes.iter().map(|o| o.skipped).collect();
    assert_eq!(skipped, vec![true, true, true, true, true, false, false, false]);

    // tampering with an output reruns that stage
    let p = Pipeline::load(&cfg, Some(8)).unwrap();
    fs::write(dir.path().join("out/diff/summary.json"), "{}").unwrap();
    assert!(!p.run_stage(Stage::Diff).unwrap().skipped);
    assert!(p.run_stage(Stage::Plan).unwrap().skipped);

    // an edited corpus reruns planning
    fs::write(dir.path().join("corpus/extra.py"), "import minilib\n\ndef f():\n    minilib.io.load('x')\n").unwrap();
    assert!(!p.run_stage(Stage::Plan).unwrap().skipped);
}

#[test]
fn config_errors_map_to_exit_code_two() {
    let (dir, cfg) = workspace();
    let text = fs::read_to_string(&cfg).unwrap().replace("\"seed\": 7", "\"seed\": 7, \"unknown\": 1");
    fs::write(&cfg, text).unwrap();
    let err = Pipeline::load(&cfg, None).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let missing = dir.path().join("nope.json");
    assert_eq!(Pipeline::load(&missing, None).unwrap_err().exit_code(), 2);
}

#[test]
fn locate_records_skips() {
    let (dir, cfg) = workspace();
    let p = Pipeline::load(&cfg, None).unwrap();
    for s in &Stage::ALL[..5] {
        p.run_stage(*s).unwrap();
    }
    let skips = fs::read_to_string(dir.path().join("out/locate/skips.jsonl")).unwrap();
    assert!(skips.contains("noise_broken.py") && skips.contains("parse error"));
    assert!(skips.contains("noise_module_level.py") && skips.contains("site outside function"));
    let fetched = fs::read_to_string(dir.path().join("out/fetch/manifest.jsonl")).unwrap();
    assert!(fetched.lines().all(|l| l.contains("\"retrieved_at\":null")));
}
