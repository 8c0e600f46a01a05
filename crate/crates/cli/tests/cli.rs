use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn loadsim(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_loadsim")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "loadsim {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn single_run_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = loadsim(&[
        "run",
        "--alpha",
        "0.8,0.6,0.1,0.1,1,1,-20,45",
        "--log-series",
        "--out",
        path(dir.path()),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("flag     completed"), "{text}");
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 2);
}

#[test]
fn sweep_resume_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("campaign");
    let common = ["--piles", "gravel-30,sand-30", "--actions", "6", "--workers", "2", "--out", path(&store)];

    loadsim(&[&["sweep", "--limit", "5"][..], &common].concat());
    assert!(!store.join("results.csv").exists());
    loadsim(&[&["sweep", "--resume"][..], &common].concat());
    let results = fs::read_to_string(store.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 13);

    let analysis = dir.path().join("analysis");
    loadsim(&[
        "analyze",
        "--results",
        path(&store),
        "--pile",
        "gravel-30",
        "--hist",
        "mass,time",
        "--scatter",
        "--out",
        path(&analysis),
    ]);
    for name in ["trends.txt", "gravel-30_pareto.csv", "gravel-30_scatter.svg", "gravel-30_hist_m_load_kg_t_load_s.svg"] {
        assert!(analysis.join(name).exists(), "missing {name}");
    }

    let out = loadsim(&["poi", "--results", path(&store), "--pile", "sand-30"]);
    assert!(!out.stdout.is_empty());
}

#[test]
fn rejects_bad_action() {
    let out = Command::new(env!("CARGO_BIN_EXE_loadsim"))
        .args(["run", "--alpha", "0.8,0.6,0.1,0.1,1,1,-20"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
