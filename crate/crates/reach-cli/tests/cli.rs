//! End-to-end tests of the `reach` binary: exit codes, report shapes, and
//! byte-level reproducibility of seeded runs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reach"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("reach-cli-test-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn generate_is_deterministic() {
    let a = run(&[
        "generate",
        "random-gnp",
        "--nodes",
        "12",
        "--prob",
        "0.3",
        "--directed",
        "--seed",
        "9",
    ]);
    let b = run(&[
        "generate",
        "random-gnp",
        "--nodes",
        "12",
        "--prob",
        "0.3",
        "--directed",
        "--seed",
        "9",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("n 12 directed\n"));
}

#[test]
fn replay_reports_are_reproducible() {
    let dir = workdir("replay-repro");
    let g = dir.join("g.txt");
    let s = dir.join("s.txt");
    let gen = run(&[
        "generate",
        "partial-k-tree",
        "--nodes",
        "10",
        "--width",
        "2",
        "--keep",
        "0.6",
        "--seed",
        "5",
        "--out",
        g.to_str().unwrap(),
        "--script-steps",
        "4",
        "--script-batch",
        "3",
        "--script-deletes",
        "--script-seed",
        "9",
        "--script-out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));

    let args = [
        "replay",
        "--graph",
        g.to_str().unwrap(),
        "--script",
        s.to_str().unwrap(),
        "--engine",
        "undirected",
        "--oracle-check",
        "--budget-c",
        "2",
        "--no-timing",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("agree=true"));
    assert!(text.contains("budget=within"));
    assert!(text.ends_with("summary steps=4 pass=true\n"));
}

#[test]
fn algebraic_replay_agrees_with_oracle() {
    let dir = workdir("algebraic-replay");
    let g = dir.join("g.txt");
    let s = dir.join("s.txt");
    let gen = run(&[
        "generate",
        "random-gnp",
        "--nodes",
        "8",
        "--prob",
        "0.25",
        "--directed",
        "--seed",
        "12",
        "--out",
        g.to_str().unwrap(),
        "--script-steps",
        "3",
        "--script-batch",
        "2",
        "--script-deletes",
        "--script-seed",
        "13",
        "--script-out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));
    let out = run(&[
        "replay",
        "--graph",
        g.to_str().unwrap(),
        "--script",
        s.to_str().unwrap(),
        "--engine",
        "algebraic",
        "--oracle-check",
        "--seed",
        "7",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).ends_with("summary steps=3 pass=true\n"));
}

#[test]
fn budget_annotations_follow_the_log_square_rule() {
    let dir = workdir("budget");
    let g = dir.join("g.txt");
    let s = dir.join("s.txt");
    fs::write(&g, "n 16 directed\n").unwrap();
    // Step one inserts exactly 16 edges, step two exactly 17; with c = 2 the
    // budget on 16 nodes is (log2 16)^2 = 16.
    let mut script = String::from("change\n");
    for v in 1..16 {
        script.push_str(&format!("+ 0 {v}\n"));
    }
    script.push_str("+ 1 2\nend\nchange\n");
    for v in 3..16 {
        script.push_str(&format!("+ 2 {v}\n"));
    }
    for v in 4..8 {
        script.push_str(&format!("+ 3 {v}\n"));
    }
    script.push_str("end\n");
    fs::write(&s, script).unwrap();

    let out = run(&[
        "replay",
        "--graph",
        g.to_str().unwrap(),
        "--script",
        s.to_str().unwrap(),
        "--engine",
        "tc-insert",
        "--budget-c",
        "2",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("inserted=16") && lines[0].contains("budget=within"));
    assert!(lines[1].contains("inserted=17") && lines[1].contains("budget=exceeded"));
    assert!(lines[2].starts_with("summary"));
}

#[test]
fn closure_engine_rejects_deletion_scripts() {
    let dir = workdir("tc-deletes");
    let g = dir.join("g.txt");
    let s = dir.join("s.txt");
    fs::write(&g, "n 4 directed\ne 0 1\n").unwrap();
    fs::write(&s, "change\n- 0 1\nend\n").unwrap();
    let out = run(&[
        "replay",
        "--graph",
        g.to_str().unwrap(),
        "--script",
        s.to_str().unwrap(),
        "--engine",
        "tc-insert",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("deletions"));
}

#[test]
fn forest_engine_rejects_directed_graphs() {
    let dir = workdir("forest-directed");
    let g = dir.join("g.txt");
    let s = dir.join("s.txt");
    fs::write(&g, "n 4 directed\ne 0 1\n").unwrap();
    fs::write(&s, "change\nend\n").unwrap();
    let out = run(&[
        "replay",
        "--graph",
        g.to_str().unwrap(),
        "--script",
        s.to_str().unwrap(),
        "--engine",
        "undirected",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("undirected"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = workdir("parse-error");
    let g = dir.join("g.txt");
    let s = dir.join("s.txt");
    fs::write(&g, "n sixteen directed\n").unwrap();
    fs::write(&s, "change\nend\n").unwrap();
    let out = run(&[
        "replay",
        "--graph",
        g.to_str().unwrap(),
        "--script",
        s.to_str().unwrap(),
        "--engine",
        "tc-insert",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parsing"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["replay", "--engine", "warp"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn weight_checks_pass_on_generated_instances() {
    let dir = workdir("weights");
    let g = dir.join("g.txt");
    let d = dir.join("d.txt");
    let gen = run(&[
        "generate",
        "partial-k-tree",
        "--nodes",
        "9",
        "--width",
        "2",
        "--keep",
        "0.7",
        "--seed",
        "3",
        "--out",
        g.to_str().unwrap(),
        "--decomp-out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));

    let pull = run(&[
        "weights",
        "pull-back",
        "--graph",
        g.to_str().unwrap(),
        "--decomp",
        d.to_str().unwrap(),
        "--check",
    ]);
    assert_eq!(pull.status.code(), Some(0), "{}", stderr(&pull));
    assert!(stdout(&pull).lines().last().unwrap().starts_with("check circulation=ok"));

    let shifted = run(&[
        "weights",
        "pull-back",
        "--graph",
        g.to_str().unwrap(),
        "--decomp",
        d.to_str().unwrap(),
        "--shift",
        "--check",
    ]);
    assert_eq!(shifted.status.code(), Some(0), "{}", stderr(&shifted));
    assert!(stdout(&shifted).lines().last().unwrap().starts_with("check isolation=ok"));

    let random = run(&[
        "weights",
        "random",
        "--graph",
        g.to_str().unwrap(),
        "--seed",
        "4",
        "--cap",
        "64",
        "--check",
    ]);
    assert_eq!(random.status.code(), Some(0), "{}", stderr(&random));
    assert!(stdout(&random).lines().last().unwrap().starts_with("check isolation=ok"));
}
