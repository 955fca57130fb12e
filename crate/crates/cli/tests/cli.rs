use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_enumkern"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn enumkern")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("enumkern-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn lines(s: &str) -> BTreeSet<String> {
    s.lines().map(str::to_string).collect()
}

fn gen(dir: &Path, args: &[&str]) -> String {
    let path = dir.join("g.txt");
    let p = path.to_str().unwrap().to_string();
    let mut all = vec!["gen", "-o", &p];
    all.extend_from_slice(args);
    stdout(&run(&all));
    p
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--model", "bd", "-n", "10", "-x", "3", "--c", "2", "--seed", "9"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(a.starts_with("p is 10 "));
    assert!(a.contains("\nx "));
}

#[test]
fn pdkernel_run_matches_plain_enumeration() {
    let dir = scratch("run");
    for (param, model, problem, x) in [("k", "plain", "vc", "0"), ("fvs", "fvs", "is", "2"), ("bd", "bd", "is", "3"), ("td", "td", "is", "2")] {
        for seed in ["1", "3"] {
            let g = gen(&dir, &["--model", model, "--problem", problem, "-n", "10", "-x", x, "--c", "2", "--seed", seed]);
            let direct = stdout(&run(&["enumerate", "-i", &g]));
            let kernel = stdout(&run(&["pdkernel-run", "--param", param, "-i", &g]));
            assert_eq!(lines(&direct), lines(&kernel), "{param} seed {seed}");
            assert_eq!(direct.lines().count(), kernel.lines().count(), "{param} seed {seed}: duplicates");
        }
    }
}

#[test]
fn lifting_every_compressed_solution_recovers_all() {
    let dir = scratch("lift");
    for (param, model, x) in [("fvs", "fvs", "2"), ("bd", "bd", "3")] {
        let g = gen(&dir, &["--model", model, "-n", "11", "-x", x, "--c", "2", "--density", "0.35", "--seed", "5"]);
        let h = dir.join("h.txt");
        let log = dir.join("log.jsonl");
        let (h, log) = (h.to_str().unwrap(), log.to_str().unwrap());
        run(&["kernelize", "--param", param, "-i", &g, "-o", h, "--log", log]);
        let jsonl = fs::read_to_string(log).unwrap();
        assert!(jsonl.lines().next().unwrap().contains("\"header\""));
        let mut lifted = Vec::new();
        for s in stdout(&run(&["enumerate", "-i", h])).lines() {
            lifted.extend(stdout(&run(&["lift", "-i", &g, "--log", log, "--solution", s])).lines().map(str::to_string));
        }
        let direct = stdout(&run(&["enumerate", "-i", &g]));
        assert_eq!(lifted.len(), direct.lines().count(), "{param}");
        assert_eq!(lifted.into_iter().collect::<BTreeSet<_>>(), lines(&direct), "{param}");
    }
}

#[test]
fn lift_rejects_a_foreign_log() {
    let dir = scratch("foreign");
    let g = gen(&dir, &["--model", "fvs", "-n", "9", "-x", "2", "--seed", "1"]);
    let log = dir.join("log.jsonl");
    let log = log.to_str().unwrap();
    run(&["kernelize", "--param", "fvs", "-i", &g, "-o", dir.join("h.txt").to_str().unwrap(), "--log", log]);
    let other = gen(&dir, &["--model", "fvs", "-n", "9", "-x", "2", "--seed", "2"]);
    let out = run(&["lift", "-i", &other, "--log", log, "--solution", "-"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn enumerate_respects_max_and_order() {
    let dir = scratch("enum");
    let path = dir.join("p3.txt");
    fs::write(&path, "p is 3 2\ne 1 2\ne 2 3\nt 1\n").unwrap();
    let all = stdout(&run(&["enumerate", "-i", path.to_str().unwrap(), "--order", "lex"]));
    assert_eq!(all, "1\n1 3\n2\n3\n");
    let two = stdout(&run(&["enumerate", "-i", path.to_str().unwrap(), "--max", "2"]));
    assert_eq!(two, "1\n1 3\n");
}

#[test]
fn verify_passes_and_reports() {
    for param in ["k", "fvs", "td", "bd"] {
        let out = stdout(&run(&["verify", "--param", param, "--nmax", "9", "--trials", "6", "--seed", "4"]));
        assert!(out.contains("6 trials, 0 failures"), "{param}: {out}");
    }
}

#[test]
fn verify_exits_nonzero_on_error() {
    let out = run(&["verify", "--param", "k", "--nmax", "30", "--trials", "40"]);
    assert!(!out.status.success());
}

#[test]
fn bench_delay_writes_csv() {
    let out = stdout(&run(&["bench", "delay", "--disjoint-edges", "3..5"]));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "instance,outputs,max_delay_steps,mean_delay_steps,precalc_steps,wall_ms");
    assert_eq!(rows.len(), 4);
    for (row, m) in rows[1..].iter().zip(3..) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[0], format!("disjoint-edges-{m}"));
        assert_eq!(cols[1], (1u64 << m).to_string());
    }
}

#[test]
fn step_cap_stops_runaway_enumeration() {
    let dir = scratch("cap");
    let g = gen(&dir, &["-n", "12", "--seed", "3"]);
    let out = bin().args(["enumerate", "-i", &g]).env("ENUMKERN_STEP_CAP", "5").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("step cap"));
}

#[test]
fn bad_input_is_reported() {
    let dir = scratch("bad");
    let path = dir.join("bad.txt");
    fs::write(&path, "p is 2 1\ne 1 3\nt 1\n").unwrap();
    let out = run(&["enumerate", "-i", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
