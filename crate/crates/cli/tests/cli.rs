use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn aspir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aspir")).args(args).env_remove("ASPIR_LIMITS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_self_support_prints_empty_set() {
    let o = aspir(&["solve", path(&fixture("self_support.lp"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{}\n");
}

#[test]
fn solve_modes_agree() {
    let f = fixture("even.lp");
    let a = aspir(&["solve", path(&f)]);
    let b = aspir(&["solve", path(&f), "--mode", "oracle"]);
    assert_eq!(stdout(&a), "{a}\n{b}\n");
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn solve_without_answer_set_exits_one() {
    let o = aspir(&["solve", path(&fixture("odd.lp"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "");
}

#[test]
fn meta_check_odd_loop() {
    let o = aspir(&["meta-check", path(&fixture("odd.lp"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "INCONSISTENT\n");
    let o = aspir(&["meta-check", path(&fixture("even.lp"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "CONSISTENT\n");
}

#[test]
fn explain_prints_reason() {
    let o = aspir(&[
        "explain",
        path(&fixture("reason.lp")),
        "--domain",
        "a,b,c",
        "--facts",
        path(&fixture("reason_facts.lp")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "IR: +{a} -{c}\n");
}

#[test]
fn explain_backends_agree() {
    let f = fixture("reason.lp");
    let tau = stdout(&aspir(&["explain", path(&f), "--domain", "a,b,c", "--via", "tau"]));
    let bf = stdout(&aspir(&["explain", path(&f), "--domain", "a,b,c", "--via", "bruteforce"]));
    assert_eq!(tau, bf);
    assert!(tau.lines().any(|l| l == "IR: +{a} -{c}"));
    let cdnl =
        stdout(&aspir(&["explain", path(&f), "--domain", "a,b,c", "--facts", path(&fixture("reason_facts.lp"))]));
    assert!(tau.contains(cdnl.trim()));
}

#[test]
fn explain_minimize_and_emit() {
    let f = fixture("reason.lp");
    let o = aspir(&["explain", path(&f), "--domain", "a,b,c", "--via", "bruteforce", "--minimize"]);
    assert_eq!(stdout(&o), "IR: +{a} -{c}\n");
    let o = aspir(&["explain", path(&f), "--domain", "a,b,c", "--emit-tau"]);
    assert!(stdout(&o).contains(":- not noAS."));
}

#[test]
fn explain_consistent_input() {
    let o = aspir(&["explain", path(&fixture("reason.lp")), "--domain", "a,b,c", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["consistent"], true);
}

#[test]
fn chain_modes_agree_on_committee() {
    let f = fixture("committee.lp");
    let outs: Vec<String> =
        ["monolithic", "split", "tuprop"].iter().map(|m| stdout(&aspir(&["chain", path(&f), "--mode", m]))).collect();
    assert!(!outs[0].is_empty());
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
}

#[test]
fn chain_json_reports_counters() {
    let o = aspir(&["chain", path(&fixture("setguess3.lp")), "--mode", "tuprop", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["answer_sets"].as_array().unwrap().len(), 2);
    assert_eq!(v["units"], 2);
    assert!(v["counters"][1]["solves"].as_u64().unwrap() < 8);
}

#[test]
fn query_hamiltonian_path() {
    let o = aspir(&["query", path(&core_fixture("hamiltonian/whole_path.lp"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "{noHamiltonian}\n");
}

#[test]
fn bench_writes_csv() {
    let dir = std::env::temp_dir().join(format!("aspir-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("rows.csv");
    let o = aspir(&[
        "bench",
        "setguess",
        "--sizes",
        "3,4",
        "--modes",
        "splitting,tuprop",
        "--out",
        path(&out),
        "--jobs",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("setguess,3,1,splitting,2,1;8,1;8,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(aspir(&["chain", "x.lp", "--mode", "bogus"]).status.code(), Some(2));
    assert_eq!(aspir(&["solve", "/nonexistent/file.lp"]).status.code(), Some(2));
    assert_eq!(aspir(&[]).status.code(), Some(2));
}

#[test]
fn resource_bound_exits_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_aspir"))
        .args(["solve", path(&fixture("even.lp")), "--mode", "oracle"])
        .env("ASPIR_LIMITS", "bruteforce_atoms=1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
