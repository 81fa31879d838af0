use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eqpivot"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn eqpivot")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn eqpivot");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("one JSON document")
}

#[test]
fn solve_worked_instance() {
    let out = run(&["solve", fixture("worked.lp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("status: solved"), "{s}");
    assert!(s.contains("objective: 7\n"), "{s}");
    assert!(s.contains("x: (2, 3)"), "{s}");
}

#[test]
fn solve_json_reports_original_coordinates() {
    let out = run(&["--json", "solve", fixture("worked.lp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["originalObjective"], "7");
    assert_eq!(v["originalX"], serde_json::json!(["2", "3"]));
    assert_eq!(v["boundHolds"], true);
}

#[test]
fn minimize_instance_reports_original_sense() {
    // min x1 + x2 with x1 + 2 x2 >= 4 and 3 x1 + x2 >= 6: optimum 14/5 at (8/5, 6/5)
    let lp = "sense: min\nvars: 2\nc: 1 1\n1 2 >= 4\n3 1 >= 6\n";
    let out = run_stdin(&["--json", "oracle", "-"], lp);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["originalObjective"], "14/5");
    assert_eq!(v["originalX"], serde_json::json!(["8/5", "6/5"]));
    assert_eq!(v["certified"], true);
}

#[test]
fn klee_minty_piped_into_oracle() {
    let gen = run(&["gen", "klee-minty", "--d", "3"]);
    assert_eq!(gen.status.code(), Some(0));
    let out = run_stdin(&["oracle", "-"], &stdout(&gen));
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("status: optimal"), "{s}");
    assert!(s.contains("objective: 125\n"), "{s}");
    assert!(s.contains("certificate: verified"), "{s}");
}

#[test]
fn oracle_infeasible_prints_farkas_vector() {
    let lp = "sense: max\nvars: 1\nc: 1\n1 <= -1\n";
    let out = run_stdin(&["oracle", "-"], lp);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("status: infeasible"));
}

#[test]
fn check_reduction_on_printed_tableau() {
    let out = run(&[
        "--json",
        "check-reduction",
        "--tableau",
        fixture("mq4.json").to_str().unwrap(),
        "--solution",
        fixture("mq4_solution.txt").to_str().unwrap(),
        "--pair",
        "8,2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["columns"], serde_json::json!([8, 2, 1, 6, 3, 4]));
    assert_eq!(v["r"], serde_json::json!(["1", "9", "-5", "12", "1"]));
    assert_eq!(v["p"][0], serde_json::json!(["-1", "0", "1", "0", "0", "0"]));
    assert_eq!(v["p"][4], serde_json::json!(["1", "1", "0", "0", "0", "0"]));
}

#[test]
fn check_reduction_rejects_bad_pair() {
    let out = run(&[
        "check-reduction",
        "--tableau",
        fixture("mq4.json").to_str().unwrap(),
        "--solution",
        fixture("mq4_solution.txt").to_str().unwrap(),
        "--pair",
        "0,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diff_trace_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = run(&[
        "diff",
        fixture("worked.lp").to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("verdict: agree\n"));
    let out = run(&["--json", "replay", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["steps"], 3);
}

#[test]
fn replay_rejects_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = run(&[
        "solve",
        fixture("worked.lp").to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut step: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    let row = step["pivotRow"].as_u64().unwrap();
    step["pivotRow"] = serde_json::json!(row % 4 + 1);
    lines[1] = step.to_string();
    std::fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let out = run(&["replay", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_ids_round_trip() {
    let out = run(&["gen", "random", "--seed", "42", "--m", "3", "--n", "4"]);
    let first = stdout(&out);
    assert!(first.starts_with("# random-s42-m3-n4-k5-p100-d1\n"));
    let again = stdout(&run(&["gen", "id", "random-s42-m3-n4-k5-p100-d1"]));
    assert_eq!(first, again);
    assert_eq!(run(&["gen", "id", "no-such-family"]).status.code(), Some(1));
}

#[test]
fn fuzz_writes_report_and_exit_reflects_findings() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("campaign");
    let out = run(&[
        "--json", "fuzz", "--count", "20", "--seed", "5", "--max-m", "3", "--max-n", "3",
        "--out", out_dir.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["instances"], 20);
    let findings = v["verdicts"]["disagree"].as_u64().unwrap()
        + v["verdicts"]["engineInconclusive"].as_u64().unwrap();
    let expected = if v["verdicts"]["disagree"].as_u64().unwrap() > 0
        || v["falsificationEvents"].as_object().is_some_and(|m| !m.is_empty())
    {
        2
    } else if findings > 0 {
        3
    } else {
        0
    };
    assert_eq!(out.status.code(), Some(expected));
    for f in ["report.csv", "summary.json", "records.jsonl", "timing.json"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "/no/such/file.lp"]).status.code(), Some(1));
    assert_eq!(run(&["--theta", "x/y", "solve", "-"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn malformed_instance_is_an_error() {
    let out = run_stdin(&["solve", "-"], "sense: max\nvars: 2\nc: 1\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
