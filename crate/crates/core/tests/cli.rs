use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_corank-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn records(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn without_timestamps(mut v: serde_json::Value) -> serde_json::Value {
    let obj = v.as_object_mut().unwrap();
    obj.remove("started");
    obj.remove("finished");
    v
}

#[test]
fn help_on_every_subcommand() {
    for sub in ["rank", "levy", "threshold", "theta", "rinv", "classify", "enumerate", "mc", "bounds", "report", "run"] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage:"), "{sub}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn enumerate_prints_exact_tail_and_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.jsonl");
    let o = run(&["enumerate", "--n", "2", "--p", "1/2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("P[corank >= 1] = 10/16"));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert_eq!(r["record_type"], "corank_distribution");
    assert_eq!(r["probs"]["2"], "1/16");
    for key in ["subcommand", "config_hash", "seed", "tool_version", "started", "finished"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn impossible_corank_gets_rule_of_three() {
    let o = run(&["mc", "--n", "2", "--k", "3", "--p", "1/2", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0/10"));
    assert!(text.contains("rule of three"));
}

#[test]
fn refusals_and_bad_configs_have_their_exit_codes() {
    assert_eq!(run(&["enumerate", "--n", "6", "--p", "1/2"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--n", "2", "--p", "0.7"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "n = 2\np = \"1/2\"\ntrails = 5\n").unwrap();
    let o = run(&["enumerate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trails"));
    std::fs::write(&cfg, "n = \"two\"\np = \"1/2\"\n").unwrap();
    let o = run(&["enumerate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`n`"));
    std::fs::write(&cfg, "n = [unclosed\n").unwrap();
    assert_eq!(run(&["enumerate", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn flags_and_config_agree_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mc.toml");
    std::fs::write(&cfg, "experiment = \"mc\"\nn = 3\nk = 1\np = \"1/4\"\ntrials = 5000\nseed = 11\n").unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    let oa = run(&["mc", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    let ob = run(&["mc", "--n", "3", "--k", "1", "--p", "0.25", "--trials", "5000", "--seed", "11", "--out", b.to_str().unwrap()]);
    assert!(oa.status.success() && ob.status.success());
    let ra = without_timestamps(records(&a).remove(0));
    let rb = without_timestamps(records(&b).remove(0));
    assert_eq!(ra, rb);

    let oc = run(&["mc", "--config", cfg.to_str().unwrap(), "--seed", "12", "--out", c.to_str().unwrap()]);
    assert!(oc.status.success());
    let rc = records(&c).remove(0);
    assert_eq!(rc["seed"], 12);
    assert_ne!(rc["config_hash"], ra["config_hash"]);
}

#[test]
fn run_dispatches_on_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.toml");
    let out = dir.path().join("b.jsonl");
    std::fs::write(
        &cfg,
        format!("experiment = \"bounds\"\nn_min = 2\nn_max = 4\np = \"1/2\"\nk = 1\nout = {:?}\n", out.to_str().unwrap()),
    )
    .unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = records(&out);
    assert_eq!(recs.len(), 3);
    assert!(recs.iter().all(|r| r["record_type"] == "bound_row" && r["subcommand"] == "bounds"));
    std::fs::write(&cfg, "experiment = \"nope\"\n").unwrap();
    assert_eq!(run(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn levy_and_threshold_print_single_records() {
    let o = run(&["levy", "--weights", "1,1", "--p", "1/2", "--r", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["value"], "3/4");
    assert!(v.get("method").is_some() && v.get("enumeration_cap").is_some());

    let o = run(&["threshold", "--weights", "1", "--p", "1/2", "--L", "4"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["value"], 0.125);
}

#[test]
fn matrix_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let bits = dir.path().join("m.txt");
    std::fs::write(&bits, "3 3\n110\n011\n101\n").unwrap();
    let o = run(&["rank", "--matrix", bits.to_str().unwrap(), "--prime", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("rank = 3"));
    assert!(text.contains("rank mod 2 = 2"));
    assert_eq!(run(&["rank", "--matrix", bits.to_str().unwrap(), "--prime", "4"]).status.code(), Some(1));

    let u = dir.path().join("u.txt");
    std::fs::write(&u, "1 2\n0.6 0.8\n").unwrap();
    let out = dir.path().join("r.jsonl");
    let o = run(&["rinv", "--matrix", u.to_str().unwrap(), "--mode", "exhaustive", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r = records(&out).remove(0);
    assert_eq!(r["selection"]["subset"], serde_json::json!([1]));

    let e1 = dir.path().join("e1.txt");
    std::fs::write(&e1, "1 4\n1 0 0 0\n").unwrap();
    let out = dir.path().join("t.jsonl");
    let o = run(&["theta", "--matrix", e1.to_str().unwrap(), "--p", "1/2", "--C", "2", "--verify", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = records(&out).remove(0);
    assert_eq!(r["verification"]["ok"], true);
    assert_eq!(r["certificate"]["c_lkr"], 2.0);

    let skew = dir.path().join("s.txt");
    std::fs::write(&skew, "1 2\n1 1\n").unwrap();
    assert_eq!(run(&["theta", "--matrix", skew.to_str().unwrap(), "--p", "1/2"]).status.code(), Some(1));

    let o = run(&["classify", "--vector", "1,0,0,0", "--delta", "0.25", "--rho", "0.1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Comp"));
}

#[test]
fn report_joins_results_with_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let e = dir.path().join("e.jsonl");
    let m = dir.path().join("m.jsonl");
    let csv = dir.path().join("r.csv");
    assert!(run(&["enumerate", "--n", "3", "--p", "1/2", "--out", e.to_str().unwrap()]).status.success());
    assert!(run(&["mc", "--n", "3", "--k", "1", "--p", "1/2", "--trials", "20000", "--seed", "3", "--out", m.to_str().unwrap()])
        .status
        .success());
    let o = run(&["report", "--inputs", e.to_str().unwrap(), m.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("consistent with the zero-row lower bound"));
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,k,p,epsilon,exact_or_estimate,ci_low,ci_high,theorem_rate,zero_rows_lower,conjecture_rhs,structured_lower"
    );
    // Three exact tails from the enumeration, one estimate.
    assert_eq!(lines.count(), 4);
}

#[test]
fn bounds_csv_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = run(&["bounds", "--n-min", "2", "--n-max", "5", "--p", "1/2", "--k", "1", "--exact-union", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("2,1,1/2,0.0,0.625,"));
}
