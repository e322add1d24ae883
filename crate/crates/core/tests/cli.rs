use std::path::{Path, PathBuf};
use std::process::Command;

use lpa_bridge::cli::{run, Outcome, Verdict};
use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn lpa(args: &[&str]) -> Outcome {
    let mut argv = vec!["lpa-bridge"];
    argv.extend_from_slice(args);
    run(argv)
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut argv = args.to_vec();
    argv.extend(["--output", "json"]);
    let out = lpa(&argv);
    (out.code, serde_json::from_str(&out.stdout).expect("json report"))
}

fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

#[test]
fn se_verify_example_passes() {
    let out = lpa(&[
        "se",
        "verify",
        "--A",
        &data("a.json"),
        "--B",
        &data("b.json"),
        "--witness",
        &data("w.json"),
    ]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.contains("verdict: pass"));
}

#[test]
fn se_verify_wrong_witness_names_entry() {
    let dir = tempfile::tempdir().unwrap();
    let w = write_temp(
        &dir,
        "w.json",
        r#"{"R":{"entries":[[1,2]]},"S":{"entries":[[1],[1]]},"n":1}"#,
    );
    let (code, report) = json_report(&[
        "se",
        "verify",
        "--A",
        &data("a.json"),
        "--B",
        &data("b.json"),
        "--witness",
        &w,
    ]);
    assert_eq!(code, 1);
    assert_eq!(report["verdict"], "fail");
    let ce = report["counterexamples"].as_array().unwrap();
    assert!(!ce.is_empty());
    assert!(ce[0].as_str().unwrap().contains("entry"), "{ce:?}");
}

#[test]
fn se_search_with_zero_entries_is_unknown() {
    let out = lpa(&[
        "se",
        "search",
        "--A",
        &data("a.json"),
        "--B",
        &data("b.json"),
        "--max-entry",
        "0",
    ]);
    assert_eq!(out.code, 2);
    assert_eq!(out.report.unwrap().verdict, Verdict::UnknownWithinBounds);
}

#[test]
fn se_search_finds_example_witness() {
    let (code, report) = json_report(&["se", "search", "--A", &data("a.json"), "--B", &data("b.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["R"]["entries"], serde_json::json!([[1, 1]]));
    assert_eq!(report["result"]["n"], 1);
}

#[test]
fn sse_search_chain_and_verify() {
    let (code, report) = json_report(&["sse", "search", "--A", &data("a.json"), "--B", &data("b.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["S"]["entries"], serde_json::json!([[1], [1]]));
    let out = lpa(&[
        "sse",
        "verify",
        "--A",
        &data("a.json"),
        "--B",
        &data("b.json"),
        "--witness",
        &data("w.json"),
    ]);
    assert_eq!(out.code, 0);

    let dir = tempfile::tempdir().unwrap();
    let (code, report) = json_report(&[
        "sse",
        "chain",
        "--A",
        &data("a.json"),
        "--B",
        &data("b.json"),
        "--depth",
        "2",
    ]);
    assert_eq!(code, 0);
    let chain = write_temp(&dir, "chain.json", &report.to_string());
    let out = lpa(&[
        "sse",
        "verify-chain",
        "--A",
        &data("a.json"),
        "--B",
        &data("b.json"),
        "--chain",
        &chain,
    ]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let out = lpa(&[
        "sse",
        "verify-chain",
        "--A",
        &data("b.json"),
        "--B",
        &data("a.json"),
        "--chain",
        &chain,
    ]);
    assert_eq!(out.code, 1);
}

#[test]
fn graph_commands() {
    let (code, report) = json_report(&["graph", "adjacency", "--graph", &data("f.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["entries"], serde_json::json!([[1, 1], [1, 1]]));

    let (code, report) = json_report(&["graph", "from-matrix", "--matrix", &data("b.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["edges"].as_array().unwrap().len(), 4);
    assert_eq!(report["result"]["edges"][0]["name"], "0→0#0");

    let (code, report) = json_report(&["graph", "power", "--graph", &data("e.json"), "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["edges"].as_array().unwrap().len(), 8);

    assert_eq!(
        lpa(&["graph", "iso", "--first", &data("f.json"), "--second", &data("f.json")]).code,
        0
    );
    let out = lpa(&["graph", "iso", "--first", &data("e.json"), "--second", &data("f.json")]);
    assert_eq!(out.code, 3, "different vertex sets are an input error");
}

#[test]
fn graph_random_depends_only_on_seed() {
    let a = lpa(&["graph", "random", "--vertices", "3", "--seed", "7", "--output", "json"]);
    let b = lpa(&["graph", "random", "--vertices", "3", "--seed", "7", "--output", "json"]);
    let c = lpa(&["graph", "random", "--vertices", "3", "--seed", "8", "--output", "json"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.report.unwrap().result, c.report.unwrap().result);
}

#[test]
fn lpa_commands() {
    let dir = tempfile::tempdir().unwrap();
    let sum = write_temp(
        &dir,
        "sum.json",
        r#"[{"alpha":["f1"],"beta":["f1"]},{"alpha":["g1"],"beta":["g1"],"coeff":"1"}]"#,
    );
    let (code, report) = json_report(&["lpa", "normalize", "--graph", &data("f.json"), "--element", &sum]);
    assert_eq!(code, 0);
    assert_eq!(
        report["result"],
        serde_json::json!([{"alpha": ["x"], "beta": ["x"], "coeff": "1"}])
    );

    let ghost = write_temp(&dir, "ghost.json", r#"[{"alpha":[],"beta":["g1"],"coeff":"2/3"}]"#);
    let edge = write_temp(&dir, "edge.json", r#"[{"alpha":["g1"],"beta":[]}]"#);
    let (code, report) = json_report(&[
        "lpa",
        "mul",
        "--graph",
        &data("f.json"),
        "--left",
        &ghost,
        "--right",
        &edge,
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        report["result"],
        serde_json::json!([{"alpha": ["y"], "beta": ["y"], "coeff": "2/3"}])
    );

    let mixed = write_temp(
        &dir,
        "mixed.json",
        r#"[{"alpha":["g1"],"beta":[]},{"alpha":[],"beta":["g1"]}]"#,
    );
    let (code, report) = json_report(&["lpa", "degree", "--graph", &data("f.json"), "--element", &mixed]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["degree"], Value::Null);
    let components = report["result"]["components"].as_object().unwrap();
    assert_eq!(components.keys().collect::<Vec<_>>(), ["-1", "1"]);
}

#[test]
fn conj_commands() {
    assert_eq!(lpa(&["conj", "verify", "--pair", &data("pair_m.json")]).code, 0);
    let (code, report) = json_report(&[
        "conj",
        "compose",
        "--first",
        &data("pair_m.json"),
        "--second",
        &data("pair_n.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["M"]["basis"].as_array().unwrap().len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let pair: Value = serde_json::from_str(&std::fs::read_to_string(data("pair_m.json")).unwrap()).unwrap();
    let mut identity = serde_json::Map::new();
    for b in pair["M"]["basis"].as_array().unwrap() {
        let key = format!("({},{})", b["src"].as_str().unwrap(), b["tgt"].as_str().unwrap());
        identity.insert(key, serde_json::json!([["1"]]));
    }
    let phi = write_temp(&dir, "phi.json", &serde_json::json!({ "blocks": identity }).to_string());
    let out = lpa(&[
        "conj",
        "equiv",
        "--first",
        &data("pair_m.json"),
        "--second",
        &data("pair_m.json"),
        "--phi",
        &phi,
    ]);
    assert_eq!(out.code, 0, "{}", out.stdout);

    let mut scaled = pair.clone();
    let sigma = scaled["sigma"]["blocks"].as_object_mut().unwrap();
    let first = sigma.keys().next().unwrap().clone();
    let rows = sigma[&first].as_array().unwrap().len();
    sigma.insert(first, Value::Array(vec![Value::Array(vec!["0".into(); rows]); rows]));
    let bad = write_temp(&dir, "bad.json", &scaled.to_string());
    let (code, report) = json_report(&["conj", "verify", "--pair", &bad]);
    assert_eq!(code, 1);
    assert!(report["counterexamples"][0].as_str().unwrap().contains("block"));
}

#[test]
fn bridge_verify_ck_length_zero_passes() {
    for pair in ["pair_m.json", "pair_n.json"] {
        let out = lpa(&["bridge", "verify-ck", "--pair", &data(pair), "--length-bound", "0"]);
        assert_eq!(out.code, 0, "{}", out.stdout);
    }
    let out = lpa(&[
        "bridge",
        "verify-ck",
        "--graph",
        &data("f.json"),
        "--length-bound",
        "2",
        "--degree-bound",
        "1",
    ]);
    assert_eq!(out.code, 0);
}

#[test]
fn bridge_build_and_act() {
    let (code, report) = json_report(&[
        "bridge",
        "build",
        "--pair",
        &data("pair_m.json"),
        "--length-bound",
        "1",
        "--list",
    ]);
    assert_eq!(code, 0);
    let basis = report["result"]["basis"].as_array().unwrap();
    assert_eq!(basis.len() as u64, report["result"]["basis_size"].as_u64().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let unit = write_temp(&dir, "y.json", &basis[0].to_string());
    let (code, report) = json_report(&[
        "bridge",
        "act",
        "--pair",
        &data("pair_m.json"),
        "--generator",
        "e1",
        "--element",
        &unit,
    ]);
    assert_eq!(code, 0);
    assert!(!report["result"]["element"].as_array().unwrap().is_empty());
    let (code, _) = json_report(&[
        "bridge",
        "act",
        "--pair",
        &data("pair_m.json"),
        "--generator",
        "nope",
        "--element",
        &unit,
    ]);
    assert_eq!(code, 3);
}

#[test]
fn sink_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_temp(
        &dir,
        "g.json",
        r#"{"vertices":["a","b"],"edges":[{"name":"e","src":"a","tgt":"b"}]}"#,
    );
    let (code, report) = json_report(&["bridge", "verify-ck", "--graph", &g]);
    assert_eq!(code, 3);
    assert!(report["error"].as_str().unwrap().contains("sink"));
}

#[test]
fn com_pipeline_through_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (code, forward) = json_report(&[
        "com",
        "from-sse",
        "--E",
        &data("e.json"),
        "--F",
        &data("f.json"),
        "--witness",
        &data("w.json"),
    ]);
    assert_eq!(code, 0);
    let (code, backward) = json_report(&[
        "com",
        "from-sse",
        "--E",
        &data("f.json"),
        "--F",
        &data("e.json"),
        "--witness",
        &data("w_rev.json"),
    ]);
    assert_eq!(code, 0);
    let c1 = write_temp(&dir, "c1.json", &forward.to_string());
    let c2 = write_temp(&dir, "c2.json", &backward.to_string());
    assert_eq!(lpa(&["com", "verify", "--witness", &c1]).code, 0);
    let (code, chained) = json_report(&["com", "chain", "--first", &c1, "--second", &c2]);
    assert_eq!(code, 0);
    assert_eq!(chained["result"]["n"], 2);
    assert_eq!(lpa(&["com", "chain", "--first", &c1, "--second", &c1]).code, 3);

    let (code, found) = json_report(&[
        "com",
        "search",
        "--E",
        &data("e.json"),
        "--F",
        &data("f.json"),
        "--witness",
        &data("w.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(found["result"]["n"], 1);
}

#[test]
fn malformed_inputs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write_temp(&dir, "junk.json", "{not json");
    let out = lpa(&[
        "se",
        "verify",
        "--A",
        &junk,
        "--B",
        &data("b.json"),
        "--witness",
        &data("w.json"),
    ]);
    assert_eq!(out.code, 3);
    assert!(out.stdout.contains("junk.json"));
    assert_eq!(
        lpa(&["se", "verify", "--A", "/nonexistent.json", "--B", "b", "--witness", "w"]).code,
        3
    );
    assert_eq!(lpa(&["frobnicate"]).code, 3);
    assert_eq!(lpa(&["se", "verify"]).code, 3);
    assert_eq!(lpa(&["--field", "gfp:4", "graph", "random"]).code, 3);
    let help = lpa(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("bridge"));
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let (a, b) = (data("a.json"), data("b.json"));
    let search = |threads: &str| {
        json_report(&[
            "sse",
            "search",
            "--A",
            &b,
            "--B",
            &a,
            "--max-entry",
            "2",
            "--threads",
            threads,
        ])
        .1
    };
    let one = search("1");
    let eight = search("8");
    assert_eq!(one["verdict"], "pass");
    assert_eq!(one["result"], eight["result"]);
    assert_eq!(one["inputs_digest"], eight["inputs_digest"]);
    let again = lpa(&[
        "bridge",
        "verify-ck",
        "--pair",
        &data("pair_m.json"),
        "--output",
        "json",
    ]);
    let twice = lpa(&[
        "bridge",
        "verify-ck",
        "--pair",
        &data("pair_m.json"),
        "--output",
        "json",
        "--threads",
        "3",
    ]);
    assert_eq!(again.report.unwrap().result, twice.report.unwrap().result);
}

#[test]
fn timing_is_opt_in() {
    let plain = lpa(&["conj", "verify", "--pair", &data("pair_m.json")]);
    assert!(plain.report.unwrap().timing_ms.is_none());
    let timed = lpa(&["conj", "verify", "--pair", &data("pair_m.json"), "--timing"]);
    assert!(timed.report.unwrap().timing_ms.is_some());
}

#[test]
fn binary_honours_field_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let half = write_temp(&dir, "half.json", r#"[{"alpha":["f1"],"beta":[],"coeff":"1/2"}]"#);
    let bin = env!("CARGO_BIN_EXE_lpa-bridge");
    let run_bin = |env: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args([
            "lpa",
            "normalize",
            "--graph",
            &data("f.json"),
            "--element",
            &half,
            "--output",
            "json",
        ]);
        cmd.args(["--field", "rational"]);
        match env {
            Some(v) => cmd.env("LPA_FIELD", v),
            None => cmd.env_remove("LPA_FIELD"),
        };
        cmd.output().unwrap()
    };
    let out = run_bin(None);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"][0]["coeff"], "1/2");

    let out = run_bin(Some("gfp:3"));
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"][0]["coeff"], "2");

    let out = run_bin(Some("reals"));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}
