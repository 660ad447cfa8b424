//! CLI determinism goldens and exit-code contract.
//!
//! Each golden is generated by one scenario invocation; the test runs the
//! binary twice and requires both outputs to be byte-identical to each
//! other and to the committed golden file.

use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evprob"))
        .args(args)
        .output()
        .expect("binary runs")
}

const GOLDENS: &[(&str, &[&str])] = &[
    ("scenario_tweety.txt", &["scenario", "tweety"]),
    ("scenario_nixon.txt", &["scenario", "nixon"]),
    ("scenario_cohabitation.txt", &["scenario", "cohabitation"]),
    ("scenario_lottery_4.txt", &["scenario", "lottery", "--n", "4"]),
    (
        "scenario_measurement_500.txt",
        &["scenario", "measurement", "--n", "500", "--p", "0.01"],
    ),
    (
        "eu_compare_10.txt",
        &["eu-compare", "--n", "10", "--p", "0.25", "--gain", "5", "--loss", "1"],
    ),
];

#[test]
fn criterion_10_golden_determinism() {
    let mut all_ok = true;
    for (file, args) in GOLDENS {
        let expected = std::fs::read(format!("tests/golden/{file}")).expect("golden exists");
        let first = run(args);
        let second = run(args);
        let ok = first.status.success()
            && second.status.success()
            && first.stdout == second.stdout
            && first.stdout == expected;
        if !ok {
            all_ok = false;
            eprintln!(
                "golden mismatch for {file}: exit {:?}/{:?}",
                first.status.code(),
                second.status.code()
            );
        }
    }
    println!(
        "criterion 10: {} — {} goldens byte-identical across two runs",
        if all_ok { "pass" } else { "FAIL" },
        GOLDENS.len()
    );
    assert!(all_ok);
}

#[test]
fn invalid_scenario_parameter_exits_2() {
    let out = run(&["scenario", "lottery", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_query_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.evp");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "const a.").unwrap();
    writeln!(f, "fact p(a).").unwrap();
    drop(f);
    let out = run(&["query", path.to_str().unwrap(), "p("]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let ok = run(&["query", path.to_str().unwrap(), "p(a)"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn structured_output_is_valid_json_and_stable() {
    let args = &["scenario", "nixon", "--format", "structured"];
    let first = run(args);
    let second = run(args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let value: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(value["command"], "scenario");
    assert_eq!(value["status"], "ok");
}
