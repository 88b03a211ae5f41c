use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn topoconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoconc"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("TOPOCONC_OUTPUT_ROOT")
        .output()
        .unwrap()
}

fn triangle(dir: &Path) -> String {
    let path = dir.join("triangle.txt");
    fs::write(&path, "a b\nb c\nc a\n").unwrap();
    path.to_str().unwrap().to_owned()
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("json error line");
    serde_json::from_str(line).unwrap()
}

const ALL_TRAIN: [&str; 6] = [
    "--split-train",
    "1",
    "--split-val",
    "0",
    "--split-test",
    "0",
];

#[test]
fn triangle_concentration() {
    let dir = tempfile::tempdir().unwrap();
    let input = triangle(dir.path());
    let out = dir.path().join("out");
    let mut args = vec!["tc", "--input", &input, "--output", out.to_str().unwrap()];
    args.extend(ALL_TRAIN);
    assert!(topoconc(&args).status.success());
    let csv = fs::read_to_string(out.join("tc.csv")).unwrap();
    let train: Vec<&str> = csv.lines().filter(|l| l.contains(",Tr,")).collect();
    assert_eq!(train.len(), 3);
    assert!(train.iter().all(|l| l.ends_with(",0.25")));
    assert!(csv
        .lines()
        .filter(|l| l.contains(",Te,"))
        .all(|l| l.ends_with(",NA")));
}

#[test]
fn bias_oracle_analytic_recall() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bias");
    let status = topoconc(&[
        "bias-oracle",
        "--output",
        out.to_str().unwrap(),
        "--bias-trials",
        "2000",
    ])
    .status;
    assert!(status.success());
    let csv = fs::read_to_string(out.join("bias.csv")).unwrap();
    let recall: Vec<&str> = csv.lines().filter(|l| l.contains(",recall,")).collect();
    assert_eq!(recall.len(), 3);
    for line in recall {
        assert_eq!(line.split(',').nth(4), Some("0.1"));
    }
    assert!(out.join("bias_histogram.csv").exists());
    assert!(out.join("bias_gof.json").exists());
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = triangle(dir.path());
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let missing = topoconc(&["tc", "--input", "/nonexistent/edges.txt", "--output", out]);
    assert_eq!(missing.status.code(), Some(3));
    let json = error_json(&missing);
    assert_eq!(json["exit_code"], 3);
    assert!(json["message"]
        .as_str()
        .unwrap()
        .contains("/nonexistent/edges.txt"));

    let bad_k = topoconc(&["tc", "--input", &input, "--output", out, "--tc-k", "0"]);
    assert_eq!(bad_k.status.code(), Some(6));
    assert_eq!(error_json(&bad_k)["exit_code"], 6);

    let bad_ratio = topoconc(&[
        "split",
        "--input",
        &input,
        "--output",
        out,
        "--split-train",
        "0.9",
    ]);
    assert_eq!(bad_ratio.status.code(), Some(6));

    assert_eq!(topoconc(&["tc", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(topoconc(&["tc", "--output", out]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.txt");
    fs::write(&garbage, "a\n").unwrap();
    let parse = topoconc(&["tc", "--input", garbage.to_str().unwrap(), "--output", out]);
    assert_eq!(parse.status.code(), Some(4));
}

#[test]
fn help_lists_defaults_and_exit_codes() {
    let help = topoconc(&["reweight", "--help"]);
    let text = String::from_utf8_lossy(&help.stdout);
    assert!(text.contains("--reweight-gamma"));
    assert!(text.contains("[default: 0.1]"));
    assert!(text.contains("Exit codes"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = triangle(dir.path());
    let out = dir.path().join("out");
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        format!(
            "# triangle\ninput = {input}\noutput = {}\ntc.k = 2\ntc.norm = min\nsplit.train = 1\nsplit.val = 0\nsplit.test = 0\n",
            out.display()
        ),
    )
    .unwrap();
    let status = topoconc(&[
        "tc",
        "--config",
        config.to_str().unwrap(),
        "--tc-norm",
        "source",
    ])
    .status;
    assert!(status.success());
    let resolved = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(resolved.lines().any(|l| l == "tc.k = 2"));
    assert!(resolved.lines().any(|l| l == "tc.norm = source"));
    let csv = fs::read_to_string(out.join("tc.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",2,0.5,source,"));

    fs::write(&config, "tc.hops = 3\n").unwrap();
    let unknown = topoconc(&["tc", "--config", config.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = triangle(dir.path());
    let root = dir.path().join("root");
    let mut args = vec!["tc", "--input", input.as_str()];
    args.extend(ALL_TRAIN);
    let status = Command::new(env!("CARGO_BIN_EXE_topoconc"))
        .args(&args)
        .env("RUST_LOG", "warn")
        .env("TOPOCONC_OUTPUT_ROOT", &root)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(root.join("tc.csv").exists());
}

#[test]
fn reweight_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.txt");
    fs::write(&path, "0 1\n1 2\n2 3\n3 0\n0 2\n1 3\n3 4\n4 5\n5 3\n").unwrap();
    let out = dir.path().join("out");
    let mut args = vec![
        "reweight",
        "--input",
        path.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--reweight-iterations",
        "4",
        "--reweight-predictor",
        "common-neighbors",
    ];
    args.extend(ALL_TRAIN);
    assert!(topoconc(&args).status.success());
    let trace = fs::read_to_string(out.join("reweight_trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("tau,mean_weighted_tc"));
    assert_eq!(trace.lines().count(), 6);
    let adjacency = fs::read_to_string(out.join("reweighted_adjacency.csv")).unwrap();
    assert_eq!(adjacency.lines().count(), 1 + 2 * 9);
}
