//! Black-box tests of the `mprs` binary: format contracts, exit codes,
//! config plumbing and output determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mprs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mprs"))
}

fn run(args: &[&str]) -> Output {
    mprs().args(args).output().expect("spawn mprs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn write(&self, name: &str, contents: &str) -> String {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p.display().to_string()
    }
}

#[test]
fn predict_toy_file_format_contract() {
    let ws = Workspace::new();
    let train = ws.write(
        "train.csv",
        "c1,value\n0,10\n1,12\n2,14\n3,16\n",
    );
    let query = ws.write("query.csv", "c1\n1.5\n");
    let out = run(&[
        "predict",
        "--train",
        &train,
        "--query",
        &query,
        "--out",
        &ws.arg("pred.csv"),
        "--nb",
        "4",
        "--seed",
        "1",
    ]);
    assert_code(&out, 0);

    let lines = data_lines(&ws.path("pred.csv"));
    assert_eq!(lines[0], "c1,mean,std");
    assert_eq!(lines.len(), 2, "one data row per query");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 3);
    assert_eq!(fields[0], "1.5");
    let mean: f64 = fields[1].parse().unwrap();
    assert!((10.0..=16.0).contains(&mean));
}

#[test]
fn identical_seeds_give_byte_identical_outputs() {
    let ws = Workspace::new();
    let mut train = String::from("c1,c2,value\n");
    let mut query = String::from("c1,c2\n");
    for i in 0..40 {
        let x = (i * 7 % 40) as f64 * 0.25;
        let y = (i * 13 % 40) as f64 * 0.25;
        train.push_str(&format!("{x},{y},{}\n", 10.0 + x + y));
        query.push_str(&format!("{},{}\n", x + 0.1, y + 0.1));
    }
    let train = ws.write("train.csv", &train);
    let query = ws.write("query.csv", &query);

    for out_name in ["a.csv", "b.csv"] {
        let out = run(&[
            "predict",
            "--train",
            &train,
            "--query",
            &query,
            "--out",
            &ws.arg(out_name),
            "--seed",
            "42",
        ]);
        assert_code(&out, 0);
    }
    // data rows byte-identical (headers differ in the out path echo)
    assert_eq!(data_lines(&ws.path("a.csv")), data_lines(&ws.path("b.csv")));
}

#[test]
fn missing_required_flag_exits_2() {
    let ws = Workspace::new();
    let query = ws.write("query.csv", "c1\n1.0\n");
    let out = run(&["predict", "--query", &query, "--out", &ws.arg("x.csv")]);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--train"));
}

#[test]
fn malformed_input_reports_line_number() {
    let ws = Workspace::new();
    let train = ws.write("train.csv", "c1,value\n0,1\nbad,row,here\n");
    let query = ws.write("query.csv", "c1\n0.5\n");
    let out = run(&[
        "predict",
        "--train",
        &train,
        "--query",
        &query,
        "--out",
        &ws.arg("x.csv"),
    ]);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3"));
}

#[test]
fn model_error_exits_3() {
    let ws = Workspace::new();
    // constant training values short-circuit fine, but asking for more
    // neighbors than samples is a model error
    let train = ws.write("train.csv", "c1,value\n0,1\n1,2\n2,3\n3,4\n4,5\n");
    let query = ws.write("query.csv", "c1\n0.5\n");
    let out = run(&[
        "predict",
        "--train",
        &train,
        "--query",
        &query,
        "--out",
        &ws.arg("x.csv"),
        "--nb",
        "50",
    ]);
    assert_code(&out, 3);
}

#[test]
fn crossval_rejects_unknown_method() {
    let ws = Workspace::new();
    let data = ws.write("d.csv", "c1,value\n0,1\n1,2\n2,3\n");
    let out = run(&[
        "crossval",
        "--data",
        &data,
        "--method",
        "spline",
        "--tr",
        "0.5",
        "--out",
        &ws.arg("x.csv"),
    ]);
    assert_code(&out, 2);
}

#[test]
fn crossval_single_split_report_shape() {
    let ws = Workspace::new();
    let mut data = String::from("c1,c2,value\n");
    for i in 0..30 {
        let x = (i % 6) as f64;
        let y = (i / 6) as f64;
        data.push_str(&format!("{x},{y},{}\n", x * 2.0 + y));
    }
    let data = ws.write("d.csv", &data);
    let out = run(&[
        "crossval",
        "--data",
        &data,
        "--method",
        "idw",
        "--tr",
        "0.5",
        "--splits",
        "1",
        "--seed",
        "9",
        "--out",
        &ws.arg("m.csv"),
    ]);
    assert_code(&out, 0);
    let lines = data_lines(&ws.path("m.csv"));
    assert_eq!(lines[0], "split,method,AE,ARE,RSE,R,t_cpu_s");
    assert_eq!(lines.len(), 3, "one split row plus the aggregate");
    assert!(lines[1].starts_with("0,idw,"));
    assert!(lines[2].starts_with("aggregate,idw,"));
    // single split: aggregate equals the split values
    let split: Vec<&str> = lines[1].split(',').collect();
    let agg: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(split[2..6], agg[2..6]);
}

#[test]
fn synth_writes_requested_configuration() {
    let ws = Workspace::new();
    let out = run(&[
        "synth",
        "--n",
        "25",
        "--L",
        "50",
        "--kappa",
        "0.2",
        "--nu",
        "0.5",
        "--sigma",
        "25",
        "--mean",
        "150",
        "--seed",
        "4",
        "--out",
        &ws.arg("f.csv"),
    ]);
    assert_code(&out, 0);
    let lines = data_lines(&ws.path("f.csv"));
    assert_eq!(lines[0], "c1,c2,value");
    assert_eq!(lines.len(), 26);
    for row in &lines[1..] {
        let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(f[0] >= 0.0 && f[0] <= 50.0 && f[1] >= 0.0 && f[1] <= 50.0);
    }

    // one-row file
    let out = run(&[
        "synth", "--n", "1", "--L", "1", "--kappa", "1", "--nu", "0.5", "--sigma", "1",
        "--out", &ws.arg("one.csv"),
    ]);
    assert_code(&out, 0);
    assert_eq!(data_lines(&ws.path("one.csv")).len(), 2);

    // invalid smoothness
    let out = run(&[
        "synth", "--n", "5", "--L", "1", "--kappa", "1", "--nu", "0", "--sigma", "1",
        "--out", &ws.arg("x.csv"),
    ]);
    assert_code(&out, 2);
}

#[test]
fn bench_empty_sizes_exits_2() {
    let ws = Workspace::new();
    let out = run(&[
        "bench", "--sizes", "", "--tr", "0.33", "--out", &ws.arg("b.csv"),
    ]);
    assert_code(&out, 2);
}

#[test]
fn config_file_resolution_and_echo() {
    let ws = Workspace::new();
    let train = ws.write("train.csv", "c1,value\n0,10\n1,12\n2,14\n3,16\n4,18\n");
    let query = ws.write("query.csv", "c1\n2.5\n");
    let conf = ws.write("run.conf", "nb = 4\nseed = 7\ntemp = 0.01\n");
    let out = run(&[
        "predict",
        "--config",
        &conf,
        "--train",
        &train,
        "--query",
        &query,
        "--out",
        &ws.arg("p.csv"),
        "--seed",
        "42", // flag wins over config
    ]);
    assert_code(&out, 0);
    let text = fs::read_to_string(ws.path("p.csv")).unwrap();
    assert!(text.contains("# nb = 4"), "config value applied");
    assert!(text.contains("# seed = 42"), "flag overrides config");
    assert!(text.contains("# temp = 0.01"));

    let bad = ws.write("bad.conf", "nonsense-key = 1\n");
    let out = run(&[
        "predict", "--config", &bad, "--train", &train, "--query", &query,
        "--out", &ws.arg("q.csv"),
    ]);
    assert_code(&out, 2);
}

#[test]
fn predictions_round_trip_byte_identically() {
    let ws = Workspace::new();
    let train = ws.write(
        "train.csv",
        "c1,c2,value\n0,0,1.25\n1,0,2.5\n0,1,3.75\n1,1,5\n2,2,0.125\n",
    );
    let query = ws.write("query.csv", "c1,c2\n0.3,0.4\n1.7,0.2\n");
    let out_path = ws.arg("p.csv");
    let out = run(&[
        "predict", "--train", &train, "--query", &query, "--out", &out_path,
        "--nb", "4", "--seed", "11",
    ]);
    assert_code(&out, 0);

    // parse the emitted file and re-format every float with the same
    // canonical formatting; the bytes must match
    let text = fs::read_to_string(&out_path).unwrap();
    let mut reemitted = String::new();
    for line in text.lines() {
        if line.starts_with('#') || line == "c1,c2,mean,std" {
            reemitted.push_str(line);
        } else {
            let fields: Vec<String> = line
                .split(',')
                .map(|f| format!("{}", f.parse::<f64>().unwrap()))
                .collect();
            reemitted.push_str(&fields.join(","));
        }
        reemitted.push('\n');
    }
    assert_eq!(text, reemitted);
}

#[test]
fn thread_cap_does_not_change_results() {
    let ws = Workspace::new();
    let mut train = String::from("c1,c2,value\n");
    for i in 0..60 {
        let x = (i % 8) as f64 * 1.3;
        let y = (i / 8) as f64 * 1.1;
        train.push_str(&format!("{x},{y},{}\n", (x * 0.7).sin() * 10.0 + y));
    }
    let mut query = String::from("c1,c2\n");
    for i in 0..35 {
        query.push_str(&format!("{},{}\n", (i % 7) as f64 + 0.4, (i / 7) as f64 + 0.6));
    }
    let train = ws.write("train.csv", &train);
    let query = ws.write("query.csv", &query);

    let mut outputs = Vec::new();
    for (threads, name) in [("1", "t1.csv"), ("2", "t2.csv"), ("8", "t8.csv")] {
        let out = run(&[
            "predict", "--train", &train, "--query", &query, "--out", &ws.arg(name),
            "--seed", "5", "--threads", threads,
        ]);
        assert_code(&out, 0);
        outputs.push(data_lines(&ws.path(name)));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}
