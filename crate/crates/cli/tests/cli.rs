use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use qgz3_core::{Generator, RegularizedRep, RepLabel, RootOfUnity};

fn qgz3(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qgz3"));
    c.args(args);
    match threads {
        Some(t) => c.env("QGZ3_THREADS", t),
        None => c.env_remove("QGZ3_THREADS"),
    };
    c.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn write_to(dir: &Path, name: &str, args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", &p]);
    let out = qgz3(&full, threads);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read(&path).unwrap()
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["build", "--rep", "8,4,0", "--l", "5"][..],
        &["export", "--rep", "5,2,0", "--l", "3"][..],
        &["build", "--rep", "6,3,0"][..],
    ] {
        let a = write_to(dir.path(), "a.json", args, None);
        let b = write_to(dir.path(), "b.json", args, Some("1"));
        let c = write_to(dir.path(), "c.json", args, Some("3"));
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a, c, "{args:?}");
    }
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 3, "temporary files left behind: {names:?}");
}

#[test]
fn entries_round_trip_exactly() {
    let out = qgz3(&["build", "--rep", "5,2,0", "--l", "3"], None);
    let doc = json(&out);
    assert_eq!(doc["schema"], "qgz3/1");
    let rep = RegularizedRep::build(
        &RepLabel::new(5, 2, 0).unwrap(),
        RootOfUnity::new(3, 1).unwrap(),
    )
    .unwrap();
    let ops = doc["report"]["operators"].as_array().unwrap();
    assert_eq!(ops.len(), 6);
    for (g, op) in Generator::ALL.iter().zip(ops) {
        assert_eq!(op["name"], g.name());
        let parsed: Vec<(usize, usize, [f64; 2])> =
            serde_json::from_value(op["entries"].clone()).unwrap();
        let want = rep.ops.get(*g).entries();
        assert_eq!(parsed.len(), want.len());
        let mut prev = None;
        for ((r, c, v), (wr, wc, wv)) in parsed.iter().zip(&want) {
            assert_eq!((r, c), (wr, wc));
            assert_eq!(v[0].to_bits(), (wv.re + 0.0).to_bits());
            assert_eq!(v[1].to_bits(), (wv.im + 0.0).to_bits());
            assert!(prev < Some((*r, *c)));
            prev = Some((*r, *c));
        }
    }
    assert_eq!(ops[0]["entries"].as_array().unwrap().len(), 15);
}

#[test]
fn floats_use_17_significant_digits() {
    let out = String::from_utf8(qgz3(&["build", "--rep", "3,1,0"], None).stdout).unwrap();
    assert!(out.contains("e0,"), "{out}");
    for tok in out
        .split(['[', ']', ',', ':'])
        .filter(|t| t.contains('e') && t.contains('.'))
    {
        let mantissa = tok.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{tok}");
    }
}

#[test]
fn analyze_examples() {
    let out = qgz3(&["analyze", "--rep", "4,2,0", "--l", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["report"]["quotientDimension"], 7);
    assert_eq!(doc["report"]["subrepDimension"], 1);
    let out = qgz3(&["analyze", "--rep", "2,1,0"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["dimension"], 1);
}

#[test]
fn plotdata_rows_match_dimension() {
    for (rep, l, dim) in [("5,2,0", "3", 15), ("8,4,0", "5", 64), ("4,2,0", "3", 8)] {
        let out = qgz3(
            &["plotdata", "--rep", rep, "--l", l, "--format", "csv"],
            None,
        );
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), dim);
        if rep == "5,2,0" {
            assert_eq!(rows.iter().filter(|r| &r[7] == "primed").count(), 4);
        }
    }
    let doc = json(&qgz3(&["plotdata", "--rep", "5,2,0"], None));
    assert_eq!(doc["report"].as_array().unwrap().len(), 15);
}

#[test]
fn verify_passes_on_examples() {
    for args in [
        &["verify", "--rep", "5,2,0", "--l", "3"][..],
        &["verify", "--rep", "5,2,0", "--l", "3", "--m", "2"][..],
        &["verify", "--rep", "6,3,0"][..],
    ] {
        let out = qgz3(args, None);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| qgz3(args, None).status.code();
    assert_eq!(code(&["analyze", "--rep", "2,2,0"]), Some(2));
    assert_eq!(code(&["analyze", "--rep", "5,2,0", "--l", "4"]), Some(2));
    assert_eq!(
        code(&["analyze", "--rep", "5,2,0", "--mode", "root"]),
        Some(2)
    );
    assert_eq!(
        code(&["build", "--rep", "5,2,0", "--l", "3", "--m", "3"]),
        Some(2)
    );
    assert_eq!(
        code(&["analyze", "--rep", "5,2,0", "--format", "csv"]),
        Some(2)
    );
    assert_eq!(code(&["build", "--rep", "5,2"]), Some(2));
    assert_eq!(
        code(&[
            "verify",
            "--rep",
            "5,2,0",
            "--l",
            "3",
            "--eps",
            "1e-3,1e-2,1e-4"
        ]),
        Some(2)
    );
    assert_eq!(
        code(&[
            "build",
            "--rep",
            "5,2,0",
            "--out",
            "/nonexistent-dir/x.json"
        ]),
        Some(3)
    );
    assert_eq!(
        code(&[
            "verify",
            "--rep",
            "5,2,0",
            "--l",
            "3",
            "--eps",
            "2e-1,1e-1,5e-2"
        ]),
        Some(1)
    );
}
