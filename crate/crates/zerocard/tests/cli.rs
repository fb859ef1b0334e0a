// Copyright 2026 The Zerocard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! The binary driven end to end on the bundled fixture corpus.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn zerocard(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerocard"))
        .current_dir(crate_dir())
        .env("ZEROCARD_CONFIG", crate_dir().join("fixtures/config.json"))
        .args(args)
        .args(["--embeddings", out_dir.join("emb.zcemb").to_str().unwrap()])
        .args(["--model", out_dir.join("model.zcmdl").to_str().unwrap()])
        .args([
            "--workload",
            out_dir.join("workload.jsonl").to_str().unwrap(),
        ])
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn pipeline(dir: &Path) {
    ok(zerocard(&["embed-stub"], dir));
    ok(zerocard(&["gen-queries"], dir));
    ok(zerocard(&["train"], dir));
}

#[test]
fn fixture_pipeline_reports_no_zerocard_failures() {
    let dir = tempfile::tempdir().unwrap();
    let manifest: Value = serde_json::from_str(&ok(zerocard(&["ingest"], dir.path()))).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 3);
    pipeline(dir.path());
    let report = dir.path().join("report.json");
    let table = ok(zerocard(
        &["eval", "--out", report.to_str().unwrap()],
        dir.path(),
    ));
    assert!(table.lines().next().unwrap().starts_with("method"));
    let set: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let reports = set["reports"].as_array().unwrap();
    let methods: Vec<&str> = reports
        .iter()
        .map(|r| r["method"].as_str().unwrap())
        .collect();
    assert_eq!(methods, ["zerocard", "avi", "ebo", "minsel", "sample"]);
    assert_eq!(reports[0]["failure_rate"], 0.0);
    assert!(dir.path().join("report.txt").is_file());
}

#[test]
fn estimate_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());

    let q = r#"{"table_id":"orders","predicates":[{"column":"price","op":"<","value":30.0}]}"#;
    let v: Value = serde_json::from_str(&ok(zerocard(&["estimate", q], dir.path()))).unwrap();
    let est = v["estimate"].as_u64().unwrap();
    assert!((1..=200).contains(&est));
    assert_eq!(v["method"], "zerocard");

    let v: Value = serde_json::from_str(&ok(zerocard(
        &["estimate", "--method", "minsel", q],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(v["method"], "minsel");

    let bad = r#"{"table_id":"orders","predicates":[{"column":"colour","op":"=","value":"red"}]}"#;
    let out = zerocard(&["estimate", bad], dir.path());
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "UnknownColumn");

    let out = Command::new(env!("CARGO_BIN_EXE_zerocard"))
        .current_dir(crate_dir())
        .env("ZEROCARD_CONFIG", crate_dir().join("fixtures/config.json"))
        .args(["estimate", q, "--model", "/nonexistent/model.zcmdl"])
        .args([
            "--embeddings",
            dir.path().join("emb.zcemb").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "FileNotFound");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_zerocard"))
        .env("ZEROCARD_CONFIG", "/nonexistent/config.json")
        .arg("ingest")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "FileNotFound");

    let out = Command::new(env!("CARGO_BIN_EXE_zerocard"))
        .env_remove("ZEROCARD_CONFIG")
        .arg("ingest")
        .output()
        .unwrap();
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ConfigError");
}

#[test]
fn serve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let mut child = Command::new(env!("CARGO_BIN_EXE_zerocard"))
        .current_dir(crate_dir())
        .env("ZEROCARD_CONFIG", crate_dir().join("fixtures/config.json"))
        .args(["serve", "--port", "0"])
        .args([
            "--embeddings",
            dir.path().join("emb.zcemb").to_str().unwrap(),
        ])
        .args(["--model", dir.path().join("model.zcmdl").to_str().unwrap()])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let ready: Value = serde_json::from_str(&line).unwrap();
    let addr = ready["listening"].as_str().unwrap().to_string();

    let answers: Vec<Value> = (0..2)
        .map(|_| {
            let mut stream = TcpStream::connect(&addr).unwrap();
            stream
                .write_all(b"{\"table_id\":\"customers\",\"predicates\":[{\"column\":\"age\",\"op\":\">\",\"value\":30},{\"column\":\"city\",\"op\":\"=\",\"value\":\"Oslo\"}]}\n")
                .unwrap();
            let mut reply = String::new();
            BufReader::new(stream).read_line(&mut reply).unwrap();
            serde_json::from_str(&reply).unwrap()
        })
        .collect();
    child.kill().unwrap();
    child.wait().unwrap();
    for a in answers {
        assert_eq!(a["method"], "zerocard");
        let est = a["estimate"].as_u64().unwrap();
        assert!((1..=120).contains(&est), "{a}");
    }
}
