// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.


use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pam_core::circuit::emit_qasm;
use pam_core::targets;
use serde_json::Value;

fn pam(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(args)
        .current_dir(dir)
        .env_remove("PAMC_MODE")
        .env_remove("PAMC_SEED")
        .output()
        .expect("binary runs")
}

fn write_target(dir: &Path, name: &str) {
    let c = targets::by_name(name).unwrap();
    fs::write(dir.join(format!("{name}.qasm")), emit_qasm(&c).unwrap()).unwrap();
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn compile_qft3_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_target(dir.path(), "qft3");
    let out = pam(&["compile", "qft3.qasm", "--coupling", "line-3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar = json(&dir.path().join("qft3.sidecar.json"));
    assert!(sidecar["cnot_count"].as_u64().unwrap() <= 6);
    assert_eq!(sidecar["mode"], "sequential_both");
    let report = json(&dir.path().join("qft3.verify.json"));
    assert_eq!(report["passed"], true);
    let qasm = fs::read_to_string(dir.path().join("qft3.mapped.qasm")).unwrap();
    assert!(qasm.starts_with("OPENQASM 2.0;"));
    assert!(!qasm.contains("swap"));
}

#[test]
fn missing_input_exits_one_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = pam(&["compile", "--input", "absent/circuit.qasm", "--coupling", "line-3"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent/circuit.qasm"));
}

#[test]
fn sabre_mode_is_recorded_in_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    write_target(dir.path(), "qft3");
    let out = pam(
        &["compile", "qft3.qasm", "--coupling", "line-3", "--mode", "sabre_baseline", "--sidecar", "s.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("s.json"))["mode"], "sabre_baseline");
}

#[test]
fn mode_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_target(dir.path(), "qft3");
    let out = Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(["compile", "qft3.qasm", "--coupling", "line-3"])
        .env("PAMC_MODE", "block_only")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["mode"], "block_only");
}

#[test]
fn failed_verification_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write_target(dir.path(), "qft3");
    let out = pam(
        &["compile", "qft3.qasm", "--coupling", "line-3", "--mode", "block_only", "--verify-threshold=-1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("qft3.mapped.qasm").exists());
}

#[test]
fn rejects_block_width_four() {
    let dir = tempfile::tempdir().unwrap();
    write_target(dir.path(), "qft3");
    let out = pam(&["compile", "qft3.qasm", "--coupling", "line-3", "--k", "4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_swap_needs_no_cnots() {
    let dir = tempfile::tempdir().unwrap();
    let out = pam(&["synth", "swap2", "--mode", "fullpas", "--out", "swap.qasm"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["cnot_count"], 0);
    assert_eq!(v["p_out"], serde_json::json!([1, 0]));
    assert_eq!(v["calls"], 4);
    assert!(dir.path().join("swap.qasm").exists());
}

#[test]
fn synth_qft3_on_path_with_fullpas() {
    let dir = tempfile::tempdir().unwrap();
    let out = pam(&["synth", "qft3", "--topology", "path", "--mode", "fullpas"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["cnot_count"], 5);
    assert!(v["distance"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn synth_rejects_mismatched_topology() {
    let dir = tempfile::tempdir().unwrap();
    let out = pam(&["synth", "swap2", "--topology", "triangle"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn bench_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = r#"{"entries": [
        {"benchmark": "qft3", "coupling": "line-3", "modes": ["qsearch", "fullpas"]},
        {"benchmark": "ccx", "coupling": "line-3", "modes": ["qsearch", "fullpas"]}
    ]}"#;
    fs::write(dir.path().join("suite.json"), suite).unwrap();
    let out = pam(&["bench", "suite.json", "--out", "report.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "benchmark,mode,cnot_count,swap_count,depth,communication_before,communication_after,wall_ms,verified"
    );
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    let cnots = |bench: &str, mode: &str| -> u64 {
        rows.iter().find(|r| r[0] == bench && r[1] == mode).unwrap()[2].parse().unwrap()
    };
    assert!(cnots("qft3", "fullpas") <= cnots("qft3", "qsearch"));
    assert!(cnots("ccx", "fullpas") <= cnots("ccx", "qsearch"));
    for r in &rows {
        assert_eq!(r[8], "true");
        assert_eq!(r[5], "1.0");
        assert!(!r[6].is_empty());
    }
}

#[test]
fn bench_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let suite = r#"{"entries": [
        {"benchmark": "missing.qasm", "coupling": "line-3", "modes": ["sabre_baseline"]},
        {"benchmark": "swap2", "coupling": "line-2", "modes": ["qsearch"]}
    ]}"#;
    fs::write(dir.path().join("suite.json"), suite).unwrap();
    let out = pam(&["bench", "suite.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    assert!(rows[0][8].starts_with("error"));
    assert_eq!(rows[1][2], "3");
}

#[test]
fn bench_is_deterministic_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let suite = r#"{"seeds": [1, 2], "entries": [
        {"benchmark": "qft4", "coupling": "ring-4", "modes": ["sabre_baseline", "synth_no_perm"]}
    ]}"#;
    fs::write(dir.path().join("suite.json"), suite).unwrap();
    let run = || {
        let out = pam(&["bench", "suite.json", "--cache-dir", "tables"], dir.path());
        assert_eq!(out.status.code(), Some(0));
        data_rows(&String::from_utf8(out.stdout).unwrap())
            .into_iter()
            .map(|mut r| {
                r[7].clear();
                r
            })
            .collect::<Vec<_>>()
    };
    let first = run();
    assert_eq!(first.len(), 4);
    assert_eq!(first[0][0], "qft4/s1");
    assert_eq!(first, run());
}
