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


//! Suite runner producing one CSV row per (benchmark, mode, seed).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use pam_core::circuit::Circuit;
use pam_core::pam::{compile, CompileMode, CompileOptions, CompiledResult, SweepConfig};
use pam_core::synthesis::SynthesisConfig;
use pam_core::verify::{communication_score, verify};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inputs::{load_circuit_or_target, load_coupling};
use crate::synth::{run_synth, SynthMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    /// Built-in target name or QASM path relative to the suite file.
    pub benchmark: String,
    pub coupling: String,
    pub modes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub entries: Vec<SuiteEntry>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl Suite {
    pub fn from_json(text: &str) -> Result<Suite> {
        let suite: Suite = serde_json::from_str(text).context("parsing suite")?;
        if suite.seeds.is_empty() {
            bail!("suite lists no seeds");
        }
        for e in &suite.entries {
            for m in &e.modes {
                BenchMode::parse(m)?;
            }
        }
        Ok(suite)
    }
}

/// The opt-in long run: every instance fits in 16 qubits, each is compiled
/// in the three headline modes over five seeds.
pub fn long_suite() -> Suite {
    let modes = ["sabre_baseline", "synth_no_perm", "sequential_both"].map(String::from).to_vec();
    let entry = |benchmark: &str, coupling: &str| SuiteEntry {
        benchmark: benchmark.into(),
        coupling: coupling.into(),
        modes: modes.clone(),
    };
    Suite {
        entries: vec![
            entry("qft5", "ring-5"),
            entry("qft6", "line-6"),
            entry("qft8", "grid-2x4"),
            entry("qaoa12", "grid-3x4"),
            entry("qft10", "heavy-hex-27"),
        ],
        seeds: (0..5).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Compile(CompileMode),
    Synth(SynthMode),
}

impl BenchMode {
    pub fn parse(s: &str) -> Result<BenchMode> {
        s.parse::<CompileMode>()
            .map(BenchMode::Compile)
            .or_else(|_| s.parse::<SynthMode>().map(BenchMode::Synth))
            .map_err(|_| anyhow!("unknown bench mode `{s}`"))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BenchMode::Compile(m) => m.as_str(),
            BenchMode::Synth(m) => m.as_str(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub k: usize,
    pub absorb: bool,
    pub cache_dir: Option<PathBuf>,
    pub verify_threshold: f64,
    pub sweep: SweepConfig,
    pub synthesis: SynthesisConfig,
}

/// One CSV line. Numeric fields are empty when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub benchmark: String,
    pub mode: String,
    pub cnot_count: Option<usize>,
    pub swap_count: Option<usize>,
    pub depth: Option<usize>,
    pub communication_before: Option<f64>,
    pub communication_after: Option<f64>,
    pub wall_ms: u64,
    /// `true`, `false`, or `error: <message>`.
    pub verified: String,
}

struct Job<'a> {
    entry: &'a SuiteEntry,
    mode: BenchMode,
    seed: u64,
    label: String,
}

/// Runs every row in parallel; a failing row is recorded and the rest
/// continue. Rows come back in suite order.
pub fn run_suite(suite: &Suite, base: Option<&Path>, opts: &BenchOptions) -> Vec<Row> {
    let mut jobs = Vec::new();
    for entry in &suite.entries {
        for m in &entry.modes {
            let Ok(mode) = BenchMode::parse(m) else { continue };
            for &seed in &suite.seeds {
                let label = if suite.seeds.len() > 1 {
                    format!("{}/s{seed}", entry.benchmark)
                } else {
                    entry.benchmark.clone()
                };
                jobs.push(Job { entry, mode, seed, label });
            }
        }
    }
    jobs.par_iter()
        .map(|job| {
            let start = Instant::now();
            let row = run_row(job, base, opts);
            let wall_ms = start.elapsed().as_millis() as u64;
            row.unwrap_or_else(|e| Row {
                benchmark: job.label.clone(),
                mode: job.mode.as_str().into(),
                cnot_count: None,
                swap_count: None,
                depth: None,
                communication_before: None,
                communication_after: None,
                wall_ms,
                verified: format!("error: {e:#}"),
            })
        })
        .collect()
}

fn run_row(job: &Job<'_>, base: Option<&Path>, opts: &BenchOptions) -> Result<Row> {
    let start = Instant::now();
    let circuit = load_circuit_or_target(&job.entry.benchmark, base)?;
    let g = load_coupling(&job.entry.coupling)?;
    let before = communication_score(&circuit);
    let row = |cnots, swaps, depth, after, verified: bool| Row {
        benchmark: job.label.clone(),
        mode: job.mode.as_str().into(),
        cnot_count: Some(cnots),
        swap_count: Some(swaps),
        depth: Some(depth),
        communication_before: Some(before),
        communication_after: Some(after),
        wall_ms: start.elapsed().as_millis() as u64,
        verified: verified.to_string(),
    };
    match job.mode {
        BenchMode::Compile(mode) => {
            let sweep = SweepConfig {
                seed: job.seed,
                ..opts.sweep.clone()
            };
            let copts = CompileOptions {
                mode,
                k: opts.k,
                absorb: opts.absorb,
                cache_dir: opts.cache_dir.clone(),
            };
            let result = compile(&circuit, &g, &sweep, &opts.synthesis, &copts)?;
            let report = verify(&circuit, &result, opts.verify_threshold)?;
            Ok(row(
                result.cnot_count,
                result.swap_count,
                result.circuit.with_swaps_decomposed().depth(),
                communication_after(&result)?,
                report.passed && result.is_legal(&g),
            ))
        }
        BenchMode::Synth(mode) => {
            let n = circuit.num_qubits();
            if g.num_physical() != n {
                bail!("synthesis rows need a {n}-qubit coupling graph, got {}", g.num_physical());
            }
            let topo = g.induced_subtopology(&(0..n).collect::<Vec<_>>())?;
            let target = circuit.unitary()?;
            let cfg = SynthesisConfig {
                seed: job.seed,
                ..opts.synthesis.clone()
            };
            let report = run_synth(&target, &topo, mode, &cfg)?;
            let error = report.check(&target).unwrap_or(f64::INFINITY);
            Ok(row(
                report.cnot_count,
                0,
                report.circuit.depth(),
                communication_score(&report.circuit),
                error <= opts.verify_threshold,
            ))
        }
    }
}

/// Communication score of the compiled circuit restricted to the physical
/// qubits that carry logical data or take part in a gate.
pub fn communication_after(result: &CompiledResult) -> Result<f64> {
    let c = &result.circuit;
    let mut support: Vec<usize> = c.gates().iter().flat_map(|g| g.qubits().iter().copied()).collect();
    support.extend(result.initial_layout.layout());
    support.extend(result.final_mapping.layout());
    support.sort_unstable();
    support.dedup();
    let mut index = vec![usize::MAX; c.num_qubits()];
    for (i, &p) in support.iter().enumerate() {
        index[p] = i;
    }
    let restricted: Circuit = c.relabeled(support.len(), |q| index[q])?;
    Ok(communication_score(&restricted))
}

pub fn write_csv(rows: &[Row], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean CNOT count per mode over rows that completed.
pub fn mode_means(rows: &[Row]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows {
        if let Some(c) = r.cnot_count {
            let e = acc.entry(r.mode.clone()).or_default();
            e.0 += c as f64;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(m, (s, n))| (m, s / n as f64)).collect()
}

/// Whether `sequential_both <= synth_no_perm <= sabre_baseline` holds on
/// the per-mode means, or `None` if a mode has no completed rows.
pub fn soft_expectation(means: &BTreeMap<String, f64>) -> Option<bool> {
    let seq = means.get("sequential_both")?;
    let snp = means.get("synth_no_perm")?;
    let base = means.get("sabre_baseline")?;
    Some(seq <= snp && snp <= base)
}
