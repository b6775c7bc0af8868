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


//! `pam`: permutation-aware mapping from the command line.
//!
//! Every flag can also be set through an environment variable named
//! `PAMC_<FLAG>`, e.g. `PAMC_SEED=3` or `PAMC_CACHE_DIR=/tmp/tables`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pam_cli::bench::{long_suite, mode_means, run_suite, soft_expectation, write_csv, BenchOptions, Suite};
use pam_cli::inputs::{load_circuit, load_coupling, load_target, topology_by_name};
use pam_cli::synth::{run_synth, SynthMode};
use pam_cli::EXIT_VERIFY_FAILED;
use pam_core::circuit::emit_qasm;
use pam_core::pam::{compile, CompileMode, CompileOptions, SweepConfig};
use pam_core::synthesis::SynthesisConfig;
use pam_core::verify::{verify, DEFAULT_THRESHOLD};

#[derive(Parser)]
#[command(name = "pam", version, about = "Permutation-aware qubit mapping and synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map a QASM circuit onto a coupling graph.
    Compile(CompileArgs),
    /// Synthesize a small unitary on a sub-topology.
    Synth(SynthArgs),
    /// Run a benchmark suite and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthOverrides {
    /// Random restarts per instantiation.
    #[arg(long, env = "PAMC_MULTISTARTS", default_value_t = 4)]
    multistarts: usize,
    /// Give up beyond this many CNOTs.
    #[arg(long, env = "PAMC_MAX_CNOTS", default_value_t = 20)]
    max_cnots: usize,
    /// Instantiation cost counted as a success.
    #[arg(long, env = "PAMC_SUCCESS_THRESHOLD", default_value_t = 1e-10)]
    success_threshold: f64,
    #[arg(long, env = "PAMC_SYNTH_SEED", default_value_t = 0)]
    synth_seed: u64,
}

impl SynthOverrides {
    fn config(&self) -> SynthesisConfig {
        SynthesisConfig {
            multistarts: self.multistarts,
            max_cnots: self.max_cnots,
            success_threshold: self.success_threshold,
            seed: self.synth_seed,
            ..SynthesisConfig::default()
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    /// Input QASM file.
    #[arg(value_name = "INPUT", required_unless_present = "input", conflicts_with = "input")]
    positional: Option<PathBuf>,
    #[arg(long, env = "PAMC_INPUT")]
    input: Option<PathBuf>,
    /// Preset (line-N, ring-N, grid-RxC, complete-N, heavy-hex-27) or file.
    #[arg(long, env = "PAMC_COUPLING")]
    coupling: String,
    /// Block width.
    #[arg(long, env = "PAMC_K", default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
    k: u8,
    #[arg(long, env = "PAMC_MODE", default_value = "sequential_both")]
    mode: CompileMode,
    #[arg(long, env = "PAMC_SEED", default_value_t = 0)]
    seed: u64,
    /// Skip the final resynthesis pass.
    #[arg(long, env = "PAMC_NO_ABSORB")]
    no_absorb: bool,
    /// Directory for persisted synthesis tables.
    #[arg(long, env = "PAMC_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Compiled QASM [default: <input stem>.mapped.qasm].
    #[arg(long, env = "PAMC_OUT")]
    out: Option<PathBuf>,
    /// Sidecar JSON [default: <out stem>.sidecar.json].
    #[arg(long, env = "PAMC_SIDECAR")]
    sidecar: Option<PathBuf>,
    /// Verification report JSON [default: <out stem>.verify.json].
    #[arg(long, env = "PAMC_REPORT")]
    report: Option<PathBuf>,
    #[arg(long, env = "PAMC_VERIFY_THRESHOLD", default_value_t = DEFAULT_THRESHOLD)]
    verify_threshold: f64,
    /// Append SWAPs that return every qubit to its initial position.
    #[arg(long, env = "PAMC_RESTORE_FINAL")]
    restore_final: bool,
    #[command(flatten)]
    synth: SynthOverrides,
}

#[derive(Args)]
struct SynthArgs {
    /// Built-in target name, QASM file, or JSON matrix file.
    target: String,
    /// path, path-mid0..2, triangle, edge, single or complete.
    #[arg(long, env = "PAMC_TOPOLOGY", default_value = "path")]
    topology: String,
    #[arg(long, env = "PAMC_MODE", default_value = "fullpas")]
    mode: SynthMode,
    /// Write the circuit here as QASM.
    #[arg(long, env = "PAMC_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "PAMC_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    synth: SynthOverrides,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite JSON: {"entries": [{"benchmark", "coupling", "modes"}], "seeds"}.
    #[arg(required_unless_present = "long")]
    suite: Option<PathBuf>,
    /// Run the built-in long suite instead.
    #[arg(long, env = "PAMC_LONG", conflicts_with = "suite")]
    long: bool,
    /// CSV destination [default: stdout].
    #[arg(long, env = "PAMC_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "PAMC_K", default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
    k: u8,
    #[arg(long, env = "PAMC_NO_ABSORB")]
    no_absorb: bool,
    #[arg(long, env = "PAMC_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, env = "PAMC_VERIFY_THRESHOLD", default_value_t = DEFAULT_THRESHOLD)]
    verify_threshold: f64,
    #[command(flatten)]
    synth: SynthOverrides,
}

/// Distinguishes a completed run whose output failed verification.
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn main() -> ExitCode {
    // Usage errors exit 1 so that 2 always means a failed verification.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<VerificationFailed>().is_some() {
                ExitCode::from(EXIT_VERIFY_FAILED as u8)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let stem = stem.strip_suffix(".mapped").unwrap_or(&stem);
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_compile(a: CompileArgs) -> Result<()> {
    let input = a.input.or(a.positional).expect("clap requires an input");
    let circuit = load_circuit(&input)?;
    let g = load_coupling(&a.coupling)?;
    let sweep = SweepConfig {
        seed: a.seed,
        ..SweepConfig::default()
    };
    let opts = CompileOptions {
        mode: a.mode,
        k: a.k as usize,
        absorb: !a.no_absorb,
        cache_dir: a.cache_dir,
    };
    let mut result = compile(&circuit, &g, &sweep, &a.synth.config(), &opts)
        .with_context(|| format!("compiling {}", input.display()))?;
    if a.restore_final {
        result = result.with_restoring_swaps(&g);
    }

    let out = a.out.unwrap_or_else(|| with_suffix(&input, ".mapped.qasm"));
    let sidecar = a.sidecar.unwrap_or_else(|| with_suffix(&out, ".sidecar.json"));
    let report_path = a.report.unwrap_or_else(|| with_suffix(&out, ".verify.json"));
    write(&out, &emit_qasm(&result.circuit.with_swaps_decomposed())?)?;
    let summary = serde_json::to_string_pretty(&result.sidecar())?;
    write(&sidecar, &summary)?;
    let report = verify(&circuit, &result, a.verify_threshold)?;
    write(&report_path, &serde_json::to_string_pretty(&report)?)?;
    println!("{summary}");

    if !result.is_legal(&g) {
        bail!(VerificationFailed("compiled circuit uses a non-edge".into()));
    }
    if !report.passed {
        bail!(VerificationFailed(format!(
            "verification error {:e} exceeds {:e}",
            report.hs_error, a.verify_threshold
        )));
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let target = load_target(&a.target)?;
    let width = target.nrows().trailing_zeros() as usize;
    let topo = topology_by_name(&a.topology, width)?;
    let cfg = SynthesisConfig {
        seed: a.seed,
        ..a.synth.config()
    };
    let report = run_synth(&target, &topo, a.mode, &cfg).with_context(|| format!("synthesizing {}", a.target))?;
    if let Some(out) = &a.out {
        write(out, &emit_qasm(&report.circuit)?)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let (suite, base) = match &a.suite {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (Suite::from_json(&text)?, path.parent().map(Path::to_path_buf))
        }
        None => (long_suite(), None),
    };
    // Rows share one table cache; without a directory, use a scratch one.
    let scratch = std::env::temp_dir().join(format!("pam-bench-{}", std::process::id()));
    let opts = BenchOptions {
        k: a.k as usize,
        absorb: !a.no_absorb,
        cache_dir: Some(a.cache_dir.clone().unwrap_or_else(|| scratch.clone())),
        verify_threshold: a.verify_threshold,
        sweep: SweepConfig::default(),
        synthesis: a.synth.config(),
    };
    let rows = run_suite(&suite, base.as_deref(), &opts);
    if a.cache_dir.is_none() {
        let _ = fs::remove_dir_all(&scratch);
    }
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, f)?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    for r in rows.iter().filter(|r| r.verified.starts_with("error")) {
        eprintln!("{} {}: {}", r.benchmark, r.mode, r.verified);
    }
    if a.long {
        let means = mode_means(&rows);
        for (mode, mean) in &means {
            eprintln!("mean cnot_count {mode:<16} {mean:.2}");
        }
        match soft_expectation(&means) {
            Some(true) => eprintln!("sequential_both <= synth_no_perm <= sabre_baseline: holds"),
            Some(false) => eprintln!("sequential_both <= synth_no_perm <= sabre_baseline: does not hold"),
            None => eprintln!("sequential_both <= synth_no_perm <= sabre_baseline: not enough rows"),
        }
    }
    Ok(())
}
