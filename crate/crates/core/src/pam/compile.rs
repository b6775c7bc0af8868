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

//! Layout, routing, absorption and the mode-selectable pipeline.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{sweep, BlockSource};
use super::{MappingState, PamError, PermutationMode, SweepConfig};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::partition::{gate_blocks, quick_partition, Block, PartitionedCircuit};
use crate::synthesis::{qsearch, PermutationScope, SynthesisConfig, SynthesisTable, TableCache};
use crate::topology::{feasible_subtopologies, CouplingGraph, DistanceMatrix};

/// Pipeline variants, from plain gate-level routing to full
/// permutation-aware mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileMode {
    /// One block per gate, literal gates, no synthesis.
    SabreBaseline,
    /// Partitioned blocks routed with their literal gates.
    BlockOnly,
    /// Synthesized blocks, no permutation freedom.
    SynthNoPerm,
    InputOnly,
    OutputOnly,
    SequentialBoth,
}

impl CompileMode {
    pub const ALL: [CompileMode; 6] = [
        CompileMode::SabreBaseline,
        CompileMode::BlockOnly,
        CompileMode::SynthNoPerm,
        CompileMode::InputOnly,
        CompileMode::OutputOnly,
        CompileMode::SequentialBoth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompileMode::SabreBaseline => "sabre_baseline",
            CompileMode::BlockOnly => "block_only",
            CompileMode::SynthNoPerm => "synth_no_perm",
            CompileMode::InputOnly => "input_only",
            CompileMode::OutputOnly => "output_only",
            CompileMode::SequentialBoth => "sequential_both",
        }
    }

    pub fn uses_synthesis(self) -> bool {
        !matches!(self, CompileMode::SabreBaseline | CompileMode::BlockOnly)
    }

    pub fn permutation_mode(self) -> PermutationMode {
        match self {
            CompileMode::SabreBaseline | CompileMode::BlockOnly | CompileMode::SynthNoPerm => {
                PermutationMode::None
            }
            CompileMode::InputOnly => PermutationMode::InputOnly,
            CompileMode::OutputOnly => PermutationMode::OutputOnly,
            CompileMode::SequentialBoth => PermutationMode::SequentialBoth,
        }
    }
}

impl fmt::Display for CompileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for CompileMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CompileMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    pub mode: CompileMode,
    pub k: usize,
    pub absorb: bool,
    pub cache_dir: Option<PathBuf>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            mode: CompileMode::SequentialBoth,
            k: 3,
            absorb: true,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledResult {
    /// Circuit over all physical qubits. SWAPs stay whole; `cnot_count`
    /// counts each as three CNOTs.
    pub circuit: Circuit,
    pub initial_layout: MappingState,
    pub final_mapping: MappingState,
    pub swap_count: usize,
    pub cnot_count: usize,
    pub wall_ms: u64,
    pub mode: CompileMode,
    pub seed: u64,
    /// HS distance of every synthesized piece against its target.
    pub block_errors: Vec<f64>,
    pub restriction_violations: usize,
}

/// JSON summary written next to the compiled circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub initial_layout: Vec<usize>,
    pub final_mapping: Vec<usize>,
    pub swap_count: usize,
    pub cnot_count: usize,
    pub mode: String,
    pub seed: u64,
    pub wall_ms: u64,
}

impl CompiledResult {
    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            initial_layout: self.initial_layout.layout(),
            final_mapping: self.final_mapping.layout(),
            swap_count: self.swap_count,
            cnot_count: self.cnot_count,
            mode: self.mode.to_string(),
            seed: self.seed,
            wall_ms: self.wall_ms,
        }
    }

    /// Every two-qubit gate acts on a coupling edge.
    pub fn is_legal(&self, g: &CouplingGraph) -> bool {
        self.circuit
            .gates()
            .iter()
            .filter(|gate| gate.arity() >= 2)
            .all(|gate| gate.arity() == 2 && g.has_edge(gate.qubits()[0], gate.qubits()[1]))
    }

    /// Appends SWAPs that return every qubit to its initial position, so
    /// the circuit alone implements the logical unitary on the initial
    /// layout.
    pub fn with_restoring_swaps(&self, g: &CouplingGraph) -> CompiledResult {
        let mut out = self.clone();
        let n = g.num_physical();
        // BFS spanning tree; reverse BFS order peels leaves.
        let mut parent = vec![usize::MAX; n];
        let mut order = vec![0usize];
        parent[0] = 0;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            for &v in g.neighbors(u) {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    order.push(v);
                }
            }
            i += 1;
        }
        let depth = {
            let mut depth = vec![0usize; n];
            for &u in &order[1..] {
                depth[u] = depth[parent[u]] + 1;
            }
            depth
        };
        let mut cur = self.final_mapping.clone();
        for &v in order.iter().rev() {
            let want = self.initial_layout.label_at(v);
            let mut u = cur.phys(want);
            if u == v {
                continue;
            }
            // Tree path u -> v through their lowest common ancestor.
            let (mut a, mut b) = (u, v);
            let mut up = vec![a];
            let mut down = vec![b];
            while a != b {
                if depth[a] >= depth[b] {
                    a = parent[a];
                    up.push(a);
                } else {
                    b = parent[b];
                    down.push(b);
                }
            }
            down.pop();
            up.extend(down.into_iter().rev());
            for &w in &up[1..] {
                out.circuit.push(Gate::swap(u, w)).expect("in range");
                cur.swap_physical(u, w);
                out.swap_count += 1;
                u = w;
            }
        }
        out.final_mapping = cur;
        out.cnot_count = out.circuit.cnot_count();
        out
    }
}

fn reversed_source<'a>(source: BlockSource<'a>, len: usize) -> BlockSource<'a> {
    match source {
        BlockSource::Table(t) => BlockSource::Reversed(t, len),
        BlockSource::Reversed(t, _) => BlockSource::Table(t),
        BlockSource::Literal => BlockSource::Literal,
    }
}

/// Seeded random start refined by forward and backward sweeps.
pub fn layout(
    pc: &PartitionedCircuit,
    source: BlockSource<'_>,
    d: &DistanceMatrix,
    g: &CouplingGraph,
    cfg: &SweepConfig,
) -> Result<MappingState, PamError> {
    let mut pi = MappingState::random(pc.num_qubits(), g.num_physical(), cfg.seed);
    if cfg.layout_passes == 0 {
        return Ok(pi);
    }
    let rev = pc.reversed();
    let rev_source = reversed_source(source, pc.len());
    for _ in 0..cfg.layout_passes {
        pi = sweep(pc, &pi, source, d, g, cfg, false)?.final_mapping;
        pi = sweep(&rev, &pi, rev_source, d, g, cfg, false)?.final_mapping;
    }
    Ok(pi)
}

/// One emitting forward sweep from `pi0`.
#[allow(clippy::too_many_arguments)]
pub fn route(
    pc: &PartitionedCircuit,
    pi0: &MappingState,
    source: BlockSource<'_>,
    d: &DistanceMatrix,
    g: &CouplingGraph,
    cfg: &SweepConfig,
    mode: CompileMode,
) -> Result<CompiledResult, PamError> {
    let out = sweep(pc, pi0, source, d, g, cfg, true)?;
    Ok(CompiledResult {
        cnot_count: out.circuit.cnot_count(),
        circuit: out.circuit,
        initial_layout: out.initial_mapping,
        final_mapping: out.final_mapping,
        swap_count: out.swap_count,
        wall_ms: 0,
        mode,
        seed: cfg.seed,
        block_errors: out.block_errors,
        restriction_violations: out.restriction_violations,
    })
}

/// Repartitions the physical circuit, SWAPs included, and replaces each
/// block by a fresh synthesis on its physical sub-topology when that has
/// strictly fewer CNOTs.
pub fn absorb(
    result: &CompiledResult,
    g: &CouplingGraph,
    k: usize,
    syn_cfg: &SynthesisConfig,
) -> CompiledResult {
    let pc = quick_partition(&result.circuit, k);
    let replaced: Vec<(Block, Option<f64>)> = pc
        .blocks()
        .par_iter()
        .map(|b| match resynthesize_physical(b, g, syn_cfg) {
            Some((gates, distance)) => (Block { gates, ..b.clone() }, Some(distance)),
            None => (b.clone(), None),
        })
        .collect();
    let mut out = result.clone();
    out.block_errors
        .extend(replaced.iter().filter_map(|(_, d)| *d));
    let blocks = replaced.into_iter().map(|(b, _)| b).collect();
    out.circuit = PartitionedCircuit::from_blocks(result.circuit.num_qubits(), blocks).to_circuit();
    out.cnot_count = out.circuit.cnot_count();
    out
}

fn resynthesize_physical(b: &Block, g: &CouplingGraph, syn_cfg: &SynthesisConfig) -> Option<(Circuit, f64)> {
    let old = b.cnot_count();
    if b.width() < 2 || old == 0 {
        return None;
    }
    if b.gates.gates().iter().any(|gate| matches!(gate.kind(), GateKind::Opaque { .. })) {
        return None;
    }
    let topo = g.induced_subtopology(&b.qubits).ok()?;
    let cfg = SynthesisConfig {
        max_cnots: old - 1,
        ..syn_cfg.clone()
    };
    let found = qsearch(&b.unitary(), &topo, &cfg).ok()?;
    (found.cnot_count() < old).then_some((found.circuit, found.distance))
}

/// Partition, build the synthesis table, lay out, route and absorb as
/// selected by `opts.mode`.
pub fn compile(
    c: &Circuit,
    g: &CouplingGraph,
    sweep_cfg: &SweepConfig,
    syn_cfg: &SynthesisConfig,
    opts: &CompileOptions,
) -> Result<CompiledResult, PamError> {
    let start = Instant::now();
    if c.num_qubits() > g.num_physical() {
        return Err(PamError::TooManyLogical {
            logical: c.num_qubits(),
            physical: g.num_physical(),
        });
    }
    if !(2..=3).contains(&opts.k) {
        return Err(PamError::BlockWidth(opts.k));
    }
    let d = g.distance_matrix();
    let cfg = SweepConfig {
        permutation_mode: opts.mode.permutation_mode(),
        ..sweep_cfg.clone()
    };
    let pc = match opts.mode {
        CompileMode::SabreBaseline => gate_blocks(c),
        _ => quick_partition(c, opts.k),
    };
    let table = if opts.mode.uses_synthesis() {
        let mut feas = feasible_subtopologies(g, 2);
        if opts.k == 3 {
            feas.extend(feasible_subtopologies(g, 3));
        }
        let scope = match opts.mode {
            CompileMode::SynthNoPerm => PermutationScope::Relabel,
            _ => PermutationScope::Full,
        };
        let cache = opts.cache_dir.as_ref().map(TableCache::new);
        Some(SynthesisTable::build(&pc, &feas, scope, syn_cfg, cache.as_ref())?.0)
    } else {
        None
    };
    let source = table.as_ref().map_or(BlockSource::Literal, BlockSource::Table);
    let pi0 = layout(&pc, source, &d, g, &cfg)?;
    let mut result = route(&pc, &pi0, source, &d, g, &cfg, opts.mode)?;
    if opts.absorb && opts.mode.uses_synthesis() {
        result = absorb(&result, g, opts.k, syn_cfg);
    }
    result.wall_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip() {
        for m in CompileMode::ALL {
            assert_eq!(m.as_str().parse::<CompileMode>().unwrap(), m);
        }
        assert!("qsearch".parse::<CompileMode>().is_err());
    }

    #[test]
    fn layout_with_no_passes_is_the_seeded_start() {
        let c = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap();
        let g = CouplingGraph::line(4);
        let d = g.distance_matrix();
        let pc = quick_partition(&c, 2);
        let cfg = SweepConfig {
            layout_passes: 0,
            seed: 5,
            ..SweepConfig::default()
        };
        let pi = layout(&pc, BlockSource::Literal, &d, &g, &cfg).unwrap();
        assert_eq!(pi, MappingState::random(3, 4, 5));
        let cfg2 = SweepConfig { layout_passes: 2, ..cfg };
        assert_eq!(
            layout(&pc, BlockSource::Literal, &d, &g, &cfg2).unwrap(),
            layout(&pc, BlockSource::Literal, &d, &g, &cfg2).unwrap()
        );
    }

    #[test]
    fn restoring_swaps_undo_the_final_permutation() {
        let g = CouplingGraph::grid(2, 3);
        let mut r = CompiledResult {
            circuit: Circuit::new(6),
            initial_layout: MappingState::from_layout(&[0, 4, 2], 6).unwrap(),
            final_mapping: MappingState::from_layout(&[5, 1, 3], 6).unwrap(),
            swap_count: 0,
            cnot_count: 0,
            wall_ms: 0,
            mode: CompileMode::SabreBaseline,
            seed: 0,
            block_errors: vec![],
            restriction_violations: 0,
        };
        r.final_mapping.swap_physical(0, 1);
        let fixed = r.with_restoring_swaps(&g);
        assert_eq!(fixed.final_mapping.full_layout(), fixed.initial_layout.full_layout());
        assert!(fixed.is_legal(&g));
    }
}
