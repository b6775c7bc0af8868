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

//! The block-level circuit sweep and its scoring rules.

use std::collections::{BTreeSet, VecDeque};

use super::{MappingState, PamError, PermutationMode, SweepConfig};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::partition::{Block, PartitionedCircuit};
use crate::permutation::Permutation;
use crate::synthesis::{EntryKey, SynthesisTable};
use crate::topology::{CouplingGraph, DistanceMatrix, SubTopology};

/// Where placed blocks get their circuits.
#[derive(Debug, Clone, Copy)]
pub enum BlockSource<'a> {
    /// The block's own gates, with internal swaps where needed.
    Literal,
    /// Synthesized table entries.
    Table(&'a SynthesisTable),
    /// Costs for the reversed block list of a circuit whose table is given.
    /// Block `i` of the reversed list is block `len - 1 - i` of the
    /// original, and walking a block backwards turns the entry for
    /// `(G, A, B)` into the original entry for `(G, B^-1, A^-1)`. No
    /// circuits are available.
    Reversed(&'a SynthesisTable, usize),
}

struct Lookup<'a> {
    cnot_count: usize,
    circuit: Option<&'a Circuit>,
    distance: f64,
}

impl<'a> BlockSource<'a> {
    fn lookup(&self, block: usize, key: &EntryKey) -> Option<Lookup<'a>> {
        let (table, block, key) = match *self {
            BlockSource::Literal => return None,
            BlockSource::Table(t) => (t, block, key.clone()),
            BlockSource::Reversed(t, len) => (
                t,
                len - 1 - block,
                EntryKey::new(key.topology.clone(), key.p_out.inverse(), key.p_in.inverse()),
            ),
        };
        let e = table.get(block, &key)?;
        if e.is_failed() {
            return None;
        }
        let circuit = match self {
            BlockSource::Reversed(..) => None,
            _ => e.circuit.as_ref(),
        };
        Some(Lookup {
            cnot_count: e.cnot_count,
            circuit,
            distance: e.distance,
        })
    }
}

fn pair_sum(qubits: &[usize], pi: &MappingState, d: &DistanceMatrix) -> f64 {
    let mut s = 0u32;
    for i in 0..qubits.len() {
        for j in i + 1..qubits.len() {
            s += d.get(pi.phys(qubits[i]), pi.phys(qubits[j]));
        }
    }
    f64::from(s)
}

fn h_value(front: &[&Block], ext: &[&Block], pi: &MappingState, d: &DistanceMatrix, cfg: &SweepConfig) -> f64 {
    let f = if front.is_empty() {
        0.0
    } else {
        front.iter().map(|b| pair_sum(&b.qubits, pi, d)).sum::<f64>() / front.len() as f64
    };
    let e = if ext.is_empty() {
        0.0
    } else {
        cfg.extended_weight / ext.len() as f64
            * ext.iter().map(|b| pair_sum(&b.qubits, pi, d)).sum::<f64>()
    };
    f + e
}

/// `H = F + E`: the mean over front blocks of the summed pairwise distance
/// of their mapped qubits, plus the same sum over the extended set scaled by
/// `W_E / |E|`.
pub fn heuristic_h(
    front: &[&Block],
    ext: &[&Block],
    pi: &MappingState,
    d: &DistanceMatrix,
    cfg: &SweepConfig,
) -> Result<f64, PamError> {
    for b in front.iter().chain(ext) {
        for &q in &b.qubits {
            pi.checked_phys(q)?;
        }
    }
    Ok(h_value(front, ext, pi, d, cfg))
}

/// Breadth-first successors of the front layer, in discovery order, at most
/// `cfg.extended_size` of them.
pub fn extended_set(
    pc: &PartitionedCircuit,
    placed: &[bool],
    front: &[usize],
    cfg: &SweepConfig,
) -> Vec<usize> {
    let mut out = Vec::new();
    if cfg.extended_size == 0 {
        return out;
    }
    let mut seen: BTreeSet<usize> = front.iter().copied().collect();
    let mut queue: VecDeque<usize> = front.iter().copied().collect();
    while let Some(b) = queue.pop_front() {
        for &s in pc.successors(b) {
            if placed[s] || !seen.insert(s) {
                continue;
            }
            out.push(s);
            if out.len() == cfg.extended_size {
                return out;
            }
            queue.push_back(s);
        }
    }
    out
}

/// Coupling edges touching a front qubit, minus those joining two qubits of
/// one front block.
pub fn candidate_swaps(front: &[&Block], pi: &MappingState, g: &CouplingGraph) -> Vec<(usize, usize)> {
    let mut owner = vec![usize::MAX; g.num_physical()];
    for (i, b) in front.iter().enumerate() {
        for &q in &b.qubits {
            owner[pi.phys(q)] = i;
        }
    }
    g.edges()
        .iter()
        .copied()
        .filter(|&(p, q)| {
            let (a, b) = (owner[p], owner[q]);
            (a != usize::MAX || b != usize::MAX) && a != b
        })
        .collect()
}

/// Per-physical-qubit multiplicative penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayState {
    values: Vec<f64>,
    since_reset: usize,
}

impl DecayState {
    pub fn new(num_physical: usize) -> Self {
        DecayState {
            values: vec![1.0; num_physical],
            since_reset: 0,
        }
    }

    pub fn get(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 1.0);
        self.since_reset = 0;
    }

    /// Records a committed swap on `(p, q)`.
    pub fn commit(&mut self, p: usize, q: usize, cfg: &SweepConfig) {
        self.values[p] += cfg.decay_delta;
        self.values[q] += cfg.decay_delta;
        self.since_reset += 1;
        if cfg.decay_reset_interval > 0 && self.since_reset >= cfg.decay_reset_interval {
            self.reset();
        }
    }
}

/// Candidate minimizing `max(decay[p], decay[q]) * H` after the swap. The
/// first candidate wins ties, so callers pass them in lexicographic order.
pub fn select_swap(
    candidates: &[(usize, usize)],
    front: &[&Block],
    ext: &[&Block],
    pi: &MappingState,
    d: &DistanceMatrix,
    decay: &DecayState,
    cfg: &SweepConfig,
) -> Result<(usize, usize), PamError> {
    let mut trial = pi.clone();
    let mut best: Option<((usize, usize), f64)> = None;
    for &(p, q) in candidates {
        trial.swap_physical(p, q);
        let score = decay.get(p).max(decay.get(q)) * h_value(front, ext, &trial, d, cfg);
        trial.swap_physical(p, q);
        if best.is_none_or(|(_, s)| score < s) {
            best = Some(((p, q), score));
        }
    }
    best.map(|(e, _)| e).ok_or(PamError::NoCandidates)
}

/// Placement frame of a block: its physical qubits sorted ascending are the
/// circuit positions, and local wire `j` starts on position `rank[j]`.
struct Frame {
    sorted: Vec<usize>,
    rank: Permutation,
    topology: SubTopology,
}

fn frame(b: &Block, pi: &MappingState, g: &CouplingGraph) -> Option<Frame> {
    let phys: Vec<usize> = b.qubits.iter().map(|&q| pi.phys(q)).collect();
    let mut sorted = phys.clone();
    sorted.sort_unstable();
    let rank = Permutation::new(phys.iter().map(|p| sorted.binary_search(p).unwrap()).collect())
        .expect("distinct physical qubits");
    let topology = if b.width() == 1 {
        SubTopology::single()
    } else {
        g.induced_subtopology(&sorted).ok()?
    };
    Some(Frame {
        sorted,
        rank,
        topology,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationChoice {
    pub topology: SubTopology,
    pub p_in: Permutation,
    pub p_out: Permutation,
    pub cnot_count: usize,
    pub score: f64,
}

/// Output permutations the mode allows for a block in placement frame
/// `rank`.
fn allowed_outputs(mode: PermutationMode, rank: &Permutation) -> Vec<Permutation> {
    match mode {
        PermutationMode::None => vec![rank.clone()],
        PermutationMode::InputOnly => vec![Permutation::identity(rank.size())],
        PermutationMode::OutputOnly | PermutationMode::SequentialBoth => Permutation::all(rank.size()),
    }
}

/// Mapping after placing `b` with output permutation `p_out`: local wire
/// `j` ends on `sorted[p_out(j)]`.
fn updated_mapping(b: &Block, sorted: &[usize], p_out: &Permutation, pi: &MappingState) -> MappingState {
    let mut next = pi.clone();
    let phys: Vec<usize> = (0..b.width()).map(|j| sorted[p_out.image(j)]).collect();
    next.reassign(&b.qubits, &phys);
    next
}

/// Scores `W_P * C + H(updated mapping)` for every allowed output
/// permutation with a usable table entry. `P_i` and the sub-topology come
/// from the placement. Ties go to fewer CNOTs, then the smaller `P_o`.
#[allow(clippy::too_many_arguments)]
pub fn select_permutation(
    b: &Block,
    pi: &MappingState,
    source: BlockSource<'_>,
    front: &[&Block],
    ext: &[&Block],
    d: &DistanceMatrix,
    g: &CouplingGraph,
    cfg: &SweepConfig,
) -> Option<PermutationChoice> {
    let fr = frame(b, pi, g)?;
    let p_in = fr.rank.inverse();
    let mut best: Option<PermutationChoice> = None;
    for p_out in allowed_outputs(cfg.permutation_mode, &fr.rank) {
        let key = EntryKey::new(fr.topology.clone(), p_in.clone(), p_out.clone());
        let Some(hit) = source.lookup(b.index, &key) else {
            continue;
        };
        let next = updated_mapping(b, &fr.sorted, &p_out, pi);
        let score = cfg.perm_weight * hit.cnot_count as f64 + h_value(front, ext, &next, d, cfg);
        let better = match &best {
            None => true,
            Some(cur) => (score, hit.cnot_count) < (cur.score, cur.cnot_count),
        };
        if better {
            best = Some(PermutationChoice {
                topology: fr.topology.clone(),
                p_in: p_in.clone(),
                p_out,
                cnot_count: hit.cnot_count,
                score,
            });
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Physical circuit over all device qubits; SWAPs kept as units.
    pub circuit: Circuit,
    pub initial_mapping: MappingState,
    pub final_mapping: MappingState,
    pub swap_count: usize,
    /// HS distance of each emitted synthesized block against its target.
    pub block_errors: Vec<f64>,
    /// Committed swaps that exchanged two qubits of one front block.
    pub restriction_violations: usize,
    /// Times the forced-progress fallback ran.
    pub valve_activations: usize,
    /// `(block, P_i, P_o)` per placement, in placement order.
    pub placements: Vec<(usize, Permutation, Permutation)>,
}

impl SweepOutcome {
    fn empty(pi0: &MappingState) -> Self {
        SweepOutcome {
            circuit: Circuit::new(pi0.num_physical()),
            initial_mapping: pi0.clone(),
            final_mapping: pi0.clone(),
            swap_count: 0,
            block_errors: Vec::new(),
            restriction_violations: 0,
            valve_activations: 0,
            placements: Vec::new(),
        }
    }
}

struct Sweep<'a> {
    source: BlockSource<'a>,
    d: &'a DistanceMatrix,
    g: &'a CouplingGraph,
    cfg: &'a SweepConfig,
    emit: bool,
    pi: MappingState,
    out: SweepOutcome,
}

impl<'a> Sweep<'a> {
    fn executable(&self, b: &Block) -> bool {
        match b.width() {
            0 | 1 => true,
            2 => self.g.has_edge(self.pi.phys(b.qubits[0]), self.pi.phys(b.qubits[1])),
            _ => {
                let phys: Vec<usize> = b.qubits.iter().map(|&q| self.pi.phys(q)).collect();
                self.g.induced_subtopology(&phys).is_ok()
            }
        }
    }

    fn emit_swap(&mut self, p: usize, q: usize) {
        if self.emit {
            self.out.circuit.push(Gate::swap(p, q)).expect("physical qubits in range");
        }
        self.pi.swap_physical(p, q);
        self.out.swap_count += 1;
    }

    fn place(&mut self, b: &Block, front: &[&Block], ext: &[&Block]) -> Result<(), PamError> {
        let choice = select_permutation(b, &self.pi, self.source, front, ext, self.d, self.g, self.cfg);
        match choice {
            Some(ch) => {
                let fr = frame(b, &self.pi, self.g).expect("executable block has a frame");
                let key = EntryKey::new(ch.topology.clone(), ch.p_in.clone(), ch.p_out.clone());
                let hit = self.source.lookup(b.index, &key).expect("chosen entry exists");
                if self.emit {
                    if let Some(c) = hit.circuit {
                        for gate in c.gates() {
                            self.out
                                .circuit
                                .push(gate.relabeled(|i| fr.sorted[i]))
                                .expect("physical qubits in range");
                        }
                    }
                }
                self.out.block_errors.push(hit.distance);
                self.pi = updated_mapping(b, &fr.sorted, &ch.p_out, &self.pi);
                self.out.placements.push((b.index, ch.p_in, ch.p_out));
            }
            None => self.place_literal(b)?,
        }
        Ok(())
    }

    /// Emits the block's own gates. On a 3-qubit path a gate between the
    /// two ends first swaps one end with the middle.
    fn place_literal(&mut self, b: &Block) -> Result<(), PamError> {
        let mut cur: Vec<usize> = b.qubits.iter().map(|&q| self.pi.phys(q)).collect();
        for gate in b.gates.gates() {
            let qs = gate.qubits();
            match qs.len() {
                1 => {}
                2 => {
                    let (a, c) = (qs[0], qs[1]);
                    if !self.g.has_edge(cur[a], cur[c]) {
                        let m = (0..b.width())
                            .find(|&m| m != a && m != c)
                            .ok_or_else(|| PamError::LiteralUnsupported(gate.kind().name().to_string()))?;
                        self.emit_swap(cur[a], cur[m]);
                        cur.swap(a, m);
                        if !self.g.has_edge(cur[a], cur[c]) {
                            return Err(PamError::LiteralUnsupported(gate.kind().name().to_string()));
                        }
                    }
                }
                _ => return Err(PamError::LiteralUnsupported(gate.kind().name().to_string())),
            }
            if matches!(gate.kind(), GateKind::Opaque { .. }) {
                return Err(PamError::LiteralUnsupported(gate.kind().name().to_string()));
            }
            if self.emit {
                self.out
                    .circuit
                    .push(gate.relabeled(|j| cur[j]))
                    .expect("physical qubits in range");
            }
        }
        let rank: Vec<usize> = (0..b.width()).collect();
        self.out.placements.push((
            b.index,
            Permutation::identity(rank.len()),
            Permutation::identity(rank.len()),
        ));
        self.out.block_errors.push(0.0);
        // The swaps above already moved the carriers inside `pi`.
        Ok(())
    }

    /// Moves the non-anchor qubit closest to the block's largest connected
    /// piece one hop at a time until the block is executable.
    fn release_valve(&mut self, b: &Block) {
        while !self.executable(b) {
            let phys: Vec<usize> = b.qubits.iter().map(|&q| self.pi.phys(q)).collect();
            let comps = components(&phys, self.g);
            let anchor = comps
                .iter()
                .max_by(|x, y| x.len().cmp(&y.len()).then(y[0].cmp(&x[0])))
                .unwrap()
                .clone();
            let (mover, target) = phys
                .iter()
                .filter(|p| !anchor.contains(p))
                .flat_map(|&p| anchor.iter().map(move |&a| (p, a)))
                .min_by_key(|&(p, a)| (self.d.get(p, a), p, a))
                .unwrap();
            let path = self.g.shortest_path(mover, target);
            // Stop one hop short of the anchor: adjacency is enough.
            for w in path.windows(2).take(path.len().saturating_sub(2)) {
                self.emit_swap(w[0], w[1]);
            }
        }
    }
}

/// Connected pieces of the subgraph induced on `phys`, each sorted.
fn components(phys: &[usize], g: &CouplingGraph) -> Vec<Vec<usize>> {
    let mut left: BTreeSet<usize> = phys.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(&start) = left.iter().next() {
        left.remove(&start);
        let mut comp = vec![start];
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            let next: Vec<usize> = left.iter().copied().filter(|&v| g.has_edge(u, v)).collect();
            for v in next {
                left.remove(&v);
                comp.push(v);
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Places every block of `pc` starting from `pi0`. With `emit = false` only
/// the mapping evolution is computed.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    pc: &PartitionedCircuit,
    pi0: &MappingState,
    source: BlockSource<'_>,
    d: &DistanceMatrix,
    g: &CouplingGraph,
    cfg: &SweepConfig,
    emit: bool,
) -> Result<SweepOutcome, PamError> {
    let n_phys = g.num_physical();
    let diameter = d.diameter().max(1) as usize;
    let bound = (n_phys * pc.len() * diameter).max(1);
    let valve_after = n_phys.saturating_sub(3).max(1) * diameter;

    let mut st = Sweep {
        source,
        d,
        g,
        cfg,
        emit,
        pi: pi0.clone(),
        out: SweepOutcome::empty(pi0),
    };
    let blocks = pc.blocks();
    let mut placed = vec![false; pc.len()];
    let mut pending: Vec<usize> = (0..pc.len()).map(|b| pc.predecessors(b).len()).collect();
    let mut front: BTreeSet<usize> = (0..pc.len()).filter(|&b| pending[b] == 0).collect();
    let mut decay = DecayState::new(n_phys);
    let mut committed = 0usize;
    let mut since_progress = 0usize;
    let mut placed_count = 0usize;

    while !front.is_empty() {
        let mut progressed = false;
        loop {
            let ready = front.iter().copied().find(|&b| st.executable(&blocks[b]));
            let Some(b) = ready else { break };
            let front_list: Vec<usize> = front.iter().copied().collect();
            let ext_ids = extended_set(pc, &placed, &front_list, cfg);
            let others: Vec<&Block> = front.iter().filter(|&&f| f != b).map(|&f| &blocks[f]).collect();
            let ext: Vec<&Block> = ext_ids.iter().map(|&e| &blocks[e]).collect();
            st.place(&blocks[b], &others, &ext)?;
            placed[b] = true;
            placed_count += 1;
            front.remove(&b);
            for &s in pc.successors(b) {
                pending[s] -= 1;
                if pending[s] == 0 {
                    front.insert(s);
                }
            }
            progressed = true;
        }
        if progressed {
            decay.reset();
            since_progress = 0;
            continue;
        }
        if front.is_empty() {
            break;
        }

        if since_progress >= valve_after {
            let b = *front.iter().next().unwrap();
            let before = st.out.swap_count;
            st.release_valve(&blocks[b]);
            committed += st.out.swap_count - before;
            st.out.valve_activations += 1;
            decay.reset();
            since_progress = 0;
            continue;
        }

        let front_list: Vec<usize> = front.iter().copied().collect();
        let ext_ids = extended_set(pc, &placed, &front_list, cfg);
        let fb: Vec<&Block> = front_list.iter().map(|&f| &blocks[f]).collect();
        let ext: Vec<&Block> = ext_ids.iter().map(|&e| &blocks[e]).collect();
        let cands = candidate_swaps(&fb, &st.pi, g);
        let (p, q) = select_swap(&cands, &fb, &ext, &st.pi, d, &decay, cfg)?;
        let (lp, lq) = (st.pi.label_at(p), st.pi.label_at(q));
        if fb.iter().any(|b| b.local_of(lp).is_some() && b.local_of(lq).is_some()) {
            st.out.restriction_violations += 1;
        }
        st.emit_swap(p, q);
        decay.commit(p, q, cfg);
        committed += 1;
        since_progress += 1;
        if committed > bound {
            return Err(PamError::SwapBudgetExceeded {
                bound,
                placed: placed_count,
                blocks: pc.len(),
            });
        }
    }
    st.out.final_mapping = st.pi.clone();
    Ok(st.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::quick_partition;

    fn block(idx: usize, qubits: &[usize]) -> Block {
        let mut c = Circuit::new(qubits.len());
        if qubits.len() >= 2 {
            c.push(Gate::cnot(0, 1)).unwrap();
        }
        Block {
            index: idx,
            qubits: qubits.to_vec(),
            gates: c,
            source: vec![],
        }
    }

    fn line3() -> (CouplingGraph, DistanceMatrix) {
        let g = CouplingGraph::line(3);
        let d = g.distance_matrix();
        (g, d)
    }

    #[test]
    fn heuristic_examples() {
        let (_, d) = line3();
        let cfg = SweepConfig::default();
        let b = block(0, &[0, 1]);
        let far = MappingState::from_layout(&[0, 2], 3).unwrap();
        assert_eq!(heuristic_h(&[&b], &[], &far, &d, &cfg).unwrap(), 2.0);
        let near = MappingState::from_layout(&[0, 1, 2], 3).unwrap();
        assert_eq!(heuristic_h(&[&b], &[], &near, &d, &cfg).unwrap(), 1.0);
        // Extended block on logical (0, 2) at physical (0, 2).
        let e = block(1, &[0, 2]);
        assert_eq!(heuristic_h(&[&b], &[&e], &near, &d, &cfg).unwrap(), 2.0);
        assert_eq!(heuristic_h(&[], &[], &near, &d, &cfg).unwrap(), 0.0);
        let wide = block(2, &[0, 5]);
        assert!(heuristic_h(&[&wide], &[], &near, &d, &cfg).is_err());
    }

    #[test]
    fn extended_set_is_breadth_first() {
        let chain = Circuit::from_gates(
            3,
            [Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::cnot(0, 1)],
        )
        .unwrap();
        let pc = quick_partition(&chain, 2);
        let cfg = SweepConfig::default();
        assert_eq!(extended_set(&pc, &[false; 3], &[0], &cfg), vec![1, 2]);
        let none = SweepConfig {
            extended_size: 0,
            ..cfg.clone()
        };
        assert!(extended_set(&pc, &[false; 3], &[0], &none).is_empty());
        // Diamond: b0 -> {b1, b2} -> b3.
        let diamond = Circuit::from_gates(
            4,
            [
                Gate::cnot(0, 1),
                Gate::cnot(0, 2),
                Gate::cnot(1, 3),
                Gate::cnot(2, 3),
            ],
        )
        .unwrap();
        let pc = quick_partition(&diamond, 2);
        assert_eq!(pc.len(), 4);
        let two = SweepConfig {
            extended_size: 2,
            ..cfg
        };
        let ext = extended_set(&pc, &[false; 4], &[0], &two);
        assert_eq!(ext, pc.successors(0).to_vec());
    }

    #[test]
    fn candidate_examples() {
        let (g, _) = line3();
        let b = block(0, &[0, 1]);
        let far = MappingState::from_layout(&[0, 2], 3).unwrap();
        assert_eq!(candidate_swaps(&[&b], &far, &g), vec![(0, 1), (1, 2)]);
        let near = MappingState::from_layout(&[0, 1], 3).unwrap();
        assert_eq!(candidate_swaps(&[&b], &near, &g), vec![(1, 2)]);
        assert!(candidate_swaps(&[], &near, &g).is_empty());
    }

    #[test]
    fn decay_breaks_ties() {
        let (g, d) = line3();
        let cfg = SweepConfig::default();
        let b = block(0, &[0, 1]);
        let far = MappingState::from_layout(&[0, 2], 3).unwrap();
        let cands = candidate_swaps(&[&b], &far, &g);
        let mut decay = DecayState::new(3);
        // Both swaps bring the pair together: equal H, lexicographic pick.
        assert_eq!(select_swap(&cands, &[&b], &[], &far, &d, &decay, &cfg).unwrap(), (0, 1));
        decay.values[0] = 1.001;
        assert_eq!(select_swap(&cands, &[&b], &[], &far, &d, &decay, &cfg).unwrap(), (1, 2));
        assert!(select_swap(&[], &[&b], &[], &far, &d, &decay, &cfg).is_err());
    }

    #[test]
    fn decay_resets_on_interval() {
        let cfg = SweepConfig::default();
        let mut decay = DecayState::new(2);
        for _ in 0..4 {
            decay.commit(0, 1, &cfg);
        }
        assert!((decay.get(0) - 1.004).abs() < 1e-12);
        decay.commit(0, 1, &cfg);
        assert_eq!(decay.get(0), 1.0);
    }

    #[test]
    fn one_swap_for_distance_two() {
        let (g, d) = line3();
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let pc = quick_partition(&c, 2);
        let pi = MappingState::from_layout(&[0, 2], 3).unwrap();
        let out = sweep(&pc, &pi, BlockSource::Literal, &d, &g, &SweepConfig::default(), true).unwrap();
        assert_eq!(out.swap_count, 1);
        assert_eq!(out.restriction_violations, 0);
    }

    #[test]
    fn release_valve_joins_components() {
        let g = CouplingGraph::line(7);
        let d = g.distance_matrix();
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let pc = quick_partition(&c, 2);
        let pi = MappingState::from_layout(&[0, 6], 7).unwrap();
        let mut st = Sweep {
            source: BlockSource::Literal,
            d: &d,
            g: &g,
            cfg: &SweepConfig::default(),
            emit: true,
            out: SweepOutcome::empty(&pi),
            pi,
        };
        st.release_valve(&pc.blocks()[0]);
        assert!(st.executable(&pc.blocks()[0]));
        assert_eq!(st.out.swap_count, 5);
    }
}
