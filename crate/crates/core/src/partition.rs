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

//! Single-pass vertical partitioning into blocks of at most `k` qubits.

use std::collections::BTreeSet;

use crate::circuit::Circuit;
use crate::linalg::Matrix;

/// A group of gates acting on at most `k` qubits. `gates` is written over
/// local wires `0..width`, local wire `j` standing for `qubits[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub index: usize,
    pub qubits: Vec<usize>,
    pub gates: Circuit,
    /// Positions of the block's gates in the source circuit, ascending.
    pub source: Vec<usize>,
}

impl Block {
    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn local_of(&self, q: usize) -> Option<usize> {
        self.qubits.binary_search(&q).ok()
    }

    pub fn unitary(&self) -> Matrix {
        self.gates
            .unitary_with_cap(self.width())
            .expect("blocks are narrow")
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.cnot_count()
    }

    fn from_source(index: usize, c: &Circuit, qubits: BTreeSet<usize>, source: Vec<usize>) -> Self {
        let qubits: Vec<usize> = qubits.into_iter().collect();
        let mut gates = Circuit::new(qubits.len());
        for &i in &source {
            let g = c.gates()[i].relabeled(|q| qubits.binary_search(&q).unwrap());
            gates.push(g).expect("block holds the gate's qubits");
        }
        Block {
            index,
            qubits,
            gates,
            source,
        }
    }
}

/// Blocks in a topological order together with their dependency DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedCircuit {
    num_qubits: usize,
    blocks: Vec<Block>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl PartitionedCircuit {
    /// Builds the DAG from a block list already in topological order.
    /// Blocks are renumbered by position.
    pub fn from_blocks(num_qubits: usize, mut blocks: Vec<Block>) -> Self {
        let mut last: Vec<Option<usize>> = vec![None; num_qubits];
        let mut preds = Vec::with_capacity(blocks.len());
        let mut succs = vec![Vec::new(); blocks.len()];
        for (i, b) in blocks.iter_mut().enumerate() {
            b.index = i;
            let mut p: Vec<usize> = b.qubits.iter().filter_map(|&q| last[q]).collect();
            p.sort_unstable();
            p.dedup();
            for &j in &p {
                succs[j].push(i);
            }
            preds.push(p);
            for &q in &b.qubits {
                last[q] = Some(i);
            }
        }
        PartitionedCircuit {
            num_qubits,
            blocks,
            preds,
            succs,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn predecessors(&self, b: usize) -> &[usize] {
        &self.preds[b]
    }

    pub fn successors(&self, b: usize) -> &[usize] {
        &self.succs[b]
    }

    /// Inlines every block back into one circuit.
    pub fn to_circuit(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for b in &self.blocks {
            for g in b.gates.gates() {
                out.push(g.relabeled(|j| b.qubits[j])).expect("block qubits in range");
            }
        }
        out
    }

    /// Block order and each block's gate order reversed. Only the
    /// interaction structure survives.
    pub fn reversed(&self) -> PartitionedCircuit {
        let blocks = self
            .blocks
            .iter()
            .rev()
            .map(|b| Block {
                gates: b.gates.reversed_structure(),
                ..b.clone()
            })
            .collect();
        PartitionedCircuit::from_blocks(self.num_qubits, blocks)
    }
}

struct Bin {
    qubits: BTreeSet<usize>,
    gates: Vec<usize>,
}

/// Sweeps the gates once, keeping a set of open bins with pairwise disjoint
/// qubit sets. A qubit belongs to at most one open bin, its owner.
///
/// A gate goes to the bin owning its qubits when the union stays within `k`
/// (two owners that fit together are merged). A multi-qubit gate on unowned
/// qubits joins the earliest open bin with room. Anything else closes the
/// owners and opens a new bin. Closed bins are emitted in closing order,
/// which is topological because a qubit changes owner only after its
/// previous owner closed. Width-1 bins are folded into the neighbouring block
/// on their qubit afterwards.
pub fn quick_partition(c: &Circuit, k: usize) -> PartitionedCircuit {
    assert!(k >= 2, "block width must be at least 2");
    let n = c.num_qubits();
    let mut bins: Vec<Option<Bin>> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut closed: Vec<Bin> = Vec::new();

    let close = |id: usize, bins: &mut Vec<Option<Bin>>, owner: &mut Vec<Option<usize>>, closed: &mut Vec<Bin>| {
        let bin = bins[id].take().expect("closing an open bin");
        for &q in &bin.qubits {
            owner[q] = None;
        }
        closed.push(bin);
    };

    for (gi, g) in c.gates().iter().enumerate() {
        let qs: BTreeSet<usize> = g.qubits().iter().copied().collect();
        let owners: BTreeSet<usize> = qs.iter().filter_map(|&q| owner[q]).collect();
        let mut union = qs.clone();
        for &id in &owners {
            union.extend(bins[id].as_ref().unwrap().qubits.iter().copied());
        }

        let target = if owners.is_empty() {
            if g.is_multi_qubit() {
                bins.iter()
                    .position(|b| b.as_ref().is_some_and(|b| b.qubits.union(&qs).count() <= k))
            } else {
                None
            }
        } else if union.len() <= k {
            let mut ids = owners.iter().copied();
            let first = ids.next().unwrap();
            for other in ids {
                let bin = bins[other].take().unwrap();
                let dst = bins[first].as_mut().unwrap();
                dst.qubits.extend(bin.qubits);
                dst.gates.extend(bin.gates);
                dst.gates.sort_unstable();
            }
            Some(first)
        } else {
            for &id in &owners {
                close(id, &mut bins, &mut owner, &mut closed);
            }
            None
        };

        let id = match target {
            Some(id) => id,
            None => {
                bins.push(Some(Bin {
                    qubits: BTreeSet::new(),
                    gates: Vec::new(),
                }));
                bins.len() - 1
            }
        };
        let bin = bins[id].as_mut().unwrap();
        bin.qubits.extend(qs.iter().copied());
        bin.gates.push(gi);
        for &q in &bin.qubits {
            owner[q] = Some(id);
        }
    }
    for id in 0..bins.len() {
        if bins[id].is_some() {
            close(id, &mut bins, &mut owner, &mut closed);
        }
    }

    let merged = fold_single_qubit_bins(closed);
    let blocks = merged
        .into_iter()
        .enumerate()
        .map(|(i, b)| Block::from_source(i, c, b.qubits, b.gates))
        .collect();
    PartitionedCircuit::from_blocks(n, blocks)
}

/// One block per gate, for gate-level routing.
pub fn gate_blocks(c: &Circuit) -> PartitionedCircuit {
    let blocks = c
        .gates()
        .iter()
        .enumerate()
        .map(|(i, g)| Block::from_source(i, c, g.qubits().iter().copied().collect(), vec![i]))
        .collect();
    PartitionedCircuit::from_blocks(c.num_qubits(), blocks)
}

fn fold_single_qubit_bins(mut bins: Vec<Bin>) -> Vec<Bin> {
    let mut i = 0;
    while i < bins.len() {
        if bins[i].qubits.len() != 1 {
            i += 1;
            continue;
        }
        let q = *bins[i].qubits.iter().next().unwrap();
        let pred = (0..i).rev().find(|&j| bins[j].qubits.contains(&q));
        let succ = || (i + 1..bins.len()).find(|&j| bins[j].qubits.contains(&q));
        let host = match pred {
            Some(j) if bins[j].qubits.len() > 1 => Some(j),
            _ => succ().filter(|&j| bins[j].qubits.len() > 1),
        };
        match host {
            Some(j) => {
                let bin = bins.remove(i);
                let j = if j > i { j - 1 } else { j };
                bins[j].gates.extend(bin.gates);
                bins[j].gates.sort_unstable();
            }
            None => i += 1,
        }
    }
    bins
}
