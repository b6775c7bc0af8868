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

//! Permutation-aware layout and routing.
//!
//! The sweep walks the block DAG of a partitioned circuit. A block whose
//! qubits induce a connected sub-topology under the current mapping is
//! placed: one of its table circuits is emitted on those physical qubits and
//! the mapping follows the chosen output permutation. Otherwise a SWAP is
//! chosen by the lookahead heuristic with decay.

mod compile;
mod sweep;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synthesis::SynthesisError;
use crate::topology::TopologyError;

pub use compile::{
    absorb, compile, layout, route, CompileMode, CompileOptions, CompiledResult, Sidecar,
};
pub use sweep::{
    candidate_swaps, extended_set, heuristic_h, select_permutation, select_swap, sweep,
    BlockSource, DecayState, PermutationChoice, SweepOutcome,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PamError {
    #[error("logical qubit {0} is not mapped")]
    Unmapped(usize),
    #[error("circuit has {logical} qubits but the device has {physical}")]
    TooManyLogical { logical: usize, physical: usize },
    #[error("block width must be 2 or 3, got {0}")]
    BlockWidth(usize),
    #[error("no candidate swaps for a non-executable front layer")]
    NoCandidates,
    #[error("swap budget of {bound} exceeded after placing {placed} of {blocks} blocks")]
    SwapBudgetExceeded {
        bound: usize,
        placed: usize,
        blocks: usize,
    },
    #[error("gate `{0}` cannot be routed literally")]
    LiteralUnsupported(String),
    #[error("invalid mapping: {0}")]
    Mapping(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

/// Bijection between labels and physical qubits. Labels `0..num_logical`
/// are the circuit's qubits; the remaining labels mark idle physical qubits
/// so that swaps with free qubits need no special casing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MappingState {
    num_logical: usize,
    log_to_phys: Vec<usize>,
    phys_to_log: Vec<usize>,
}

impl MappingState {
    /// Logical qubit `i` on `layout[i]`; idle physical qubits get the
    /// remaining labels in ascending physical order.
    pub fn from_layout(layout: &[usize], num_physical: usize) -> Result<Self, PamError> {
        let mut phys_to_log = vec![usize::MAX; num_physical];
        for (l, &p) in layout.iter().enumerate() {
            if p >= num_physical {
                return Err(PamError::Mapping(format!("physical qubit {p} out of range")));
            }
            if phys_to_log[p] != usize::MAX {
                return Err(PamError::Mapping(format!("physical qubit {p} used twice")));
            }
            phys_to_log[p] = l;
        }
        let mut next = layout.len();
        let mut log_to_phys = layout.to_vec();
        log_to_phys.resize(num_physical, usize::MAX);
        for (p, slot) in phys_to_log.iter_mut().enumerate() {
            if *slot == usize::MAX {
                *slot = next;
                log_to_phys[next] = p;
                next += 1;
            }
        }
        Ok(MappingState {
            num_logical: layout.len(),
            log_to_phys,
            phys_to_log,
        })
    }

    pub fn trivial(num_logical: usize, num_physical: usize) -> Self {
        let layout: Vec<usize> = (0..num_logical).collect();
        MappingState::from_layout(&layout, num_physical).expect("trivial layout is valid")
    }

    /// Uniformly random injection drawn from `seed`.
    pub fn random(num_logical: usize, num_physical: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut phys: Vec<usize> = (0..num_physical).collect();
        phys.shuffle(&mut rng);
        MappingState::from_layout(&phys[..num_logical], num_physical).expect("shuffle is a bijection")
    }

    pub fn num_logical(&self) -> usize {
        self.num_logical
    }

    pub fn num_physical(&self) -> usize {
        self.phys_to_log.len()
    }

    /// Physical carrier of label `l` (logical or idle).
    #[inline]
    pub fn phys(&self, l: usize) -> usize {
        self.log_to_phys[l]
    }

    pub fn checked_phys(&self, l: usize) -> Result<usize, PamError> {
        if l < self.num_logical {
            Ok(self.log_to_phys[l])
        } else {
            Err(PamError::Unmapped(l))
        }
    }

    /// Label held by physical qubit `p`.
    #[inline]
    pub fn label_at(&self, p: usize) -> usize {
        self.phys_to_log[p]
    }

    /// Logical qubit on `p`, if any.
    pub fn logical_at(&self, p: usize) -> Option<usize> {
        let l = self.phys_to_log[p];
        (l < self.num_logical).then_some(l)
    }

    /// Physical image of every logical qubit.
    pub fn layout(&self) -> Vec<usize> {
        self.log_to_phys[..self.num_logical].to_vec()
    }

    /// The full label-to-physical bijection.
    pub fn full_layout(&self) -> &[usize] {
        &self.log_to_phys
    }

    pub fn free_physical(&self) -> Vec<usize> {
        (0..self.num_physical())
            .filter(|&p| self.phys_to_log[p] >= self.num_logical)
            .collect()
    }

    /// Exchanges the occupants of two physical qubits.
    pub fn swap_physical(&mut self, p: usize, q: usize) {
        let (a, b) = (self.phys_to_log[p], self.phys_to_log[q]);
        self.phys_to_log.swap(p, q);
        self.log_to_phys[a] = q;
        self.log_to_phys[b] = p;
    }

    /// Moves `labels[j]` to `phys[j]`. The physical set must equal the
    /// labels' current carriers.
    pub(crate) fn reassign(&mut self, labels: &[usize], phys: &[usize]) {
        for (&l, &p) in labels.iter().zip(phys) {
            self.log_to_phys[l] = p;
            self.phys_to_log[p] = l;
        }
    }
}

/// Which output permutations a placed block may choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMode {
    /// The block keeps its qubits where they are.
    None,
    /// The block's outputs land in ascending logical order on its physical
    /// qubits whatever order the inputs arrived in.
    InputOnly,
    /// Any output order.
    OutputOnly,
    /// Any output order, input order fixed by placement.
    SequentialBoth,
}

impl PermutationMode {
    pub fn free_output(self) -> bool {
        matches!(self, PermutationMode::OutputOnly | PermutationMode::SequentialBoth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub extended_size: usize,
    pub extended_weight: f64,
    pub perm_weight: f64,
    pub decay_delta: f64,
    pub decay_reset_interval: usize,
    pub layout_passes: usize,
    pub seed: u64,
    pub permutation_mode: PermutationMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            extended_size: 20,
            extended_weight: 0.5,
            perm_weight: 0.1,
            decay_delta: 0.001,
            decay_reset_interval: 5,
            layout_passes: 2,
            seed: 0,
            permutation_mode: PermutationMode::SequentialBoth,
        }
    }
}

impl fmt::Display for PermutationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PermutationMode::None => "none",
            PermutationMode::InputOnly => "input_only",
            PermutationMode::OutputOnly => "output_only",
            PermutationMode::SequentialBoth => "sequential_both",
        })
    }
}

impl FromStr for PermutationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PermutationMode::None),
            "input_only" => Ok(PermutationMode::InputOnly),
            "output_only" => Ok(PermutationMode::OutputOnly),
            "sequential_both" => Ok(PermutationMode::SequentialBoth),
            _ => Err(format!("unknown permutation mode `{s}`")),
        }
    }
}
