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

//! Topology-aware unitary synthesis.
//!
//! [`qsearch`] grows CNOT/U3 templates over the edges of a [`SubTopology`]
//! and fits their angles numerically. [`seqpas`] and [`fullpas`] wrap it to
//! also search over wire permutations, and [`resynthesize_block`] builds the
//! per-block table consumed by the router.

mod instantiate;
mod pas;
mod qsearch;
mod table;


use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::linalg::Matrix;
use crate::topology::SubTopology;

pub use instantiate::{cost_and_gradient, instantiate, zyz_angles, Instantiation};
pub use pas::{fullpas, seqpas, synthesize_permuted, PasResult};
pub use qsearch::{qsearch, SearchOutcome};
pub use table::{
    block_hash, entry_error, resynthesize_block, resynthesize_scoped, BlockTable, EntryKey,
    PermutationScope, ResynthesisReport, SynthesisTable, TableCache, TableEntry,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("dimension mismatch: {0}x{0} against {1}x{1}")]
    Dimension(usize, usize),
    #[error("target is not a square power-of-two unitary")]
    NotUnitary,
    #[error("template has width {template} but target acts on {target} qubits")]
    Width { template: usize, target: usize },
    #[error("in-process synthesis supports up to 3 qubits, got {0}")]
    TooWide(usize),
    #[error("no template with at most {max_cnots} CNOTs reached {threshold:e} (best {best:e})")]
    ThresholdNotReached {
        max_cnots: usize,
        threshold: f64,
        best: f64,
    },
    #[error("cost became non-finite in every restart")]
    NonFinite,
    #[error("sub-topology has {topology} positions but target acts on {target} qubits")]
    TopologyWidth { topology: usize, target: usize },
    #[error("cache: {0}")]
    Cache(String),
}

/// How qsearch orders its frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SearchPriority {
    /// Instantiated distance first, CNOT count as tie-break.
    Distance,
    /// `distance_weight * distance + cnot_weight * cnots`.
    Weighted {
        distance_weight: f64,
        cnot_weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub multistarts: usize,
    pub success_threshold: f64,
    pub max_cnots: usize,
    pub optimizer_max_iters: usize,
    pub seed: u64,
    pub priority: SearchPriority,
    /// Upper bound on expanded search nodes per qsearch call.
    pub max_expansions: usize,
    /// Seed each child's first start from its parent's angles.
    pub warm_start: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            multistarts: 4,
            success_threshold: 1e-10,
            max_cnots: 20,
            optimizer_max_iters: 1000,
            seed: 0,
            priority: SearchPriority::Weighted {
                distance_weight: 10.0,
                cnot_weight: 1.0,
            },
            max_expansions: 400,
            warm_start: false,
        }
    }
}

impl SynthesisConfig {
    /// Stable digest of every field, used in cache keys.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

/// `1 - |Tr(U^dagger V)| / 2^n`.
pub fn hs_distance(u: &Matrix, v: &Matrix) -> Result<f64, SynthesisError> {
    if u.dim() != v.dim() || u.nrows() != u.ncols() {
        return Err(SynthesisError::Dimension(u.nrows(), v.nrows()));
    }
    let n = u.nrows() as f64;
    let tr: num_complex::Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok((1.0 - tr.norm() / n).max(0.0))
}

/// One step of a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    /// Three free angles on one position.
    U3(usize),
    /// Fixed CNOT, control first.
    Cnot(usize, usize),
}

/// A parameterized circuit shape over positions `0..width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    width: usize,
    slots: Vec<Slot>,
}

impl Template {
    pub fn new(width: usize, slots: Vec<Slot>) -> Self {
        Template { width, slots }
    }

    /// One U3 per position.
    pub fn root(width: usize) -> Self {
        Template::new(width, (0..width).map(Slot::U3).collect())
    }

    /// This template followed by a CNOT on `edge` and a U3 on each end.
    pub fn with_layer(&self, edge: (usize, usize)) -> Self {
        let mut slots = self.slots.clone();
        slots.extend([Slot::Cnot(edge.0, edge.1), Slot::U3(edge.0), Slot::U3(edge.1)]);
        Template::new(self.width, slots)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn num_params(&self) -> usize {
        3 * self.slots.iter().filter(|s| matches!(s, Slot::U3(_))).count()
    }

    pub fn cnot_count(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, Slot::Cnot(..))).count()
    }

    pub fn complies_with(&self, g: &SubTopology) -> bool {
        self.slots.iter().all(|s| match *s {
            Slot::Cnot(a, b) => g.has_edge(a, b),
            Slot::U3(_) => true,
        })
    }

    pub fn to_circuit(&self, params: &[f64]) -> Circuit {
        assert_eq!(params.len(), self.num_params());
        let mut c = Circuit::new(self.width);
        let mut p = params.chunks_exact(3);
        for s in &self.slots {
            let g = match *s {
                Slot::U3(q) => {
                    let a = p.next().unwrap();
                    Gate::u3(q, a[0], a[1], a[2])
                }
                Slot::Cnot(a, b) => Gate::cnot(a, b),
            };
            c.push(g).expect("template slots are in range");
        }
        c
    }

    pub fn unitary(&self, params: &[f64]) -> Matrix {
        self.to_circuit(params)
            .unitary_with_cap(self.width)
            .expect("templates are narrow")
    }

    pub(crate) fn structure_seed(&self) -> u64 {
        let mut h = Sha256::new();
        h.update((self.width as u64).to_le_bytes());
        for s in &self.slots {
            match *s {
                Slot::U3(q) => h.update([0, q as u8]),
                Slot::Cnot(a, b) => h.update([1, a as u8, b as u8]),
            }
        }
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }
}

pub(crate) fn target_width(target: &Matrix) -> Result<usize, SynthesisError> {
    crate::linalg::is_power_of_two_square(target).ok_or(SynthesisError::NotUnitary)
}
