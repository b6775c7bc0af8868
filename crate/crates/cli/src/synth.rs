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


use std::fmt;
use std::str::FromStr;

use pam_core::circuit::Circuit;
use pam_core::linalg::Matrix;
use pam_core::permutation::{permute_unitary, Permutation};
use pam_core::synthesis::{fullpas, hs_distance, qsearch, seqpas, SynthesisConfig, SynthesisError};
use pam_core::topology::SubTopology;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMode {
    Qsearch,
    Seqpas,
    Fullpas,
}

impl SynthMode {
    pub const ALL: [SynthMode; 3] = [SynthMode::Qsearch, SynthMode::Seqpas, SynthMode::Fullpas];

    pub fn as_str(self) -> &'static str {
        match self {
            SynthMode::Qsearch => "qsearch",
            SynthMode::Seqpas => "seqpas",
            SynthMode::Fullpas => "fullpas",
        }
    }
}

impl fmt::Display for SynthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for SynthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SynthMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown synthesis mode `{s}`"))
    }
}

/// Printed by `pam synth`. The circuit implements `M(p_out) U M(p_in)`.
#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub cnot_count: usize,
    pub p_in: Vec<usize>,
    pub p_out: Vec<usize>,
    pub distance: f64,
    pub calls: usize,
    #[serde(skip)]
    pub circuit: Circuit,
}

impl SynthReport {
    /// HS distance recomputed from the emitted circuit against the permuted
    /// target.
    pub fn check(&self, target: &Matrix) -> Option<f64> {
        let p_in = Permutation::new(self.p_in.clone()).ok()?;
        let p_out = Permutation::new(self.p_out.clone()).ok()?;
        let expected = permute_unitary(target, &p_in, &p_out).ok()?;
        let u = self.circuit.unitary().ok()?;
        hs_distance(&expected, &u).ok()
    }
}

pub fn run_synth(
    target: &Matrix,
    topo: &SubTopology,
    mode: SynthMode,
    cfg: &SynthesisConfig,
) -> Result<SynthReport, SynthesisError> {
    match mode {
        SynthMode::Qsearch => {
            let out = qsearch(target, topo, cfg)?;
            let id: Vec<usize> = (0..topo.k()).collect();
            Ok(SynthReport {
                cnot_count: out.cnot_count(),
                p_in: id.clone(),
                p_out: id,
                distance: out.distance,
                calls: 1,
                circuit: out.circuit,
            })
        }
        SynthMode::Seqpas | SynthMode::Fullpas => {
            let out = if mode == SynthMode::Seqpas {
                seqpas(target, topo, cfg)?
            } else {
                fullpas(target, topo, cfg)?
            };
            Ok(SynthReport {
                cnot_count: out.cnot_count(),
                p_in: out.p_in.as_slice().to_vec(),
                p_out: out.p_out.as_slice().to_vec(),
                distance: out.distance,
                calls: out.calls,
                circuit: out.circuit,
            })
        }
    }
}
