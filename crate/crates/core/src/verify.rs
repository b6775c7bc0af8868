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

//! Equivalence checking of compiled results and circuit metrics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, DEFAULT_SIMULATION_CAP};
use crate::linalg;
use crate::pam::CompiledResult;
use crate::permutation::{permute_unitary, Permutation};
use crate::synthesis::hs_distance;

pub const DEFAULT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("inconsistent mapping: {0}")]
    Mapping(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMethod {
    /// Dense simulation of both sides.
    Simulation,
    /// Composition bound over per-block synthesis errors.
    HierarchicalBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub hs_error: f64,
    /// Qubits simulated (0 for the bound).
    pub dimensions: usize,
    pub passed: bool,
    pub method: VerifyMethod,
}

pub fn verify(logical: &Circuit, result: &CompiledResult, threshold: f64) -> Result<VerificationReport, VerifyError> {
    verify_with_cap(logical, result, threshold, DEFAULT_SIMULATION_CAP)
}

/// Compares the compiled circuit, restricted to the physical qubits it
/// touches plus the logical qubits' initial and final carriers, against
/// the logical unitary relabeled by the initial layout on the input side
/// and by the final mapping on the output side. Beyond `cap` qubits the
/// recorded per-block errors are composed instead.
pub fn verify_with_cap(
    logical: &Circuit,
    result: &CompiledResult,
    threshold: f64,
    cap: usize,
) -> Result<VerificationReport, VerifyError> {
    let init = &result.initial_layout;
    let fin = &result.final_mapping;
    let n = logical.num_qubits();
    if init.num_logical() != n || fin.num_logical() != n {
        return Err(VerifyError::Mapping(format!(
            "circuit has {n} qubits, layouts cover {} and {}",
            init.num_logical(),
            fin.num_logical()
        )));
    }
    let mut support: BTreeSet<usize> = result
        .circuit
        .gates()
        .iter()
        .flat_map(|g| g.qubits().iter().copied())
        .collect();
    for l in 0..n {
        support.insert(init.phys(l));
        support.insert(fin.phys(l));
    }
    if support.len() > cap {
        let bound = hierarchical_bound(&result.block_errors);
        return Ok(VerificationReport {
            hs_error: bound,
            dimensions: 0,
            passed: bound <= threshold,
            method: VerifyMethod::HierarchicalBound,
        });
    }
    let s: Vec<usize> = support.into_iter().collect();
    let pos = |p: usize| s.binary_search(&p).expect("in support");
    let labels: BTreeSet<usize> = s.iter().map(|&p| init.label_at(p)).collect();
    let labels_out: BTreeSet<usize> = s.iter().map(|&p| fin.label_at(p)).collect();
    if labels != labels_out {
        return Err(VerifyError::Mapping(
            "qubits moved in or out of the simulated support".into(),
        ));
    }
    let labels: Vec<usize> = labels.into_iter().collect();
    let width = s.len();

    let phys = result.circuit.relabeled(width, pos)?.unitary_with_cap(cap)?;
    let log = logical.unitary_with_cap(cap)?;
    let padded = linalg::kron(&log, &linalg::identity(1 << (width - n)));
    let p_start = Permutation::new(labels.iter().map(|&l| pos(init.phys(l))).collect())
        .map_err(|e| VerifyError::Mapping(e.to_string()))?;
    let p_end = Permutation::new(labels.iter().map(|&l| pos(fin.phys(l))).collect())
        .map_err(|e| VerifyError::Mapping(e.to_string()))?;
    let expected = permute_unitary(&padded, &p_start.inverse(), &p_end)
        .map_err(|e| VerifyError::Mapping(e.to_string()))?;
    let hs_error = hs_distance(&expected, &phys).expect("equal dimensions");
    Ok(VerificationReport {
        hs_error,
        dimensions: width,
        passed: hs_error <= threshold,
        method: VerifyMethod::Simulation,
    })
}

/// Upper bound on the HS distance of a product whose factors have HS
/// distances `errors`. `sqrt(2 d)` is the phase-optimal Frobenius distance
/// divided by `sqrt(N)`, which is subadditive under multiplication by
/// unitaries.
pub fn hierarchical_bound(errors: &[f64]) -> f64 {
    let s: f64 = errors.iter().map(|d| (2.0 * d.max(0.0)).sqrt()).sum();
    s * s / 2.0
}

/// Fraction of qubit pairs that share at least one multi-qubit gate.
pub fn communication_score(c: &Circuit) -> f64 {
    let n = c.num_qubits();
    if n < 2 {
        return 0.0;
    }
    c.interaction_pairs().len() as f64 / (n * (n - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::pam::{CompileMode, MappingState};

    fn result(circuit: Circuit, init: &[usize], fin: &[usize]) -> CompiledResult {
        let n = circuit.num_qubits();
        CompiledResult {
            cnot_count: circuit.cnot_count(),
            circuit,
            initial_layout: MappingState::from_layout(init, n).unwrap(),
            final_mapping: MappingState::from_layout(fin, n).unwrap(),
            swap_count: 0,
            wall_ms: 0,
            mode: CompileMode::SabreBaseline,
            seed: 0,
            block_errors: vec![],
            restriction_violations: 0,
        }
    }

    #[test]
    fn identity_compilation_is_exact() {
        let c = Circuit::from_gates(2, [Gate::u3(0, 0.3, 0.2, 0.1), Gate::cnot(0, 1)]).unwrap();
        let r = result(c.clone(), &[0, 1], &[0, 1]);
        let rep = verify(&c, &r, 1e-8).unwrap();
        assert!(rep.hs_error < 1e-12 && rep.passed);
    }

    #[test]
    fn swap_only_compilation_resolved_by_metadata() {
        // Logical CNOT(0, 2) on a 3-line: swap 1 and 2, then CNOT(0, 1).
        let logical = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
        let phys = Circuit::from_gates(3, [Gate::swap(1, 2), Gate::cnot(0, 1)]).unwrap();
        let good = result(phys.clone(), &[0, 1, 2], &[0, 2, 1]);
        assert!(verify(&logical, &good, 1e-8).unwrap().hs_error < 1e-12);
        let wrong = result(phys, &[0, 1, 2], &[0, 1, 2]);
        assert!(!verify(&logical, &wrong, 1e-8).unwrap().passed);
    }

    #[test]
    fn idle_qubits_do_not_matter() {
        let logical = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let mut phys = Circuit::new(5);
        phys.push(Gate::cnot(3, 1)).unwrap();
        let mut r = result(phys, &[3, 1], &[3, 1]);
        r.initial_layout = MappingState::from_layout(&[3, 1], 5).unwrap();
        r.final_mapping = r.initial_layout.clone();
        let rep = verify(&logical, &r, 1e-8).unwrap();
        assert_eq!(rep.dimensions, 2);
        assert!(rep.hs_error < 1e-12);
    }

    #[test]
    fn bound_composes() {
        assert_eq!(hierarchical_bound(&[]), 0.0);
        let one = hierarchical_bound(&[1e-10]);
        assert!((one - 1e-10).abs() < 1e-22);
        assert!((hierarchical_bound(&[1e-10; 4]) - 16e-10).abs() < 1e-20);
    }

    #[test]
    fn communication_examples() {
        assert_eq!(communication_score(&Circuit::new(3)), 0.0);
        let mut chain = Circuit::new(12);
        for i in 0..11 {
            chain.push(Gate::cnot(i, i + 1)).unwrap();
        }
        assert!((communication_score(&chain) - 11.0 / 66.0).abs() < 1e-15);
        let mut full = Circuit::new(12);
        for i in 0..12 {
            for j in i + 1..12 {
                full.push(Gate::cnot(i, j)).unwrap();
            }
        }
        assert_eq!(communication_score(&full), 1.0);
    }
}
