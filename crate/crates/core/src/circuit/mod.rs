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

//! Circuit intermediate representation.
//!
//! Every front end lowers to the canonical gate set `{U3, CNOT, SWAP}`.
//! `Opaque` gates carry an explicit matrix and exist for unitary-level
//! targets; the compiler itself never emits them.
//!
//! `u3(θ, φ, λ)` uses the standard matrix
//! `[[cos θ/2, -e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.

pub(crate) mod qasm;

pub use qasm::{emit_qasm, emit_qasm_with, parse_qasm, EmitOptions, QasmError};

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};

/// Largest circuit width [`Circuit::unitary`] simulates by default.
pub const DEFAULT_SIMULATION_CAP: usize = 10;

const OPAQUE_UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("gate acts on qubit {0} more than once")]
    DuplicateQubit(usize),
    #[error("{kind} expects {expected} qubits, got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("opaque gate `{label}` is not unitary (defect {defect:.3e})")]
    NotUnitary { label: String, defect: f64 },
    #[error("opaque gate `{label}` matrix has shape {rows}x{cols}, expected {dim}x{dim}")]
    OpaqueShape {
        label: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("simulating {num_qubits} qubits exceeds the cap of {cap}")]
    SimulationCap { num_qubits: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    U3 { theta: f64, phi: f64, lambda: f64 },
    Cnot,
    Swap,
    Opaque { label: String, matrix: Matrix },
}

impl GateKind {
    pub fn name(&self) -> &str {
        match self {
            GateKind::U3 { .. } => "u3",
            GateKind::Cnot => "cx",
            GateKind::Swap => "swap",
            GateKind::Opaque { label, .. } => label,
        }
    }
}

/// A gate applied to an ordered list of qubits. For CNOT the first qubit is
/// the control.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
}

impl Gate {
    pub fn u3(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate {
            kind: GateKind::U3 { theta, phi, lambda },
            qubits: vec![qubit],
        }
    }

    /// # Panics
    /// If `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "CNOT control and target must differ");
        Gate {
            kind: GateKind::Cnot,
            qubits: vec![control, target],
        }
    }

    /// # Panics
    /// If `a == b`.
    pub fn swap(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "SWAP operands must differ");
        Gate {
            kind: GateKind::Swap,
            qubits: vec![a, b],
        }
    }

    pub fn opaque(
        label: impl Into<String>,
        qubits: Vec<usize>,
        matrix: Matrix,
    ) -> Result<Self, CircuitError> {
        let label = label.into();
        if qubits.is_empty() || qubits.len() > 3 {
            return Err(CircuitError::Arity {
                kind: "opaque",
                expected: 3,
                got: qubits.len(),
            });
        }
        let dim = 1 << qubits.len();
        if matrix.dim() != (dim, dim) {
            return Err(CircuitError::OpaqueShape {
                label,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim,
            });
        }
        let defect = linalg::unitarity_defect(&matrix);
        if defect > OPAQUE_UNITARITY_TOL {
            return Err(CircuitError::NotUnitary { label, defect });
        }
        check_distinct(&qubits)?;
        Ok(Gate {
            kind: GateKind::Opaque { label, matrix },
            qubits,
        })
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.qubits.len() > 1
    }

    /// CNOT-equivalent cost: CNOT = 1, SWAP = 3, everything else 0.
    pub fn cnot_cost(&self) -> usize {
        match self.kind {
            GateKind::Cnot => 1,
            GateKind::Swap => 3,
            _ => 0,
        }
    }

    /// Same gate acting on `f(q)` for each of its qubits.
    pub fn relabeled(&self, f: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind.clone(),
            qubits: self.qubits.iter().map(|&q| f(q)).collect(),
        }
    }

    /// The gate's own `2^arity` matrix in its local qubit order.
    pub fn matrix(&self) -> Matrix {
        match &self.kind {
            GateKind::U3 { theta, phi, lambda } => {
                let u = linalg::u3_matrix(*theta, *phi, *lambda);
                Array2::from_shape_fn((2, 2), |(r, c)| u[r][c])
            }
            GateKind::Cnot => {
                let mut m = linalg::identity(4);
                m.swap([2, 2], [2, 3]);
                m.swap([3, 3], [3, 2]);
                m
            }
            GateKind::Swap => {
                let mut m = linalg::identity(4);
                m.swap([1, 1], [1, 2]);
                m.swap([2, 2], [2, 1]);
                m
            }
            GateKind::Opaque { matrix, .. } => matrix.clone(),
        }
    }

    /// Left-multiplies `m` by this gate embedded in `n` qubits.
    pub fn apply_to(&self, m: &mut Matrix, n: usize) {
        match &self.kind {
            GateKind::Cnot => linalg::apply_cnot_rows(m, self.qubits[0], self.qubits[1], n),
            GateKind::Swap => linalg::apply_swap_rows(m, self.qubits[0], self.qubits[1], n),
            _ => linalg::apply_left(m, &self.matrix(), &self.qubits, n),
        }
    }
}

fn check_distinct(qubits: &[usize]) -> Result<(), CircuitError> {
    let mut seen = BTreeSet::new();
    for &q in qubits {
        if !seen.insert(q) {
            return Err(CircuitError::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// An ordered gate list over `num_qubits` wires. List order is the program
/// order; the dependency DAG chains each gate to the previous gate on each
/// of its qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_gates(
        num_qubits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for &q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        check_distinct(gate.qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must not be wider than `self`.
    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        for g in other.gates() {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Total two-qubit gate count with SWAP counted as three CNOTs.
    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    pub fn swap_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind(), GateKind::Swap))
            .count()
    }

    /// Longest path in the dependency DAG, counting every gate.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            let d = g.qubits().iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in g.qubits() {
                level[q] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// For each gate, the indices of its immediate per-qubit predecessors.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut last: Vec<Option<usize>> = vec![None; self.num_qubits];
        let mut preds = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            let mut p: Vec<usize> = g.qubits().iter().filter_map(|&q| last[q]).collect();
            p.sort_unstable();
            p.dedup();
            preds.push(p);
            for &q in g.qubits() {
                last[q] = Some(i);
            }
        }
        preds
    }

    /// Gates not in `done` whose per-qubit predecessors are all in `done`.
    /// `done` is expected to be downward closed.
    pub fn dependency_front(&self, done: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.predecessors()
            .iter()
            .enumerate()
            .filter(|(i, preds)| !done.contains(i) && preds.iter().all(|p| done.contains(p)))
            .map(|(i, _)| i)
            .collect()
    }

    /// Unitary under the default simulation cap.
    pub fn unitary(&self) -> Result<Matrix, CircuitError> {
        self.unitary_with_cap(DEFAULT_SIMULATION_CAP)
    }

    /// Product of gate embeddings, last gate leftmost.
    pub fn unitary_with_cap(&self, cap: usize) -> Result<Matrix, CircuitError> {
        if self.num_qubits > cap {
            return Err(CircuitError::SimulationCap {
                num_qubits: self.num_qubits,
                cap,
            });
        }
        let mut m = linalg::identity(1 << self.num_qubits);
        for g in &self.gates {
            g.apply_to(&mut m, self.num_qubits);
        }
        Ok(m)
    }

    /// Every gate with qubit `q` replaced by `f(q)` in a circuit of width
    /// `num_qubits`.
    pub fn relabeled(
        &self,
        num_qubits: usize,
        f: impl Fn(usize) -> usize,
    ) -> Result<Circuit, CircuitError> {
        let mut out = Circuit::new(num_qubits);
        out.metadata = self.metadata.clone();
        for g in &self.gates {
            out.push(g.relabeled(&f))?;
        }
        Ok(out)
    }

    /// The same gates in reverse order. Gate matrices are not conjugated, so
    /// this only preserves the interaction structure.
    pub fn reversed_structure(&self) -> Circuit {
        let mut out = self.clone();
        out.gates.reverse();
        out
    }

    /// Exact inverse: reversed order with every gate adjointed.
    pub fn inverse(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        out.metadata = self.metadata.clone();
        for g in self.gates.iter().rev() {
            let kind = match g.kind() {
                GateKind::U3 { theta, phi, lambda } => GateKind::U3 {
                    theta: -theta,
                    phi: -lambda,
                    lambda: -phi,
                },
                GateKind::Opaque { label, matrix } => GateKind::Opaque {
                    label: format!("{label}_dg"),
                    matrix: linalg::dagger(matrix),
                },
                other => other.clone(),
            };
            out.gates.push(Gate {
                kind,
                qubits: g.qubits.clone(),
            });
        }
        out
    }

    /// Same circuit with every SWAP expanded into three CNOTs.
    pub fn with_swaps_decomposed(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        out.metadata = self.metadata.clone();
        for g in &self.gates {
            match g.kind() {
                GateKind::Swap => {
                    let (a, b) = (g.qubits[0], g.qubits[1]);
                    out.gates.push(Gate::cnot(a, b));
                    out.gates.push(Gate::cnot(b, a));
                    out.gates.push(Gate::cnot(a, b));
                }
                _ => out.gates.push(g.clone()),
            }
        }
        out
    }

    /// Unordered qubit pairs that share at least one multi-qubit gate.
    pub fn interaction_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        for g in self.gates.iter().filter(|g| g.is_multi_qubit()) {
            let qs = g.qubits();
            for i in 0..qs.len() {
                for j in i + 1..qs.len() {
                    pairs.insert((qs[i].min(qs[j]), qs[i].max(qs[j])));
                }
            }
        }
        pairs
    }
}

/// Serializable form of a dense matrix: rows of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixData(pub Vec<Vec<[f64; 2]>>);

impl MatrixData {
    pub fn from_matrix(m: &Matrix) -> Self {
        MatrixData(
            m.rows()
                .into_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        )
    }

    /// `None` if the rows are ragged or the matrix is not square.
    pub fn to_matrix(&self) -> Option<Matrix> {
        let n = self.0.len();
        if self.0.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Array2::from_shape_fn((n, n), |(r, c)| {
            let [re, im] = self.0[r][c];
            num_complex::Complex64::new(re, im)
        }))
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::linalg::{identity, max_abs_diff};

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2);
        assert!(max_abs_diff(&c.unitary().unwrap(), &identity(4)) < 1e-15);
        assert_eq!(c.cnot_count(), 0);
        assert_eq!(c.depth(), 0);
    }

    #[test]
    fn cnot_unitary_follows_msb_convention() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let u = c.unitary().unwrap();
        // |10> -> |11>, |11> -> |10>: rows 2 and 3 exchanged.
        let mut expected = identity(4);
        expected.swap([2, 2], [2, 3]);
        expected.swap([3, 3], [3, 2]);
        assert!(max_abs_diff(&u, &expected) < 1e-15);
    }

    #[test]
    fn hadamard_squared_is_identity() {
        let h = || Gate::u3(0, PI / 2.0, 0.0, PI);
        let c = Circuit::from_gates(1, [h(), h()]).unwrap();
        // 2x2 product oracle: H·H computed by hand-built matrices.
        let hm = h().matrix();
        let oracle = hm.dot(&hm);
        let u = c.unitary().unwrap();
        assert!(max_abs_diff(&u, &oracle) < 1e-12);
        assert!(max_abs_diff(&u, &identity(2)) < 1e-12);
    }

    #[test]
    fn cnot_count_weights_swaps() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::swap(0, 1)]).unwrap();
        assert_eq!(c.cnot_count(), 4);
        assert_eq!(c.depth(), 2);
    }

    #[test]
    fn rejects_bad_gates() {
        let mut c = Circuit::new(2);
        assert!(matches!(
            c.push(Gate::cnot(0, 2)),
            Err(CircuitError::QubitOutOfRange { qubit: 2, .. })
        ));
        let not_unitary = Array2::from_elem((2, 2), linalg::ONE);
        assert!(matches!(
            Gate::opaque("bad", vec![0], not_unitary),
            Err(CircuitError::NotUnitary { .. })
        ));
        assert!(matches!(
            Gate::opaque("dup", vec![1, 1], identity(4)),
            Err(CircuitError::DuplicateQubit(1))
        ));
    }

    #[test]
    fn simulation_cap_is_enforced() {
        let c = Circuit::new(11);
        assert!(matches!(
            c.unitary(),
            Err(CircuitError::SimulationCap { num_qubits: 11, cap: 10 })
        ));
    }

    #[test]
    fn dependency_front_examples() {
        let chain = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap();
        assert_eq!(chain.dependency_front(&set(&[])), set(&[0]));

        let disjoint = Circuit::from_gates(4, [Gate::cnot(0, 1), Gate::cnot(2, 3)]).unwrap();
        assert_eq!(disjoint.dependency_front(&set(&[])), set(&[0, 1]));

        let c = Circuit::from_gates(
            3,
            [Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::cnot(0, 1)],
        )
        .unwrap();
        // Brute-force predecessor scan: gate j precedes gate i iff j < i and
        // they share a qubit.
        let brute = |done: &BTreeSet<usize>| -> BTreeSet<usize> {
            (0..c.len())
                .filter(|i| !done.contains(i))
                .filter(|&i| {
                    (0..i).all(|j| {
                        let shares = c.gates()[j]
                            .qubits()
                            .iter()
                            .any(|q| c.gates()[i].qubits().contains(q));
                        !shares || done.contains(&j)
                    })
                })
                .collect()
        };
        assert_eq!(brute(&set(&[0])), set(&[1]));
        assert_eq!(c.dependency_front(&set(&[0])), set(&[1]));
    }

    #[test]
    fn inverse_undoes_circuit() {
        let c = Circuit::from_gates(
            2,
            [
                Gate::u3(0, 0.3, 0.2, -1.0),
                Gate::cnot(0, 1),
                Gate::u3(1, 1.3, -0.2, 2.0),
                Gate::swap(0, 1),
            ],
        )
        .unwrap();
        let mut both = c.clone();
        both.extend(&c.inverse()).unwrap();
        assert!(max_abs_diff(&both.unitary().unwrap(), &identity(4)) < 1e-12);
    }
}
