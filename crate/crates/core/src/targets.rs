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

//! Named benchmark circuits built from their textbook definitions.

use std::f64::consts::PI;

use crate::circuit::qasm::{controlled_phase, toffoli};
use crate::circuit::{Circuit, Gate};

pub const TARGET_NAMES: &[&str] = &["qft3", "qft4", "qft5", "ccx", "cswap", "swap2", "qaoa12"];

fn hadamard(q: usize) -> Gate {
    Gate::u3(q, PI / 2.0, 0.0, PI)
}

/// Quantum Fourier transform on `n` qubits without the closing bit-reversal
/// swaps. Qubit 0 is processed first.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        c.push(hadamard(j)).unwrap();
        for m in j + 1..n {
            let lambda = PI / f64::from(1u32 << (m - j));
            for g in controlled_phase(m, j, lambda) {
                c.push(g).unwrap();
            }
        }
    }
    c
}

/// Toffoli with controls 0, 1 and target 2.
pub fn ccx() -> Circuit {
    Circuit::from_gates(3, toffoli(0, 1, 2)).unwrap()
}

/// Fredkin with control 0 exchanging 1 and 2.
pub fn cswap() -> Circuit {
    let mut gates = vec![Gate::cnot(2, 1)];
    gates.extend(toffoli(0, 1, 2));
    gates.push(Gate::cnot(2, 1));
    Circuit::from_gates(3, gates).unwrap()
}

pub fn swap2() -> Circuit {
    Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap()
}

/// One-layer QAOA on a path graph: `exp(-i g Z_j Z_{j+1})` on every
/// neighbouring pair followed by an `rx` mixer on every qubit. Angles are
/// fixed so the circuit is reproducible.
pub fn qaoa_chain(n: usize) -> Circuit {
    let (gamma, beta) = (0.4, 0.7);
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(hadamard(q)).unwrap();
    }
    for q in 0..n.saturating_sub(1) {
        c.push(Gate::cnot(q, q + 1)).unwrap();
        c.push(Gate::u3(q + 1, 0.0, 0.0, 2.0 * gamma)).unwrap();
        c.push(Gate::cnot(q, q + 1)).unwrap();
    }
    for q in 0..n {
        c.push(Gate::u3(q, 2.0 * beta, -PI / 2.0, PI / 2.0)).unwrap();
    }
    c
}

/// Looks up a built-in target by name, also accepting `qftN` and `qaoaN`
/// for any `N`.
pub fn by_name(name: &str) -> Option<Circuit> {
    match name {
        "ccx" | "toffoli" => Some(ccx()),
        "cswap" | "fredkin" => Some(cswap()),
        "swap2" | "swap" => Some(swap2()),
        _ => {
            let sized = |prefix: &str| {
                name.strip_prefix(prefix)
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1)
            };
            sized("qft").map(qft).or_else(|| sized("qaoa").map(qaoa_chain))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::synthesis::hs_distance;
    use num_complex::Complex64;

    /// `F[j][k] = w^(j*k) / sqrt(N)` with the output bits reversed, which is
    /// what the circuit computes when the final swaps are left out.
    fn qft_oracle(n: usize) -> crate::linalg::Matrix {
        let dim = 1usize << n;
        let rev = |x: usize| (0..n).fold(0, |acc, b| acc | (((x >> b) & 1) << (n - 1 - b)));
        let mut m = ndarray::Array2::from_elem((dim, dim), ZERO);
        for j in 0..dim {
            for k in 0..dim {
                let angle = 2.0 * PI * (j * k) as f64 / dim as f64;
                m[[rev(j), k]] = Complex64::from_polar(1.0 / (dim as f64).sqrt(), angle);
            }
        }
        m
    }

    #[test]
    fn qft_matches_dft_matrix() {
        for n in 1..=4 {
            let u = qft(n).unitary().unwrap();
            assert!(hs_distance(&qft_oracle(n), &u).unwrap() < 1e-12, "n = {n}");
        }
        assert_eq!(qft(3).cnot_count(), 6);
        assert_eq!(qft(5).cnot_count(), 20);
    }

    #[test]
    fn cswap_permutes_basis() {
        let u = cswap().unitary().unwrap();
        for x in 0..8usize {
            let y = if x & 4 != 0 { (x & 4) | ((x & 1) << 1) | ((x >> 1) & 1) } else { x };
            assert!((u[[y, x]].norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(cswap().cnot_count(), 8);
        assert_eq!(ccx().cnot_count(), 6);
    }

    #[test]
    fn qaoa_chain_interacts_with_neighbours_only() {
        let c = qaoa_chain(12);
        let pairs = c.interaction_pairs();
        assert_eq!(pairs.len(), 11);
        assert!(pairs.iter().all(|&(a, b)| b == a + 1));
    }

    #[test]
    fn lookup() {
        for name in TARGET_NAMES {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert!(by_name("qft0").is_none());
        assert!(by_name("bogus").is_none());
    }
}
