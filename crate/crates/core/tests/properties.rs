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


use pam_core::circuit::{emit_qasm, parse_qasm, Circuit, Gate};
use pam_core::linalg::max_abs_diff;
use pam_core::pam::MappingState;
use pam_core::partition::quick_partition;
use pam_core::permutation::Permutation;
use pam_core::verify::hierarchical_bound;
use proptest::prelude::*;

/// `(is_cnot, a, b, angles)` tuples folded into a circuit on `n` qubits.
fn circuit(n: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    let gate = (any::<bool>(), 0..n, 1..n.max(2), prop::array::uniform3(-3.2f64..3.2));
    prop::collection::vec(gate, 0..max_gates).prop_map(move |items| {
        let mut c = Circuit::new(n);
        for (cnot, a, off, [t, p, l]) in items {
            let g = if cnot && n > 1 {
                Gate::cnot(a, (a + off) % n)
            } else {
                Gate::u3(a, t, p, l)
            };
            c.push(g).unwrap();
        }
        c
    })
}

fn permutation(k: usize) -> impl Strategy<Value = Permutation> {
    Just((0..k).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

/// Moves the bit at position `i` (MSB first) to position `p(i)` by string
/// manipulation.
fn permute_bits(p: &Permutation, index: usize) -> usize {
    let k = p.size();
    let bits: Vec<char> = format!("{index:0k$b}").chars().collect();
    let mut out = vec!['0'; k];
    for (i, &b) in bits.iter().enumerate() {
        out[p.image(i)] = b;
    }
    usize::from_str_radix(&out.iter().collect::<String>(), 2).unwrap()
}

proptest! {
    #[test]
    fn permute_index_moves_bits(p in (1usize..=5).prop_flat_map(permutation), seed in any::<usize>()) {
        let index = seed % (1 << p.size());
        prop_assert_eq!(p.permute_index(index), permute_bits(&p, index));
    }

    #[test]
    fn composition_is_associative(
        (a, b, c) in (1usize..=5).prop_flat_map(|k| (permutation(k), permutation(k), permutation(k)))
    ) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
    }

    #[test]
    fn qasm_round_trip_preserves_unitary(c in (1usize..=4).prop_flat_map(|n| circuit(n, 24))) {
        let text = emit_qasm(&c).unwrap();
        let back = parse_qasm(&text).unwrap();
        prop_assert_eq!(back.num_qubits(), c.num_qubits());
        let diff = max_abs_diff(&back.unitary().unwrap(), &c.unitary().unwrap());
        prop_assert!(diff < 1e-9, "differs by {}", diff);
    }

    #[test]
    fn partition_covers_and_reconstructs(c in (1usize..=6).prop_flat_map(|n| circuit(n, 40)), k in 2usize..=3) {
        let pc = quick_partition(&c, k);
        let mut sources: Vec<usize> = pc.blocks().iter().flat_map(|b| b.source.clone()).collect();
        sources.sort_unstable();
        prop_assert_eq!(sources, (0..c.len()).collect::<Vec<_>>());
        prop_assert!(pc.blocks().iter().all(|b| b.width() <= k && !b.gates.is_empty()));
        for b in 0..pc.len() {
            prop_assert!(pc.predecessors(b).iter().all(|&p| p < b));
        }
        let diff = max_abs_diff(&pc.to_circuit().unitary().unwrap(), &c.unitary().unwrap());
        prop_assert!(diff < 1e-10);
    }

    #[test]
    fn swaps_keep_mapping_a_bijection(
        (n, extra, seed) in (1usize..=6, 0usize..=3, any::<u64>()),
        swaps in prop::collection::vec((0usize..9, 0usize..9), 0..20),
    ) {
        let total = n + extra;
        let mut m = MappingState::random(n, total, seed);
        for (a, b) in swaps {
            let (a, b) = (a % total, b % total);
            if a != b {
                let before = (m.logical_at(a), m.logical_at(b));
                m.swap_physical(a, b);
                prop_assert_eq!((m.logical_at(b), m.logical_at(a)), before);
            }
        }
        let mut phys: Vec<usize> = (0..n).map(|l| m.phys(l)).collect();
        phys.sort_unstable();
        phys.dedup();
        prop_assert_eq!(phys.len(), n);
        prop_assert!(phys.iter().all(|&p| p < total));
    }

    #[test]
    fn hierarchical_bound_dominates_parts(errors in prop::collection::vec(0.0f64..1e-3, 0..12)) {
        let bound = hierarchical_bound(&errors);
        let total: f64 = errors.iter().sum();
        prop_assert!(bound + 1e-18 >= total);
        prop_assert!(errors.iter().all(|&e| bound + 1e-18 >= e));
    }
}
