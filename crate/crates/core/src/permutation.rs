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

//! Wire permutations and their action on unitaries and circuits.
//!
//! A [`Permutation`] stores `map[i]` = the position wire `i` is sent to. Its
//! matrix `M(p)` sends the basis state `|b_0 … b_{k-1}⟩` to the state whose
//! bit at position `p(i)` is `b_i`, so `M(a∘b) = M(a)·M(b)` and
//! `M(p⁻¹) = M(p)ᵀ`.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError};
use crate::linalg::{self, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PermutationError {
    #[error("{0:?} is not a bijection on 0..{len}", len = .0.len())]
    NotBijection(Vec<usize>),
    #[error("permutation sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("matrix of dimension {got} does not match a {k}-wire permutation")]
    Dimension { got: usize, k: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PermutationError;

    fn try_from(map: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, PermutationError> {
        let mut seen = vec![false; map.len()];
        for &v in &map {
            if v >= map.len() || seen[v] {
                return Err(PermutationError::NotBijection(map));
            }
            seen[v] = true;
        }
        Ok(Permutation(map))
    }

    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    /// All `k!` permutations in lexicographic order.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..k).collect();
        loop {
            out.push(Permutation(current.clone()));
            // Next lexicographic permutation.
            let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..k).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermutationError> {
        if self.size() != other.size() {
            return Err(PermutationError::SizeMismatch(self.size(), other.size()));
        }
        Ok(Permutation(other.0.iter().map(|&i| self.0[i]).collect()))
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.size()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    /// Image of a basis-state index under `M(p)`.
    pub fn permute_index(&self, index: usize) -> usize {
        let k = self.size();
        let mut out = 0;
        for i in 0..k {
            if (index >> (k - 1 - i)) & 1 == 1 {
                out |= 1 << (k - 1 - self.0[i]);
            }
        }
        out
    }

    /// Dense `2^k x 2^k` permutation matrix `M(p)`.
    pub fn matrix(&self) -> Matrix {
        let dim = 1usize << self.size();
        let mut m = Array2::from_elem((dim, dim), linalg::ZERO);
        for col in 0..dim {
            m[[self.permute_index(col), col]] = linalg::ONE;
        }
        m
    }
}

/// `M(p_o) · U · M(p_i)`.
pub fn permute_unitary(
    u: &Matrix,
    p_i: &Permutation,
    p_o: &Permutation,
) -> Result<Matrix, PermutationError> {
    if p_i.size() != p_o.size() {
        return Err(PermutationError::SizeMismatch(p_i.size(), p_o.size()));
    }
    let k = p_i.size();
    let dim = 1usize << k;
    if u.dim() != (dim, dim) {
        return Err(PermutationError::Dimension { got: u.nrows(), k });
    }
    // Permutation matrices only reorder entries: (M_o U M_i)[o(r), c'] where
    // M_i sends column c to i(c).
    let mut out = Array2::from_elem((dim, dim), linalg::ZERO);
    for r in 0..dim {
        for c in 0..dim {
            out[[p_o.permute_index(r), c]] = u[[r, p_i.permute_index(c)]];
        }
    }
    Ok(out)
}

/// Relabels qubit `i` to `p(i)` in every gate; the resulting unitary is
/// `M(p) · U · M(p)†`.
pub fn permute_circuit(c: &Circuit, p: &Permutation) -> Result<Circuit, PermutationError> {
    if p.size() != c.num_qubits() {
        return Err(PermutationError::SizeMismatch(p.size(), c.num_qubits()));
    }
    Ok(c.relabeled(c.num_qubits(), |q| p.image(q))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::linalg::{dagger, identity, max_abs_diff};

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn algebra_examples() {
        let q = p(&[2, 0, 1]);
        assert_eq!(Permutation::identity(3).compose(&q).unwrap(), q);
        assert_eq!(p(&[1, 2, 0]).inverse(), p(&[2, 0, 1]));
        assert!(p(&[1, 0, 2]).compose(&p(&[1, 0, 2])).unwrap().is_identity());
        assert!(matches!(
            p(&[0, 1]).compose(&q),
            Err(PermutationError::SizeMismatch(2, 3))
        ));
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert_eq!(Permutation::all(3).len(), 6);
        assert_eq!(p(&[1, 2, 0]).to_string(), "[1,2,0]");
    }

    #[test]
    fn swap_and_identity_matrices() {
        assert!(max_abs_diff(&Permutation::identity(2).matrix(), &identity(4)) < 1e-15);
        let swap = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap().unitary().unwrap();
        assert!(max_abs_diff(&p(&[1, 0]).matrix(), &swap) < 1e-15);
    }

    #[test]
    fn three_cycle_by_basis_enumeration() {
        let m = p(&[1, 2, 0]).matrix();
        for b in 0..8usize {
            let bits = [(b >> 2) & 1, (b >> 1) & 1, b & 1];
            // Bit i of the source lands at position map[i].
            let mut image_bits = [0; 3];
            image_bits[1] = bits[0];
            image_bits[2] = bits[1];
            image_bits[0] = bits[2];
            let image = image_bits[0] << 2 | image_bits[1] << 1 | image_bits[2];
            for r in 0..8 {
                let expected = if r == image { 1.0 } else { 0.0 };
                assert_eq!(m[[r, b]].re, expected);
                assert_eq!(m[[r, b]].im, 0.0);
            }
        }
    }

    #[test]
    fn permute_unitary_examples() {
        let swap = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap().unitary().unwrap();
        let cx01 = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap().unitary().unwrap();
        let cx10 = Circuit::from_gates(2, [Gate::cnot(1, 0)]).unwrap().unitary().unwrap();
        let id2 = Permutation::identity(2);
        let flip = p(&[1, 0]);

        assert!(max_abs_diff(&permute_unitary(&cx01, &id2, &id2).unwrap(), &cx01) < 1e-15);

        let got = permute_unitary(&swap, &id2, &flip).unwrap();
        let oracle = flip.matrix().dot(&swap).dot(&id2.matrix());
        assert!(max_abs_diff(&got, &oracle) < 1e-15);
        assert!(max_abs_diff(&got, &identity(4)) < 1e-15);

        let got = permute_unitary(&cx01, &flip, &flip).unwrap();
        let oracle = flip.matrix().dot(&cx01).dot(&flip.matrix());
        assert!(max_abs_diff(&got, &oracle) < 1e-15);
        assert!(max_abs_diff(&got, &cx10) < 1e-15);

        assert!(matches!(
            permute_unitary(&cx01, &Permutation::identity(3), &Permutation::identity(3)),
            Err(PermutationError::Dimension { got: 4, k: 3 })
        ));
    }

    #[test]
    fn permute_circuit_relabels_and_conjugates() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        assert_eq!(permute_circuit(&c, &Permutation::identity(2)).unwrap(), c);
        let flipped = permute_circuit(&c, &p(&[1, 0])).unwrap();
        assert_eq!(flipped.gates(), &[Gate::cnot(1, 0)]);

        let c = Circuit::from_gates(
            3,
            [
                Gate::u3(0, 0.4, 1.0, -0.3),
                Gate::cnot(0, 2),
                Gate::u3(2, 1.4, 0.1, 0.5),
                Gate::cnot(1, 2),
                Gate::u3(1, -0.4, 2.0, 0.3),
            ],
        )
        .unwrap();
        let perm = p(&[2, 0, 1]);
        let lhs = permute_circuit(&c, &perm).unwrap().unitary().unwrap();
        let m = perm.matrix();
        let rhs = m.dot(&c.unitary().unwrap()).dot(&dagger(&m));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }
}
