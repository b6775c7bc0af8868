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

//! Dense complex matrices and the gate-embedding kernels shared by the
//! simulator, the permutation algebra and the instantiation engine.
//!
//! Bit convention: qubit 0 is the most significant bit of a basis-state
//! index, so on `n` qubits qubit `q` owns bit `n - 1 - q`.

use ndarray::Array2;
use num_complex::Complex64;

pub type Matrix = Array2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(dim: usize) -> Matrix {
    Array2::from_shape_fn((dim, dim), |(r, c)| if r == c { ONE } else { ZERO })
}

pub fn dagger(m: &Matrix) -> Matrix {
    m.t().mapv(|z| z.conj())
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    a.dot(b)
}

/// `max |(U^dagger U - I)_{rc}|`.
pub fn unitarity_defect(m: &Matrix) -> f64 {
    let prod = dagger(m).dot(m);
    let dim = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[[r, c]] - target).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_power_of_two_square(m: &Matrix) -> Option<usize> {
    let (r, c) = m.dim();
    if r != c || r == 0 || !r.is_power_of_two() {
        return None;
    }
    Some(r.trailing_zeros() as usize)
}

/// Kronecker product `a ⊗ b` (`a` acts on the more significant bits).
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(r, c)| {
        a[[r / br, c / bc]] * b[[r % br, c % bc]]
    })
}

/// Standard `u3(theta, phi, lambda)` matrix.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

/// Index offsets of the `2^k` local basis states of `qubits` inside an
/// `n`-qubit index, listed in local order (first listed qubit is the local
/// most significant bit).
pub(crate) fn local_offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|local| {
            let mut off = 0;
            for (j, &q) in qubits.iter().enumerate() {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    off |= 1 << (n - 1 - q);
                }
            }
            off
        })
        .collect()
}

/// Left-multiplies `m` (a `2^n x cols` matrix) by `local ⊗ I`, where the
/// `2^k x 2^k` `local` acts on `qubits`.
pub fn apply_left(m: &mut Matrix, local: &Matrix, qubits: &[usize], n: usize) {
    let dim = 1usize << n;
    debug_assert_eq!(m.nrows(), dim);
    let offsets = local_offsets(qubits, n);
    let mask: usize = offsets.iter().fold(0, |acc, o| acc | o);
    let ldim = offsets.len();
    let mut gathered = vec![ZERO; ldim];
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        for col in 0..m.ncols() {
            for (slot, off) in gathered.iter_mut().zip(&offsets) {
                *slot = m[[base | off, col]];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, g) in gathered.iter().enumerate() {
                    acc += local[[r, c]] * g;
                }
                m[[base | off, col]] = acc;
            }
        }
    }
}

/// Swaps the rows of `m` for the basis states related by exchanging bits of
/// qubits `a` and `b`.
pub fn apply_swap_rows(m: &mut Matrix, a: usize, b: usize, n: usize) {
    let ba = 1usize << (n - 1 - a);
    let bb = 1usize << (n - 1 - b);
    for idx in 0..(1usize << n) {
        if idx & ba != 0 && idx & bb == 0 {
            let other = (idx & !ba) | bb;
            for col in 0..m.ncols() {
                m.swap([idx, col], [other, col]);
            }
        }
    }
}

/// Left-multiplies by CNOT(control, target): flips the target bit of every
/// row whose control bit is set.
pub fn apply_cnot_rows(m: &mut Matrix, control: usize, target: usize, n: usize) {
    let bc = 1usize << (n - 1 - control);
    let bt = 1usize << (n - 1 - target);
    for idx in 0..(1usize << n) {
        if idx & bc != 0 && idx & bt == 0 {
            let other = idx | bt;
            for col in 0..m.ncols() {
                m.swap([idx, col], [other, col]);
            }
        }
    }
}

/// The `2^n` unitary of a single gate matrix embedded on `qubits`.
pub fn embed(local: &Matrix, qubits: &[usize], n: usize) -> Matrix {
    let mut m = identity(1 << n);
    apply_left(&mut m, local, qubits, n);
    m
}
