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

//! Permutation-aware synthesis: synthesize `M(P_o) U M(P_i)` instead of `U`
//! and pick the cheapest permutation pair.

use rayon::prelude::*;

use super::{qsearch, target_width, SearchOutcome, SynthesisConfig, SynthesisError};
use crate::circuit::Circuit;
use crate::linalg::Matrix;
use crate::permutation::{permute_unitary, Permutation};
use crate::topology::SubTopology;

#[derive(Debug, Clone, PartialEq)]
pub struct PasResult {
    pub p_in: Permutation,
    pub p_out: Permutation,
    pub circuit: Circuit,
    pub distance: f64,
    /// qsearch invocations performed.
    pub calls: usize,
}

impl PasResult {
    pub fn cnot_count(&self) -> usize {
        self.circuit.cnot_count()
    }
}

/// qsearch on `M(p_out) · target · M(p_in)`.
pub fn synthesize_permuted(
    target: &Matrix,
    g: &SubTopology,
    p_in: &Permutation,
    p_out: &Permutation,
    cfg: &SynthesisConfig,
) -> Result<SearchOutcome, SynthesisError> {
    let permuted = permute_unitary(target, p_in, p_out)
        .map_err(|_| SynthesisError::Dimension(target.nrows(), 1 << p_in.size()))?;
    qsearch(&permuted, g, cfg)
}

type Candidate = (Permutation, Permutation, Result<SearchOutcome, SynthesisError>);

fn run_all(
    target: &Matrix,
    g: &SubTopology,
    pairs: Vec<(Permutation, Permutation)>,
    cfg: &SynthesisConfig,
) -> Vec<Candidate> {
    pairs
        .into_par_iter()
        .map(|(pi, po)| {
            let r = synthesize_permuted(target, g, &pi, &po, cfg);
            (pi, po, r)
        })
        .collect()
}

/// Minimum by (CNOT count, depth, P_i, P_o) over successful candidates.
fn best_of<'a>(cands: impl IntoIterator<Item = &'a Candidate>) -> Option<&'a Candidate> {
    cands
        .into_iter()
        .filter(|c| c.2.is_ok())
        .min_by(|a, b| {
            let (ra, rb) = (a.2.as_ref().unwrap(), b.2.as_ref().unwrap());
            (ra.cnot_count(), ra.circuit.depth(), &a.0, &a.1).cmp(&(
                rb.cnot_count(),
                rb.circuit.depth(),
                &b.0,
                &b.1,
            ))
        })
}

fn finish(best: Option<&Candidate>, cands: &[Candidate], calls: usize) -> Result<PasResult, SynthesisError> {
    match best {
        Some((pi, po, Ok(out))) => Ok(PasResult {
            p_in: pi.clone(),
            p_out: po.clone(),
            circuit: out.circuit.clone(),
            distance: out.distance,
            calls,
        }),
        _ => Err(cands
            .iter()
            .find_map(|c| c.2.clone().err())
            .unwrap_or(SynthesisError::NonFinite)),
    }
}

fn check(target: &Matrix) -> Result<usize, SynthesisError> {
    let k = target_width(target)?;
    if k > 3 {
        return Err(SynthesisError::TooWide(k));
    }
    Ok(k)
}

/// Input permutations first with the output fixed to identity, then output
/// permutations against the best input: `2 * k!` qsearch calls.
pub fn seqpas(
    target: &Matrix,
    g: &SubTopology,
    cfg: &SynthesisConfig,
) -> Result<PasResult, SynthesisError> {
    let k = check(target)?;
    let id = Permutation::identity(k);
    let inputs = Permutation::all(k).into_iter().map(|p| (p, id.clone())).collect();
    let phase1 = run_all(target, g, inputs, cfg);
    let p_in = best_of(&phase1).map_or_else(|| id.clone(), |c| c.0.clone());
    let outputs = Permutation::all(k).into_iter().map(|p| (p_in.clone(), p)).collect();
    let phase2 = run_all(target, g, outputs, cfg);
    let calls = phase1.len() + phase2.len();
    let all: Vec<Candidate> = phase1.into_iter().chain(phase2).collect();
    finish(best_of(&all), &all, calls)
}

/// Every `(P_i, P_o)` pair: `(k!)^2` qsearch calls.
pub fn fullpas(
    target: &Matrix,
    g: &SubTopology,
    cfg: &SynthesisConfig,
) -> Result<PasResult, SynthesisError> {
    let k = check(target)?;
    let perms = Permutation::all(k);
    let pairs = perms
        .iter()
        .flat_map(|pi| perms.iter().map(move |po| (pi.clone(), po.clone())))
        .collect();
    let all = run_all(target, g, pairs, cfg);
    finish(best_of(&all), &all, all.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::synthesis::hs_distance;

    #[test]
    fn swap_is_pure_relabeling() {
        let target = Gate::swap(0, 1).matrix();
        let r = fullpas(&target, &SubTopology::edge(), &SynthesisConfig::default()).unwrap();
        assert_eq!(r.cnot_count(), 0);
        assert_eq!(r.calls, 4);
        assert_eq!(r.p_in, Permutation::identity(2));
        assert_eq!(r.p_out.as_slice(), &[1, 0]);
        let s = seqpas(&target, &SubTopology::edge(), &SynthesisConfig::default()).unwrap();
        assert_eq!(s.cnot_count(), 0);
        assert_eq!(s.calls, 4);
    }

    #[test]
    fn result_implements_permuted_target() {
        let target = Gate::cnot(1, 0).matrix();
        let r = fullpas(&target, &SubTopology::edge(), &SynthesisConfig::default()).unwrap();
        let expect = permute_unitary(&target, &r.p_in, &r.p_out).unwrap();
        assert!(hs_distance(&expect, &r.circuit.unitary().unwrap()).unwrap() < 1e-10);
        assert_eq!(r.cnot_count(), 1);
    }
}
