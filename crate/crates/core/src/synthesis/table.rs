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

//! Per-block synthesis tables and their on-disk cache.
//!
//! Relabeling positions by `s` maps a circuit for `(G, P_i, P_o)` to one for
//! `(s G, P_i s^-1, s P_o)` with the same CNOT count. Every orbit of that
//! action on `k`-qubit keys has `k!` members, so only one key per orbit is
//! synthesized and the rest are derived.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{hs_distance, synthesize_permuted, SynthesisConfig, SynthesisError};
use crate::circuit::{emit_qasm, parse_qasm, Circuit};
use crate::linalg::Matrix;
use crate::partition::{Block, PartitionedCircuit};
use crate::permutation::{permute_circuit, permute_unitary, Permutation};
use crate::topology::SubTopology;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntryKey {
    pub topology: SubTopology,
    pub p_in: Permutation,
    pub p_out: Permutation,
}

impl EntryKey {
    pub fn new(topology: SubTopology, p_in: Permutation, p_out: Permutation) -> Self {
        EntryKey {
            topology,
            p_in,
            p_out,
        }
    }

    /// Key reached by relabeling positions through `s`.
    pub fn relabeled(&self, s: &Permutation) -> EntryKey {
        EntryKey {
            topology: self.topology.relabeled(s),
            p_in: self.p_in.compose(&s.inverse()).expect("same width"),
            p_out: s.compose(&self.p_out).expect("same width"),
        }
    }
}

/// A synthesized circuit implementing `M(P_o) U M(P_i)`. Failed syntheses
/// keep `circuit = None` and `cnot_count = FAILED`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub circuit: Option<Circuit>,
    pub cnot_count: usize,
    pub distance: f64,
    pub derived_from: Option<EntryKey>,
}

impl TableEntry {
    pub const FAILED: usize = usize::MAX;

    pub fn is_failed(&self) -> bool {
        self.circuit.is_none()
    }

    fn failed(derived_from: Option<EntryKey>) -> Self {
        TableEntry {
            circuit: None,
            cnot_count: Self::FAILED,
            distance: f64::INFINITY,
            derived_from,
        }
    }
}

/// Which `(P_i, P_o)` pairs a table covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermutationScope {
    /// All `k! * k!` pairs.
    Full,
    /// Only pairs with `P_o P_i = id`, i.e. pure relabelings of the block.
    Relabel,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockTable {
    pub entries: BTreeMap<EntryKey, TableEntry>,
}

impl BlockTable {
    pub fn get(&self, key: &EntryKey) -> Option<&TableEntry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResynthesisReport {
    pub direct_calls: usize,
    pub derived: usize,
    pub failed: usize,
    pub cached: bool,
}

/// `C[b][G][(P_i, P_o)]` for every block of a partitioned circuit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthesisTable {
    pub blocks: BTreeMap<usize, BlockTable>,
}

impl SynthesisTable {
    pub fn get(&self, block: usize, key: &EntryKey) -> Option<&TableEntry> {
        self.blocks.get(&block).and_then(|t| t.get(key))
    }

    /// Resynthesizes every block against the sub-topologies in `feasible`
    /// of its width. Blocks with identical unitaries share one table.
    pub fn build(
        pc: &PartitionedCircuit,
        feasible: &[SubTopology],
        scope: PermutationScope,
        cfg: &SynthesisConfig,
        cache: Option<&TableCache>,
    ) -> Result<(SynthesisTable, ResynthesisReport), SynthesisError> {
        let mut unique: BTreeMap<String, (usize, Vec<usize>)> = BTreeMap::new();
        for b in pc.blocks() {
            let feas = of_width(feasible, b.width());
            let h = block_hash(&b.unitary(), &feas, scope, cfg);
            unique.entry(h).or_insert((b.index, Vec::new())).1.push(b.index);
        }
        let jobs: Vec<(&String, &(usize, Vec<usize>))> = unique.iter().collect();
        let results: Vec<Result<(BlockTable, ResynthesisReport), SynthesisError>> = jobs
            .par_iter()
            .map(|(_, (rep, _))| {
                let b = &pc.blocks()[*rep];
                resynthesize_cached(b, &of_width(feasible, b.width()), scope, cfg, cache)
            })
            .collect();
        let mut table = SynthesisTable::default();
        let mut total = ResynthesisReport::default();
        for ((_, (_, members)), r) in jobs.into_iter().zip(results) {
            let (bt, report) = r?;
            total.direct_calls += report.direct_calls;
            total.derived += report.derived;
            total.failed += report.failed;
            for &m in members {
                table.blocks.insert(m, bt.clone());
            }
        }
        Ok((table, total))
    }
}

fn of_width(feas: &[SubTopology], k: usize) -> Vec<SubTopology> {
    feas.iter().filter(|g| g.k() == k).cloned().collect()
}

fn resynthesize_cached(
    b: &Block,
    feas: &[SubTopology],
    scope: PermutationScope,
    cfg: &SynthesisConfig,
    cache: Option<&TableCache>,
) -> Result<(BlockTable, ResynthesisReport), SynthesisError> {
    let Some(cache) = cache else {
        return resynthesize_scoped(b, feas, scope, cfg);
    };
    let hash = block_hash(&b.unitary(), feas, scope, cfg);
    if let Some(t) = cache.load(&hash)? {
        let report = ResynthesisReport {
            cached: true,
            ..Default::default()
        };
        return Ok((t, report));
    }
    let (t, report) = resynthesize_scoped(b, feas, scope, cfg)?;
    cache.store(&hash, &t)?;
    Ok((t, report))
}

/// Table for one block over every feasible sub-topology and every
/// permutation pair.
pub fn resynthesize_block(
    b: &Block,
    feas: &[SubTopology],
    cfg: &SynthesisConfig,
) -> Result<(BlockTable, ResynthesisReport), SynthesisError> {
    resynthesize_scoped(b, feas, PermutationScope::Full, cfg)
}

pub fn resynthesize_scoped(
    b: &Block,
    feas: &[SubTopology],
    scope: PermutationScope,
    cfg: &SynthesisConfig,
) -> Result<(BlockTable, ResynthesisReport), SynthesisError> {
    let k = b.width();
    if k > 3 {
        return Err(SynthesisError::TooWide(k));
    }
    let u = b.unitary();
    let topologies: Vec<SubTopology> = if k == 1 {
        vec![SubTopology::single()]
    } else {
        feas.iter().filter(|g| g.k() == k).cloned().collect()
    };
    let allowed: BTreeSet<&SubTopology> = topologies.iter().collect();
    let perms = Permutation::all(k);

    let mut covered = BTreeSet::new();
    let mut generators = Vec::new();
    for g in &topologies {
        for pi in &perms {
            for po in &perms {
                if scope == PermutationScope::Relabel && !po.compose(pi).unwrap().is_identity() {
                    continue;
                }
                let key = EntryKey::new(g.clone(), pi.clone(), po.clone());
                if covered.contains(&key) {
                    continue;
                }
                for s in &perms {
                    let derived = key.relabeled(s);
                    if allowed.contains(&derived.topology) {
                        covered.insert(derived);
                    }
                }
                generators.push(key);
            }
        }
    }

    let outcomes: Vec<_> = generators
        .par_iter()
        .map(|key| synthesize_permuted(&u, &key.topology, &key.p_in, &key.p_out, cfg))
        .collect();

    let mut table = BlockTable::default();
    let mut report = ResynthesisReport {
        direct_calls: generators.len(),
        ..Default::default()
    };
    for (key, outcome) in generators.iter().zip(outcomes) {
        let source = match outcome {
            Ok(out) => TableEntry {
                cnot_count: out.circuit.cnot_count(),
                circuit: Some(out.circuit),
                distance: out.distance,
                derived_from: None,
            },
            Err(SynthesisError::ThresholdNotReached { .. }) => {
                report.failed += 1;
                TableEntry::failed(None)
            }
            Err(e) => return Err(e),
        };
        for s in perms.iter().filter(|s| !s.is_identity()) {
            let derived_key = key.relabeled(s);
            if !allowed.contains(&derived_key.topology) || table.entries.contains_key(&derived_key) {
                continue;
            }
            let entry = match &source.circuit {
                Some(c) => {
                    let circuit = permute_circuit(c, s).expect("same width");
                    let distance = entry_error(&u, &derived_key, &circuit).unwrap_or(f64::INFINITY);
                    TableEntry {
                        cnot_count: source.cnot_count,
                        circuit: Some(circuit),
                        distance,
                        derived_from: Some(key.clone()),
                    }
                }
                None => TableEntry::failed(Some(key.clone())),
            };
            report.derived += 1;
            table.entries.insert(derived_key, entry);
        }
        table.entries.insert(key.clone(), source);
    }
    Ok((table, report))
}

/// HS distance between `M(P_o) U M(P_i)` and the circuit's unitary.
pub fn entry_error(u: &Matrix, key: &EntryKey, circuit: &Circuit) -> Option<f64> {
    let expect = permute_unitary(u, &key.p_in, &key.p_out).ok()?;
    let got = circuit.unitary_with_cap(circuit.num_qubits()).ok()?;
    hs_distance(&expect, &got).ok()
}

/// Cache key of a block table: rounded unitary, sub-topologies, scope and
/// configuration.
pub fn block_hash(u: &Matrix, feas: &[SubTopology], scope: PermutationScope, cfg: &SynthesisConfig) -> String {
    let mut h = Sha256::new();
    for z in u.iter() {
        // Adding 0.0 folds -0 into +0 so the text is canonical.
        h.update(format!("{:.9},{:.9};", z.re + 0.0, z.im + 0.0).as_bytes());
    }
    for g in feas {
        h.update(g.to_string().as_bytes());
    }
    h.update(format!("{scope:?}").as_bytes());
    h.update(cfg.fingerprint().as_bytes());
    hex::encode(&h.finalize()[..16])
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: EntryKey,
    qasm: Option<String>,
    cnot_count: usize,
    distance: Option<f64>,
    derived_from: Option<EntryKey>,
}

/// Directory of `<block hash>/entries.jsonl` files, one JSON record per
/// table entry. Writes go through a temporary file and a rename, so
/// concurrent writers of the same block leave one complete file.
#[derive(Debug, Clone)]
pub struct TableCache {
    root: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl TableCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        TableCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn file(&self, hash: &str) -> PathBuf {
        self.root.join(hash).join("entries.jsonl")
    }

    pub fn load(&self, hash: &str) -> Result<Option<BlockTable>, SynthesisError> {
        let path = self.file(hash);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(SynthesisError::Cache(format!("{}: {e}", path.display()))),
        };
        let mut table = BlockTable::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let Ok(rec) = serde_json::from_str::<Record>(line) else {
                // A damaged file is treated as a miss and rebuilt.
                return Ok(None);
            };
            let circuit = match rec.qasm {
                Some(q) => match parse_qasm(&q) {
                    Ok(c) => Some(c),
                    Err(_) => return Ok(None),
                },
                None => None,
            };
            table.entries.insert(
                rec.key,
                TableEntry {
                    circuit,
                    cnot_count: rec.cnot_count,
                    distance: rec.distance.unwrap_or(f64::INFINITY),
                    derived_from: rec.derived_from,
                },
            );
        }
        Ok(Some(table))
    }

    pub fn store(&self, hash: &str, table: &BlockTable) -> Result<(), SynthesisError> {
        let io = |e: std::io::Error| SynthesisError::Cache(e.to_string());
        let dir = self.root.join(hash);
        fs::create_dir_all(&dir).map_err(io)?;
        let mut body = String::new();
        for (key, e) in &table.entries {
            let rec = Record {
                key: key.clone(),
                qasm: e
                    .circuit
                    .as_ref()
                    .map(|c| emit_qasm(c).expect("table circuits hold no opaque gates")),
                cnot_count: e.cnot_count,
                distance: e.distance.is_finite().then_some(e.distance),
                derived_from: e.derived_from.clone(),
            };
            body.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            body.push('\n');
        }
        let tmp = dir.join(format!(
            "entries.{}.{}.tmp",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(body.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, self.file(hash)).map_err(io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::topology::enumerate_subtopologies;

    fn block(c: Circuit) -> Block {
        let qubits: Vec<usize> = (0..c.num_qubits()).collect();
        Block {
            index: 0,
            source: (0..c.len()).collect(),
            qubits,
            gates: c,
        }
    }

    #[test]
    fn orbit_keys_are_distinct_and_closed() {
        let key = EntryKey::new(
            SubTopology::path3(1),
            Permutation::new(vec![1, 2, 0]).unwrap(),
            Permutation::identity(3),
        );
        let orbit: BTreeSet<EntryKey> = Permutation::all(3).iter().map(|s| key.relabeled(s)).collect();
        assert_eq!(orbit.len(), 6);
        for k in &orbit {
            let again: BTreeSet<EntryKey> = Permutation::all(3).iter().map(|s| k.relabeled(s)).collect();
            assert_eq!(again, orbit);
        }
    }

    #[test]
    fn two_qubit_table_has_four_entries_from_two_calls() {
        let b = block(Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap());
        let (t, r) = resynthesize_block(&b, &enumerate_subtopologies(2).unwrap(), &SynthesisConfig::default())
            .unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(r.direct_calls, 2);
        let u = b.unitary();
        for (k, e) in &t.entries {
            assert!(entry_error(&u, k, e.circuit.as_ref().unwrap()).unwrap() < 1e-8);
        }
    }

    #[test]
    fn relabel_scope_keeps_only_relabelings() {
        let b = block(Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap());
        let feas = enumerate_subtopologies(3).unwrap();
        let (t, r) = resynthesize_scoped(&b, &feas, PermutationScope::Relabel, &SynthesisConfig::default())
            .unwrap();
        assert_eq!(t.len(), 24);
        assert_eq!(r.direct_calls, 4);
        assert!(t.entries.keys().all(|k| k.p_out.compose(&k.p_in).unwrap().is_identity()));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path());
        let b = block(Circuit::from_gates(2, [Gate::cnot(1, 0), Gate::u3(0, 0.3, 0.1, 0.2)]).unwrap());
        let feas = enumerate_subtopologies(2).unwrap();
        let cfg = SynthesisConfig::default();
        let (t, r) = resynthesize_cached(&b, &feas, PermutationScope::Full, &cfg, Some(&cache)).unwrap();
        assert!(!r.cached);
        let (again, r2) = resynthesize_cached(&b, &feas, PermutationScope::Full, &cfg, Some(&cache)).unwrap();
        assert!(r2.cached);
        assert_eq!(again.len(), t.len());
        for (k, e) in &t.entries {
            let c = again.get(k).unwrap();
            assert_eq!(c.cnot_count, e.cnot_count);
            assert_eq!(c.circuit, e.circuit);
        }
    }
}
