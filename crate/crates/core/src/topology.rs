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

//! Coupling graphs, hop distances and the labeled sub-topologies a block may
//! be synthesized against.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::permutation::Permutation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("edge ({0}, {1}) is a self loop")]
    SelfLoop(usize, usize),
    #[error("edge ({0}, {1}) references a qubit outside 0..{2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("coupling graph is disconnected")]
    Disconnected,
    #[error("coupling graph has no qubits")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid coupling JSON: {0}")]
    Json(String),
    #[error("unknown coupling preset `{0}`")]
    UnknownPreset(String),
    #[error("sub-topologies are enumerated for k in {{2, 3}}, got {0}")]
    UnsupportedWidth(usize),
    #[error("placement {0:?} repeats a physical qubit")]
    RepeatedQubit(Vec<usize>),
    #[error("placement {0:?} induces a disconnected sub-topology")]
    DisconnectedPlacement(Vec<usize>),
}

/// Undirected, simple, connected device connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    num_physical: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct CouplingJson {
    num_physical: usize,
    edges: Vec<[usize; 2]>,
}

impl CouplingGraph {
    /// Duplicate edges (in either orientation) are merged.
    pub fn new(
        num_physical: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        if num_physical == 0 {
            return Err(TopologyError::Empty);
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(TopologyError::SelfLoop(u, v));
            }
            if u >= num_physical || v >= num_physical {
                return Err(TopologyError::EdgeOutOfRange(u, v, num_physical));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut adjacency = vec![Vec::new(); num_physical];
        for &(u, v) in &set {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let g = CouplingGraph {
            num_physical,
            edges: set,
            adjacency,
        };
        if bfs(&g.adjacency, 0).iter().any(|d| d.is_none()) {
            return Err(TopologyError::Disconnected);
        }
        Ok(g)
    }

    /// One `u v` pair per line, 0-based, `#` starts a comment. The qubit
    /// count is one more than the largest index mentioned.
    pub fn from_edge_list(text: &str) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        let mut max_q = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| TopologyError::Parse {
                line: idx + 1,
                message,
            };
            let nums: Vec<&str> = line.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(parse_err(format!("expected `u v`, got `{line}`")));
            }
            let u: usize = nums[0]
                .parse()
                .map_err(|_| parse_err(format!("bad qubit index `{}`", nums[0])))?;
            let v: usize = nums[1]
                .parse()
                .map_err(|_| parse_err(format!("bad qubit index `{}`", nums[1])))?;
            max_q = Some(max_q.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = max_q.map_or(0, |m| m + 1);
        CouplingGraph::new(n, edges)
    }

    /// `{"num_physical": n, "edges": [[u, v], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let data: CouplingJson =
            serde_json::from_str(text).map_err(|e| TopologyError::Json(e.to_string()))?;
        CouplingGraph::new(data.num_physical, data.edges.into_iter().map(|[u, v]| (u, v)))
    }

    pub fn to_json(&self) -> String {
        let data = CouplingJson {
            num_physical: self.num_physical,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        };
        serde_json::to_string(&data).expect("coupling graph serializes")
    }

    /// Named presets: `line-N`, `ring-N`, `complete-N`, `grid-AxB`,
    /// `heavy-hex-27`.
    pub fn preset(name: &str) -> Result<Self, TopologyError> {
        let unknown = || TopologyError::UnknownPreset(name.to_string());
        let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
        if name == "heavy-hex-27" || name == "heavy-hex" {
            return CouplingGraph::new(27, HEAVY_HEX_27.iter().copied());
        }
        let (kind, arg) = name.rsplit_once('-').ok_or_else(unknown)?;
        match kind {
            "line" => Ok(CouplingGraph::line(num(arg)?)),
            "ring" => Ok(CouplingGraph::ring(num(arg)?)),
            "complete" => Ok(CouplingGraph::complete(num(arg)?)),
            "grid" => {
                let (a, b) = arg.split_once('x').ok_or_else(unknown)?;
                Ok(CouplingGraph::grid(num(a)?, num(b)?))
            }
            _ => Err(unknown()),
        }
    }

    pub fn line(n: usize) -> Self {
        CouplingGraph::new(n.max(1), (1..n).map(|i| (i - 1, i))).expect("line is connected")
    }

    pub fn ring(n: usize) -> Self {
        if n < 3 {
            return CouplingGraph::line(n);
        }
        CouplingGraph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("ring is connected")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        CouplingGraph::new(n.max(1), edges).expect("complete graph is connected")
    }

    /// `rows x cols` grid, qubit `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                if c + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        CouplingGraph::new((rows * cols).max(1), edges).expect("grid is connected")
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Breadth-first hop counts from every source.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.num_physical;
        let mut data = vec![0u32; n * n];
        for src in 0..n {
            for (dst, d) in bfs(&self.adjacency, src).into_iter().enumerate() {
                data[src * n + dst] = d.expect("connected graph") as u32;
            }
        }
        DistanceMatrix { n, data }
    }

    /// One shortest path from `a` to `b`, both endpoints included.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.num_physical];
        let mut queue = VecDeque::from([a]);
        prev[a] = a;
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for &v in &self.adjacency[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    pub fn has_triangle(&self) -> bool {
        self.edges.iter().any(|&(u, v)| {
            self.adjacency[u]
                .iter()
                .any(|w| *w != v && self.adjacency[v].binary_search(w).is_ok())
        })
    }

    /// Sub-topology on the listed physical qubits, positions labeled by
    /// their index in `phys`.
    pub fn induced_subtopology(&self, phys: &[usize]) -> Result<SubTopology, TopologyError> {
        for i in 0..phys.len() {
            if phys[i + 1..].contains(&phys[i]) {
                return Err(TopologyError::RepeatedQubit(phys.to_vec()));
            }
        }
        let mut edges = Vec::new();
        for i in 0..phys.len() {
            for j in i + 1..phys.len() {
                if self.has_edge(phys[i], phys[j]) {
                    edges.push((i, j));
                }
            }
        }
        let sub = SubTopology::new(phys.len(), edges);
        if !sub.is_connected() {
            return Err(TopologyError::DisconnectedPlacement(phys.to_vec()));
        }
        Ok(sub)
    }
}

fn bfs(adjacency: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

// IBM 27-qubit Falcon heavy-hex coupling map.
const HEAVY_HEX_27: &[(usize, usize)] = &[
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
    (14, 16),
    (15, 18),
    (16, 19),
    (17, 18),
    (18, 21),
    (19, 20),
    (19, 22),
    (21, 23),
    (22, 25),
    (23, 24),
    (24, 25),
    (25, 26),
];

/// Symmetric all-pairs hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn diameter(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

/// Connectivity requirement of a `k`-qubit block, over positions `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubTopology {
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl SubTopology {
    /// Edges are normalized to `(min, max)` and sorted.
    pub fn new(k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        SubTopology { k, edges }
    }

    /// Three positions joined through `middle`.
    pub fn path3(middle: usize) -> Self {
        let ends: Vec<usize> = (0..3).filter(|&p| p != middle).collect();
        SubTopology::new(3, [(middle, ends[0]), (middle, ends[1])])
    }

    pub fn triangle() -> Self {
        SubTopology::new(3, [(0, 1), (0, 2), (1, 2)])
    }

    pub fn edge() -> Self {
        SubTopology::new(2, [(0, 1)])
    }

    /// The edgeless topology of a single position.
    pub fn single() -> Self {
        SubTopology::new(1, [])
    }

    /// The complete graph on `k` positions.
    pub fn complete(k: usize) -> Self {
        SubTopology::new(k, (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn is_connected(&self) -> bool {
        if self.k <= 1 {
            return true;
        }
        let mut adjacency = vec![Vec::new(); self.k];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        bfs(&adjacency, 0).iter().all(Option::is_some)
    }

    /// Edges mapped through `p`: position `i` becomes `p(i)`.
    pub fn relabeled(&self, p: &Permutation) -> SubTopology {
        SubTopology::new(
            self.k,
            self.edges.iter().map(|&(a, b)| (p.image(a), p.image(b))),
        )
    }

    /// `None` for the complete graph, otherwise the position of maximum
    /// degree (the middle of a 3-path).
    fn hub(&self) -> Option<usize> {
        if self.edges.len() == self.k * (self.k - 1) / 2 {
            return None;
        }
        (0..self.k).max_by_key(|&p| self.edges.iter().filter(|e| e.0 == p || e.1 == p).count())
    }
}

impl fmt::Display for SubTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.k, self.edges.len()) {
            (1, _) => write!(f, "single"),
            (2, 1) => write!(f, "edge"),
            (3, 3) => write!(f, "triangle"),
            (3, 2) => write!(f, "path-mid{}", self.hub().unwrap_or(0)),
            _ => {
                write!(f, "k{}", self.k)?;
                for (a, b) in &self.edges {
                    write!(f, "-{a}{b}")?;
                }
                Ok(())
            }
        }
    }
}

/// All labeled connected simple graphs on `k` positions: paths (by middle
/// position) before the triangle for `k = 3`.
pub fn enumerate_subtopologies(k: usize) -> Result<Vec<SubTopology>, TopologyError> {
    match k {
        2 => Ok(vec![SubTopology::edge()]),
        3 => Ok(vec![
            SubTopology::path3(0),
            SubTopology::path3(1),
            SubTopology::path3(2),
            SubTopology::triangle(),
        ]),
        _ => Err(TopologyError::UnsupportedWidth(k)),
    }
}

/// Sub-topologies contained in the induced subgraph of some `k`-subset of
/// `g`. Any labeling of a feasible shape is feasible, so the check reduces
/// to "has an edge", "has a vertex of degree two" and "has a triangle".
pub fn feasible_subtopologies(g: &CouplingGraph, k: usize) -> Vec<SubTopology> {
    let Ok(all) = enumerate_subtopologies(k) else {
        return Vec::new();
    };
    let has_path = (0..g.num_physical()).any(|q| g.neighbors(q).len() >= 2);
    let has_edge = !g.edges().is_empty();
    let has_triangle = g.has_triangle();
    all.into_iter()
        .filter(|s| match (s.k(), s.edges().len()) {
            (2, _) => has_edge,
            (3, 2) => has_path,
            (3, 3) => has_triangle,
            _ => false,
        })
        .collect()
}
