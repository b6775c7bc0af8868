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

//! Best-first search over CNOT placements.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{
    instantiate, target_width, zyz_angles, SearchPriority, SynthesisConfig, SynthesisError,
    Template,
};
use crate::circuit::{Circuit, Gate};
use crate::linalg::Matrix;
use crate::topology::SubTopology;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub circuit: Circuit,
    pub distance: f64,
    /// Nodes popped from the frontier.
    pub expansions: usize,
    /// Templates instantiated, root included.
    pub instantiations: usize,
}

impl SearchOutcome {
    pub fn cnot_count(&self) -> usize {
        self.circuit.cnot_count()
    }
}

struct Node {
    template: Template,
    params: Vec<f64>,
    distance: f64,
    order: usize,
    priority: SearchPriority,
}

impl Node {
    fn key(&self) -> (f64, f64) {
        let cnots = self.template.cnot_count() as f64;
        match self.priority {
            SearchPriority::Distance => (self.distance, cnots),
            SearchPriority::Weighted {
                distance_weight,
                cnot_weight,
            } => (distance_weight * self.distance + cnot_weight * cnots, 0.0),
        }
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so the max-heap pops the lowest key, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then(other.order.cmp(&self.order))
    }
}

/// Synthesizes `target` using CNOTs only on edges of `g`. The first template
/// whose instantiation falls below the success threshold is returned, so the
/// result is the shallowest success along the explored frontier.
pub fn qsearch(
    target: &Matrix,
    g: &SubTopology,
    cfg: &SynthesisConfig,
) -> Result<SearchOutcome, SynthesisError> {
    let width = target_width(target)?;
    if width > 3 {
        return Err(SynthesisError::TooWide(width));
    }
    if g.k() != width {
        return Err(SynthesisError::TopologyWidth {
            topology: g.k(),
            target: width,
        });
    }
    if width == 1 {
        let (theta, phi, lambda) = zyz_angles(target);
        let circuit = Circuit::from_gates(1, [Gate::u3(0, theta, phi, lambda)]).unwrap();
        let distance = super::hs_distance(target, &circuit.unitary_with_cap(1).unwrap())?;
        return Ok(SearchOutcome {
            circuit,
            distance,
            expansions: 0,
            instantiations: 0,
        });
    }

    let root = Template::root(width);
    let fit = instantiate(&root, target, cfg, None)?;
    let mut instantiations = 1;
    let mut order = 0;
    let done = |t: &Template, params: &[f64], distance, expansions, instantiations| SearchOutcome {
        circuit: t.to_circuit(params),
        distance,
        expansions,
        instantiations,
    };
    if fit.distance < cfg.success_threshold {
        return Ok(done(&root, &fit.params, fit.distance, 0, instantiations));
    }
    let mut best = fit.distance;
    let mut frontier = BinaryHeap::new();
    frontier.push(Node {
        template: root,
        params: fit.params,
        distance: fit.distance,
        order,
        priority: cfg.priority,
    });
    let mut expansions = 0;
    while let Some(node) = frontier.pop() {
        if expansions >= cfg.max_expansions {
            break;
        }
        expansions += 1;
        if node.template.cnot_count() >= cfg.max_cnots {
            continue;
        }
        for &edge in g.edges() {
            let child = node.template.with_layer(edge);
            let warm: Option<Vec<f64>> = cfg.warm_start.then(|| {
                let mut w = node.params.clone();
                w.resize(child.num_params(), 0.0);
                w
            });
            let fit = match instantiate(&child, target, cfg, warm.as_deref()) {
                Ok(fit) => fit,
                Err(SynthesisError::NonFinite) => continue,
                Err(e) => return Err(e),
            };
            instantiations += 1;
            if fit.distance < cfg.success_threshold {
                return Ok(done(&child, &fit.params, fit.distance, expansions, instantiations));
            }
            best = best.min(fit.distance);
            order += 1;
            frontier.push(Node {
                template: child,
                params: fit.params,
                distance: fit.distance,
                order,
                priority: cfg.priority,
            });
        }
    }
    Err(SynthesisError::ThresholdNotReached {
        max_cnots: cfg.max_cnots,
        threshold: cfg.success_threshold,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::synthesis::hs_distance;

    #[test]
    fn identity_needs_no_cnots() {
        let out = qsearch(&linalg::identity(4), &SubTopology::edge(), &SynthesisConfig::default())
            .unwrap();
        assert_eq!(out.cnot_count(), 0);
    }

    #[test]
    fn cnot_needs_exactly_one() {
        let target = Gate::cnot(0, 1).matrix();
        let cfg = SynthesisConfig::default();
        // No product of single-qubit gates reaches CNOT: the root fails.
        let root = instantiate(&Template::root(2), &target, &cfg, None).unwrap();
        assert!(root.distance > 1e-3);
        let out = qsearch(&target, &SubTopology::edge(), &cfg).unwrap();
        assert_eq!(out.cnot_count(), 1);
        assert!(hs_distance(&target, &out.circuit.unitary().unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn respects_sub_topology() {
        let mut c = Circuit::new(3);
        c.push(Gate::cnot(0, 2)).unwrap();
        let target = c.unitary().unwrap();
        let g = SubTopology::path3(1);
        let out = qsearch(&target, &g, &SynthesisConfig::default()).unwrap();
        assert!(out
            .circuit
            .gates()
            .iter()
            .filter(|gate| gate.is_multi_qubit())
            .all(|gate| g.has_edge(gate.qubits()[0], gate.qubits()[1])));
        assert!(hs_distance(&target, &out.circuit.unitary().unwrap()).unwrap() < 1e-10);
    }
}
