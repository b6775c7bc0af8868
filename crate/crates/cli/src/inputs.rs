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


use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pam_core::circuit::{parse_qasm, Circuit, MatrixData};
use pam_core::linalg::Matrix;
use pam_core::targets;
use pam_core::topology::{CouplingGraph, SubTopology};

/// A preset name (`line-5`, `grid-2x3`, ...) or a file holding either an
/// edge list or `{"num_physical": .., "edges": [..]}`.
pub fn load_coupling(source: &str) -> Result<CouplingGraph> {
    let path = Path::new(source);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let g = if text.trim_start().starts_with('{') {
            CouplingGraph::from_json(&text)
        } else {
            CouplingGraph::from_edge_list(&text)
        };
        return g.with_context(|| format!("parsing coupling graph {}", path.display()));
    }
    CouplingGraph::preset(source).with_context(|| format!("`{source}` is neither a coupling file nor a known preset"))
}

pub fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_qasm(&text).with_context(|| format!("parsing {}", path.display()))
}

/// An existing `.qasm` file, a built-in target name, or nothing.
pub fn load_circuit_or_target(source: &str, base: Option<&Path>) -> Result<Circuit> {
    let path = base.map_or_else(|| Path::new(source).to_path_buf(), |b| b.join(source));
    if path.is_file() {
        return load_circuit(&path);
    }
    targets::by_name(source).ok_or_else(|| anyhow!("no such file or built-in target: {}", path.display()))
}

/// The unitary to synthesize: a JSON matrix file (rows of `[re, im]`), a
/// QASM file, or a built-in target.
pub fn load_target(source: &str) -> Result<Matrix> {
    let path = Path::new(source);
    if path.is_file() && path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let data: MatrixData =
            serde_json::from_str(&text).with_context(|| format!("parsing matrix {}", path.display()))?;
        return data
            .to_matrix()
            .ok_or_else(|| anyhow!("{}: matrix is not square", path.display()));
    }
    let c = load_circuit_or_target(source, None)?;
    c.unitary().with_context(|| format!("simulating {source}"))
}

/// Sub-topology names accepted by `--topology`. `path` means the widest
/// path that fits the target.
pub fn topology_by_name(name: &str, width: usize) -> Result<SubTopology> {
    let t = match name {
        "path" => match width {
            1 => SubTopology::single(),
            2 => SubTopology::edge(),
            _ => SubTopology::path3(1),
        },
        "triangle" => SubTopology::triangle(),
        "edge" => SubTopology::edge(),
        "single" => SubTopology::single(),
        "complete" => SubTopology::complete(width),
        _ => match name.strip_prefix("path-mid").and_then(|m| m.parse::<usize>().ok()) {
            Some(m) if m < 3 => SubTopology::path3(m),
            _ => bail!("unknown topology `{name}`"),
        },
    };
    if t.k() != width {
        bail!("topology `{name}` has {} qubits but the target has {width}", t.k());
    }
    Ok(t)
}
