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

//! Permutation-aware qubit mapping.
//!
//! A logical circuit is cut into blocks of at most `k` qubits, every block is
//! resynthesized for each input/output wire permutation and each connected
//! sub-topology it may land on, and a SABRE-style sweep then places the
//! blocks on the device, choosing per block the output permutation that best
//! trades gate count against routing distance.

pub mod circuit;
pub mod linalg;
pub mod permutation;
pub mod topology;
pub mod partition;
pub mod synthesis;
pub mod targets;
pub mod pam;
pub mod verify;
