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


//! Plumbing behind the `pam` command: input loading, standalone synthesis
//! and the benchmark harness.

pub mod bench;
pub mod inputs;
pub mod synth;

/// Process exit status for a verification failure. Other failures exit 1.
pub const EXIT_VERIFY_FAILED: i32 = 2;
