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

//! OpenQASM 2.0 subset: one quantum register, literal-arithmetic angles, and
//! the gate set `u1 u2 u3 u U h x y z s sdg t tdg id rx ry rz cx CX cp cu1
//! cz swap ccx barrier`. Everything is lowered to `{U3, CNOT, SWAP}`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, CircuitError, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported statement `{statement}`")]
    Unsupported { line: usize, statement: String },
    #[error("line {line}: quantum register must have at least one qubit")]
    EmptyRegister { line: usize },
    #[error("missing `OPENQASM 2.0;` header")]
    MissingHeader,
    #[error("no quantum register declared")]
    NoRegister,
    #[error("line {line}: {source}")]
    Circuit {
        line: usize,
        #[source]
        source: CircuitError,
    },
    #[error("opaque gate `{0}` has no QASM form")]
    OpaqueGate(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Write every SWAP as three `cx` statements.
    pub decompose_swap: bool,
}

const SUPPORTED_GATES: &[&str] = &[
    "u3", "u", "U", "u2", "u1", "p", "rx", "ry", "rz", "h", "x", "y", "z", "s", "sdg", "t", "tdg",
    "id", "cx", "CX", "swap", "cz", "cp", "cu1", "ccx",
];

struct Statement {
    line: usize,
    text: String,
}

fn split_statements(src: &str) -> Result<Vec<Statement>, QasmError> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let code = match raw.find("//") {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        for ch in code.chars() {
            if current.trim().is_empty() {
                start_line = line_no;
            }
            if ch == ';' {
                out.push(Statement {
                    line: start_line,
                    text: current.trim().to_string(),
                });
                current.clear();
            } else {
                current.push(ch);
            }
        }
        current.push(' ');
    }
    if !current.trim().is_empty() {
        return Err(QasmError::Syntax {
            line: start_line,
            message: "statement not terminated by `;`".into(),
        });
    }
    Ok(out)
}

/// Parses a QASM-subset program into the canonical gate set.
pub fn parse_qasm(src: &str) -> Result<Circuit, QasmError> {
    let statements = split_statements(src)?;
    let mut iter = statements.into_iter().filter(|s| !s.text.is_empty());

    match iter.next() {
        Some(s) if is_header(&s.text) => {}
        _ => return Err(QasmError::MissingHeader),
    }

    let mut register: Option<(String, usize)> = None;
    let mut circuit: Option<Circuit> = None;

    for stmt in iter {
        let text = stmt.text.as_str();
        let line = stmt.line;
        let (head, rest) = split_head(text);
        match head {
            "include" => continue,
            "creg" => continue,
            "barrier" => continue,
            "qreg" => {
                if register.is_some() {
                    return Err(QasmError::Unsupported {
                        line,
                        statement: text.to_string(),
                    });
                }
                let (name, size) = parse_register_decl(rest, line)?;
                if size == 0 {
                    return Err(QasmError::EmptyRegister { line });
                }
                register = Some((name, size));
                circuit = Some(Circuit::new(size));
            }
            name if !SUPPORTED_GATES.contains(&name) => {
                return Err(QasmError::Unsupported {
                    line,
                    statement: text.to_string(),
                })
            }
            _ => {
                let (reg_name, circ) = match (&register, circuit.as_mut()) {
                    (Some((name, _)), Some(c)) => (name.as_str(), c),
                    _ => return Err(QasmError::NoRegister),
                };
                let app = parse_application(text, reg_name, line)?;
                lower(&app, line)?
                    .into_iter()
                    .try_for_each(|g| circ.push(g))
                    .map_err(|source| QasmError::Circuit { line, source })?;
            }
        }
    }
    circuit.ok_or(QasmError::NoRegister)
}

fn is_header(text: &str) -> bool {
    let mut parts = text.split_whitespace();
    parts.next() == Some("OPENQASM") && parts.next().map(|v| v.starts_with('2')) == Some(true)
}

fn split_head(text: &str) -> (&str, &str) {
    let end = text
        .find(|c: char| c.is_whitespace() || c == '(')
        .unwrap_or(text.len());
    (&text[..end], &text[end..])
}

fn parse_register_decl(rest: &str, line: usize) -> Result<(String, usize), QasmError> {
    let rest = rest.trim();
    let syntax = |m: &str| QasmError::Syntax {
        line,
        message: m.to_string(),
    };
    let open = rest.find('[').ok_or_else(|| syntax("expected `[` in register declaration"))?;
    let close = rest.find(']').ok_or_else(|| syntax("expected `]` in register declaration"))?;
    let name = rest[..open].trim();
    if name.is_empty() || !is_identifier(name) {
        return Err(syntax("invalid register name"));
    }
    let size = rest[open + 1..close]
        .trim()
        .parse::<usize>()
        .map_err(|_| syntax("register size must be a non-negative integer"))?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(syntax("trailing tokens after register declaration"));
    }
    Ok((name.to_string(), size))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Application {
    name: String,
    params: Vec<f64>,
    qubits: Vec<usize>,
}

fn parse_application(text: &str, reg: &str, line: usize) -> Result<Application, QasmError> {
    let syntax = |m: String| QasmError::Syntax { line, message: m };
    let (name, mut rest) = split_head(text);
    if !is_identifier(name) {
        return Err(syntax(format!("unexpected token `{name}`")));
    }
    let mut params = Vec::new();
    rest = rest.trim_start();
    if rest.starts_with('(') {
        let close = matching_paren(rest).ok_or_else(|| syntax("unbalanced parentheses".into()))?;
        let inner = &rest[1..close];
        if !inner.trim().is_empty() {
            for piece in split_top_level_commas(inner) {
                params.push(eval_expr(piece).map_err(syntax)?);
            }
        }
        rest = &rest[close + 1..];
    }
    let mut qubits = Vec::new();
    for arg in rest.split(',') {
        let arg = arg.trim();
        let open = arg
            .find('[')
            .ok_or_else(|| syntax(format!("expected indexed qubit argument, got `{arg}`")))?;
        if !arg.ends_with(']') {
            return Err(syntax(format!("malformed qubit argument `{arg}`")));
        }
        if arg[..open].trim() != reg {
            return Err(syntax(format!("unknown register in `{arg}`")));
        }
        let idx = arg[open + 1..arg.len() - 1]
            .trim()
            .parse::<usize>()
            .map_err(|_| syntax(format!("bad qubit index in `{arg}`")))?;
        qubits.push(idx);
    }
    Ok(Application {
        name: name.to_string(),
        params,
        qubits,
    })
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_top_level_commas(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn lower(app: &Application, line: usize) -> Result<Vec<Gate>, QasmError> {
    let expect = |np: usize, nq: usize| -> Result<(), QasmError> {
        if app.params.len() != np || app.qubits.len() != nq {
            Err(QasmError::Syntax {
                line,
                message: format!(
                    "`{}` takes {np} parameter(s) and {nq} qubit(s), got {} and {}",
                    app.name,
                    app.params.len(),
                    app.qubits.len()
                ),
            })
        } else {
            Ok(())
        }
    };
    let p = &app.params;
    let q = &app.qubits;
    let one = |theta: f64, phi: f64, lambda: f64| vec![Gate::u3(q[0], theta, phi, lambda)];
    let distinct = |qs: &[usize]| -> Result<(), QasmError> {
        for i in 0..qs.len() {
            if qs[i + 1..].contains(&qs[i]) {
                return Err(QasmError::Circuit {
                    line,
                    source: CircuitError::DuplicateQubit(qs[i]),
                });
            }
        }
        Ok(())
    };

    let gates = match app.name.as_str() {
        "u3" | "u" | "U" => {
            expect(3, 1)?;
            one(p[0], p[1], p[2])
        }
        "u2" => {
            expect(2, 1)?;
            one(PI / 2.0, p[0], p[1])
        }
        "u1" | "p" => {
            expect(1, 1)?;
            one(0.0, 0.0, p[0])
        }
        "rx" => {
            expect(1, 1)?;
            one(p[0], -PI / 2.0, PI / 2.0)
        }
        "ry" => {
            expect(1, 1)?;
            one(p[0], 0.0, 0.0)
        }
        "rz" => {
            expect(1, 1)?;
            one(0.0, 0.0, p[0])
        }
        "h" => {
            expect(0, 1)?;
            one(PI / 2.0, 0.0, PI)
        }
        "x" => {
            expect(0, 1)?;
            one(PI, 0.0, PI)
        }
        "y" => {
            expect(0, 1)?;
            one(PI, PI / 2.0, PI / 2.0)
        }
        "z" => {
            expect(0, 1)?;
            one(0.0, 0.0, PI)
        }
        "s" => {
            expect(0, 1)?;
            one(0.0, 0.0, PI / 2.0)
        }
        "sdg" => {
            expect(0, 1)?;
            one(0.0, 0.0, -PI / 2.0)
        }
        "t" => {
            expect(0, 1)?;
            one(0.0, 0.0, PI / 4.0)
        }
        "tdg" => {
            expect(0, 1)?;
            one(0.0, 0.0, -PI / 4.0)
        }
        "id" => {
            expect(0, 1)?;
            Vec::new()
        }
        "cx" | "CX" => {
            expect(0, 2)?;
            distinct(q)?;
            vec![Gate::cnot(q[0], q[1])]
        }
        "swap" => {
            expect(0, 2)?;
            distinct(q)?;
            vec![Gate::swap(q[0], q[1])]
        }
        "cz" => {
            expect(0, 2)?;
            distinct(q)?;
            let h = || Gate::u3(q[1], PI / 2.0, 0.0, PI);
            vec![h(), Gate::cnot(q[0], q[1]), h()]
        }
        "cp" | "cu1" => {
            expect(1, 2)?;
            distinct(q)?;
            controlled_phase(q[0], q[1], p[0])
        }
        "ccx" => {
            expect(0, 3)?;
            distinct(q)?;
            toffoli(q[0], q[1], q[2])
        }
        _ => {
            return Err(QasmError::Unsupported {
                line,
                statement: app.name.clone(),
            })
        }
    };
    Ok(gates)
}

/// `cp(λ) a, b` as two CNOTs and three phase rotations.
pub(crate) fn controlled_phase(a: usize, b: usize, lambda: f64) -> Vec<Gate> {
    vec![
        Gate::u3(a, 0.0, 0.0, lambda / 2.0),
        Gate::cnot(a, b),
        Gate::u3(b, 0.0, 0.0, -lambda / 2.0),
        Gate::cnot(a, b),
        Gate::u3(b, 0.0, 0.0, lambda / 2.0),
    ]
}

/// Six-CNOT Toffoli with controls `a`, `b` and target `c`.
pub(crate) fn toffoli(a: usize, b: usize, c: usize) -> Vec<Gate> {
    let h = |q| Gate::u3(q, PI / 2.0, 0.0, PI);
    let t = |q| Gate::u3(q, 0.0, 0.0, PI / 4.0);
    let tdg = |q| Gate::u3(q, 0.0, 0.0, -PI / 4.0);
    vec![
        h(c),
        Gate::cnot(b, c),
        tdg(c),
        Gate::cnot(a, c),
        t(c),
        Gate::cnot(b, c),
        tdg(c),
        Gate::cnot(a, c),
        t(b),
        t(c),
        h(c),
        Gate::cnot(a, b),
        t(a),
        tdg(b),
        Gate::cnot(a, b),
    ]
}

/// Writes `c` with angles printed to 17 significant digits.
pub fn emit_qasm(c: &Circuit) -> Result<String, QasmError> {
    emit_qasm_with(c, EmitOptions::default())
}

pub fn emit_qasm_with(c: &Circuit, opts: EmitOptions) -> Result<String, QasmError> {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", c.num_qubits());
    for g in c.gates() {
        let q = g.qubits();
        match g.kind() {
            GateKind::U3 { theta, phi, lambda } => {
                let _ = writeln!(
                    out,
                    "u3({:.16e},{:.16e},{:.16e}) q[{}];",
                    theta, phi, lambda, q[0]
                );
            }
            GateKind::Cnot => {
                let _ = writeln!(out, "cx q[{}],q[{}];", q[0], q[1]);
            }
            GateKind::Swap if opts.decompose_swap => {
                let _ = writeln!(out, "cx q[{}],q[{}];", q[0], q[1]);
                let _ = writeln!(out, "cx q[{}],q[{}];", q[1], q[0]);
                let _ = writeln!(out, "cx q[{}],q[{}];", q[0], q[1]);
            }
            GateKind::Swap => {
                let _ = writeln!(out, "swap q[{}],q[{}];", q[0], q[1]);
            }
            GateKind::Opaque { label, .. } => return Err(QasmError::OpaqueGate(label.clone())),
        }
    }
    Ok(out)
}

// Literal arithmetic: numbers, `pi`, `+ - * / ^`, unary minus, parentheses.
fn eval_expr(src: &str) -> Result<f64, String> {
    let tokens = tokenize(src)?;
    let mut parser = ExprParser { tokens, pos: 0 };
    let v = parser.sum()?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("unexpected trailing input in expression `{}`", src.trim()));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(
                text.parse().map_err(|_| format!("bad number `{text}`"))?,
            ));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "pi" => out.push(Tok::Num(PI)),
                _ => return Err(format!("unsupported identifier `{word}` in expression")),
            }
        } else {
            return Err(format!("unexpected character `{c}` in expression"));
        }
    }
    Ok(out)
}

struct ExprParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl ExprParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            v = if op == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<f64, String> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.sum()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => Err("expected `)`".into()),
                }
            }
            other => Err(format!("unexpected token {other:?} in expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use num_complex::Complex64;

    use super::*;
    use crate::linalg::{max_abs_diff, Matrix};

    const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

    fn hs(u: &Matrix, v: &Matrix) -> f64 {
        let n = u.nrows() as f64;
        let tr: Complex64 = (0..u.nrows())
            .flat_map(|r| (0..u.nrows()).map(move |c| (r, c)))
            .map(|(r, c)| u[[r, c]].conj() * v[[r, c]])
            .sum();
        1.0 - tr.norm() / n
    }

    #[test]
    fn single_cnot() {
        let c = parse_qasm(&format!("{HEADER}qreg q[2]; cx q[0],q[1];")).unwrap();
        assert_eq!(c.num_qubits(), 2);
        assert_eq!(c.gates(), &[Gate::cnot(0, 1)]);
    }

    #[test]
    fn empty_body() {
        let c = parse_qasm(&format!("{HEADER}qreg q[3];")).unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert!(c.is_empty());
    }

    #[test]
    fn toffoli_lowering_matches_basis_enumeration() {
        let c = parse_qasm(&format!("{HEADER}qreg q[3]; ccx q[0],q[1],q[2];")).unwrap();
        assert_eq!(c.cnot_count(), 6);
        assert!(c
            .gates()
            .iter()
            .all(|g| matches!(g.kind(), GateKind::Cnot | GateKind::U3 { .. })));
        // Toffoli by basis-state enumeration: flip bit 2 when bits 0 and 1 set.
        let oracle = Array2::from_shape_fn((8, 8), |(r, col)| {
            let image = if col & 0b110 == 0b110 { col ^ 1 } else { col };
            if r == image {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(hs(&oracle, &c.unitary().unwrap()) <= 1e-10);
    }

    #[test]
    fn lowered_gates_preserve_unitaries() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m2 = |a: [Complex64; 4]| Array2::from_shape_vec((2, 2), a.to_vec()).unwrap();
        let cases: Vec<(&str, Matrix)> = vec![
            ("h q[0];", m2([c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])),
            ("x q[0];", m2([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])),
            ("y q[0];", m2([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])),
            ("z q[0];", m2([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])),
            ("s q[0];", m2([c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])),
            ("t q[0];", m2([c(1., 0.), c(0., 0.), c(0., 0.), c(s, s)])),
            (
                "rx(0.7) q[0];",
                m2([
                    c((0.35f64).cos(), 0.),
                    c(0., -(0.35f64).sin()),
                    c(0., -(0.35f64).sin()),
                    c((0.35f64).cos(), 0.),
                ]),
            ),
            (
                "ry(0.7) q[0];",
                m2([
                    c((0.35f64).cos(), 0.),
                    c(-(0.35f64).sin(), 0.),
                    c((0.35f64).sin(), 0.),
                    c((0.35f64).cos(), 0.),
                ]),
            ),
            (
                "rz(0.7) q[0];",
                m2([
                    Complex64::from_polar(1.0, -0.35),
                    c(0., 0.),
                    c(0., 0.),
                    Complex64::from_polar(1.0, 0.35),
                ]),
            ),
        ];
        for (stmt, expected) in cases {
            let circ = parse_qasm(&format!("{HEADER}qreg q[1]; {stmt}")).unwrap();
            let d = hs(&expected, &circ.unitary().unwrap());
            assert!(d <= 1e-10, "{stmt}: {d}");
        }

        let diag = |phases: [f64; 4]| {
            Array2::from_shape_fn((4, 4), |(r, col)| {
                if r == col {
                    Complex64::from_polar(1.0, phases[r])
                } else {
                    c(0., 0.)
                }
            })
        };
        let cz = parse_qasm(&format!("{HEADER}qreg q[2]; cz q[0],q[1];")).unwrap();
        assert!(hs(&diag([0., 0., 0., PI]), &cz.unitary().unwrap()) <= 1e-10);
        let cp = parse_qasm(&format!("{HEADER}qreg q[2]; cp(0.3) q[0],q[1];")).unwrap();
        assert!(hs(&diag([0., 0., 0., 0.3]), &cp.unitary().unwrap()) <= 1e-10);
        assert_eq!(cp.cnot_count(), 2);
    }

    #[test]
    fn angle_expressions() {
        let c = parse_qasm(&format!(
            "{HEADER}qreg q[1]; u3(-pi/2, 2*(pi-1), 1.5e-1^2) q[0];"
        ))
        .unwrap();
        match c.gates()[0].kind() {
            GateKind::U3 { theta, phi, lambda } => {
                assert!((theta + PI / 2.0).abs() < 1e-15);
                assert!((phi - 2.0 * (PI - 1.0)).abs() < 1e-15);
                assert!((lambda - 0.0225).abs() < 1e-15);
            }
            _ => panic!("expected u3"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_qasm(&format!("{HEADER}qreg q[2];\ncx q[0] q[1];")).unwrap_err();
        assert!(matches!(err, QasmError::Syntax { line: 4, .. }), "{err:?}");
        let err = parse_qasm(&format!("{HEADER}qreg q[2];\nmeasure q[0] -> c[0];")).unwrap_err();
        assert!(matches!(err, QasmError::Unsupported { line: 4, .. }), "{err:?}");
        let err = parse_qasm(&format!("{HEADER}qreg q[0];")).unwrap_err();
        assert!(matches!(err, QasmError::EmptyRegister { line: 3 }));
        assert_eq!(parse_qasm("qreg q[2];").unwrap_err(), QasmError::MissingHeader);
        let err = parse_qasm(&format!("{HEADER}qreg q[2]; cx q[0],q[0];")).unwrap_err();
        assert!(matches!(err, QasmError::Circuit { .. }));
    }

    #[test]
    fn barriers_and_cregs_are_ignored() {
        let c = parse_qasm(&format!(
            "{HEADER}qreg q[2];\ncreg c[2];\nh q[0];\nbarrier q[0],q[1];\ncx q[0],q[1];"
        ))
        .unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn emit_forms() {
        let empty = Circuit::new(2);
        assert_eq!(emit_qasm(&empty).unwrap(), format!("{HEADER}qreg q[2];\n"));
        let one = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let text = emit_qasm(&one).unwrap();
        assert_eq!(text.matches("cx").count(), 1);
        let sw = Circuit::from_gates(2, [Gate::swap(1, 0)]).unwrap();
        let text = emit_qasm_with(&sw, EmitOptions { decompose_swap: true }).unwrap();
        assert_eq!(text.matches("cx").count(), 3);
        let back = parse_qasm(&text).unwrap();
        assert!(max_abs_diff(&back.unitary().unwrap(), &sw.unitary().unwrap()) < 1e-15);
    }
}
