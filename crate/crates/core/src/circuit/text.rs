//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 4
//! bits 1
//! h q0
//! rz(0.25) q1
//! cx q0 q1
//! bridge q0 q1 q2
//! measure_x q2 -> c0
//! cpauli z q0 if c0 @3
//! ```
//!
//! A trailing `@N` carries the op's tag. Blank lines and `#` comments are
//! skipped when parsing and never written.

use std::fmt::Write as _;

use super::{Basis, Circuit, Clbit, Gate, GateOp, Pauli, Qubit};
use crate::error::CircuitError;

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = String::with_capacity(16 * c.len() + 32);
    let _ = writeln!(out, "qubits {}", c.num_qubits());
    let _ = writeln!(out, "bits {}", c.num_bits());
    for op in c.ops() {
        write_gate(&mut out, &op.gate);
        if let Some(t) = op.tag {
            let _ = write!(out, " @{t}");
        }
        out.push('\n');
    }
    out
}

fn write_gate(out: &mut String, g: &Gate) {
    let _ = match g {
        Gate::Rz(q, t) | Gate::Ry(q, t) => write!(out, "{}({t}) {q}", g.name()),
        Gate::Cp(a, b, t) => write!(out, "cp({t}) {a} {b}"),
        Gate::Measure { qubit, bit, .. } => write!(out, "{} {qubit} -> {bit}", g.name()),
        Gate::CondPauli { pauli, qubit, bits } => {
            let p = match pauli {
                Pauli::X => "x",
                Pauli::Z => "z",
            };
            let _ = write!(out, "cpauli {p} {qubit} if");
            for b in bits {
                let _ = write!(out, " {b}");
            }
            Ok(())
        }
        other => {
            let _ = write!(out, "{}", other.name());
            for q in other.qubits() {
                let _ = write!(out, " {q}");
            }
            Ok(())
        }
    };
}

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut num_qubits = None;
    let mut num_bits = None;
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| CircuitError::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (body, tag) = match content.rsplit_once(" @") {
            Some((b, t)) => (
                b.trim(),
                Some(t.trim().parse::<u32>().map_err(|_| err(format!("bad tag `{t}`")))?),
            ),
            None => (content, None),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match tokens[0] {
            "qubits" => {
                num_qubits = Some(parse_count(&tokens, line)?);
                continue;
            }
            "bits" => {
                num_bits = Some(parse_count(&tokens, line)?);
                continue;
            }
            _ => {}
        }
        let gate = parse_gate(&tokens).map_err(err)?;
        ops.push(GateOp { gate, tag });
    }
    let num_qubits = num_qubits.ok_or(CircuitError::Parse {
        line: 0,
        msg: "missing `qubits` header".into(),
    })?;
    let mut c = Circuit::with_bits(num_qubits, num_bits.unwrap_or(0));
    for op in ops {
        c.push_op(op);
    }
    c.validate()?;
    Ok(c)
}

fn parse_count(tokens: &[&str], line: usize) -> Result<usize, CircuitError> {
    match tokens {
        [_, n] => n.parse().map_err(|_| CircuitError::Parse {
            line,
            msg: format!("bad count `{n}`"),
        }),
        _ => Err(CircuitError::Parse {
            line,
            msg: format!("expected `{} <count>`", tokens[0]),
        }),
    }
}

fn qubit(tok: &str) -> Result<Qubit, String> {
    tok.strip_prefix('q')
        .and_then(|n| n.parse().ok())
        .map(Qubit)
        .ok_or_else(|| format!("bad qubit `{tok}`"))
}

fn clbit(tok: &str) -> Result<Clbit, String> {
    tok.strip_prefix('c')
        .and_then(|n| n.parse().ok())
        .map(Clbit)
        .ok_or_else(|| format!("bad classical bit `{tok}`"))
}

fn parse_gate(tokens: &[&str]) -> Result<Gate, String> {
    let head = tokens[0];
    let args = &tokens[1..];
    let (name, angle) = match head.split_once('(') {
        Some((n, rest)) => {
            let a = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unclosed angle in `{head}`"))?;
            let a: f64 = a.parse().map_err(|_| format!("bad angle `{a}`"))?;
            (n, Some(a))
        }
        None => (head, None),
    };
    let arity = |n: usize| -> Result<Vec<Qubit>, String> {
        if args.len() != n {
            return Err(format!("`{name}` takes {n} qubit(s), got {}", args.len()));
        }
        args.iter().map(|t| qubit(t)).collect()
    };
    let need_angle = || angle.ok_or_else(|| format!("`{name}` needs an angle"));
    if angle.is_some() && !matches!(name, "rz" | "ry" | "cp") {
        return Err(format!("`{name}` takes no angle"));
    }
    let gate = match name {
        "h" => Gate::H(arity(1)?[0]),
        "x" => Gate::X(arity(1)?[0]),
        "y" => Gate::Y(arity(1)?[0]),
        "z" => Gate::Z(arity(1)?[0]),
        "s" => Gate::S(arity(1)?[0]),
        "sdg" => Gate::Sdg(arity(1)?[0]),
        "rz" => Gate::Rz(arity(1)?[0], need_angle()?),
        "ry" => Gate::Ry(arity(1)?[0], need_angle()?),
        "cx" => {
            let q = arity(2)?;
            Gate::Cx(q[0], q[1])
        }
        "cz" => {
            let q = arity(2)?;
            Gate::Cz(q[0], q[1])
        }
        "cp" => {
            let q = arity(2)?;
            Gate::Cp(q[0], q[1], need_angle()?)
        }
        "swap" => {
            let q = arity(2)?;
            Gate::Swap(q[0], q[1])
        }
        "bridge" => {
            let q = arity(3)?;
            Gate::Bridge(q[0], q[1], q[2])
        }
        "measure_z" | "measure_x" => {
            let [q, "->", b] = args else {
                return Err(format!("expected `{name} qN -> cM`"));
            };
            Gate::Measure {
                qubit: qubit(q)?,
                basis: if name == "measure_z" { Basis::Z } else { Basis::X },
                bit: clbit(b)?,
            }
        }
        "cpauli" => {
            let [p, q, "if", bits @ ..] = args else {
                return Err("expected `cpauli <x|z> qN if cM ...`".into());
            };
            let pauli = match *p {
                "x" => Pauli::X,
                "z" => Pauli::Z,
                other => return Err(format!("bad pauli `{other}`")),
            };
            if bits.is_empty() {
                return Err("cpauli needs at least one condition bit".into());
            }
            Gate::CondPauli {
                pauli,
                qubit: qubit(q)?,
                bits: bits.iter().map(|b| clbit(b)).collect::<Result<_, _>>()?,
            }
        }
        other => return Err(format!("unknown gate `{other}`")),
    };
    Ok(gate)
}
