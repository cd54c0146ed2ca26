//! Vendor assembly emission.
//!
//! Two dialects are supported: OpenQASM 2.0 with the `qelib1.inc` gate
//! vocabulary, and Quil. Output is deterministic down to the byte: one
//! statement per line, angles in shortest round-trip decimal form, exactly
//! one trailing newline. Circuits are assumed valid; the only failure mode
//! is a gate the dialect cannot express.

use std::fmt::Write as _;

use thiserror::Error;

use crate::analyzer::Assembler;
use crate::circuit::{Circuit, GateKind, Instruction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("{dialect} does not support the {gate} gate")]
    UnsupportedGate {
        dialect: &'static str,
        gate: String,
    },
}

fn unsupported(dialect: &'static str, kind: GateKind) -> CodegenError {
    CodegenError::UnsupportedGate {
        dialect,
        gate: kind.mnemonic().to_string(),
    }
}

/// Emits OpenQASM 2.0. The classical register is always declared; a
/// measurement-free circuit still gets `creg c[1];` so downstream parsers
/// that expect both registers stay happy. The identity gate has no
/// `qelib1.inc` counterpart and is rejected.
pub fn emit_qasm2(circuit: &Circuit) -> Result<String, CodegenError> {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    let _ = writeln!(out, "creg c[{}];", circuit.num_cbits.max(1));
    for instr in &circuit.instructions {
        match instr {
            Instruction::Measure { qubit, cbit } => {
                let _ = writeln!(out, "measure q[{}] -> c[{}];", qubit, cbit);
            }
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => {
                if *kind == GateKind::I {
                    return Err(unsupported("qasm2", *kind));
                }
                let name = kind.mnemonic();
                let _ = match (param, qubits.as_slice()) {
                    (Some(angle), [q]) => writeln!(out, "{}({}) q[{}];", name, angle, q),
                    (None, [q]) => writeln!(out, "{} q[{}];", name, q),
                    (None, [a, b]) => writeln!(out, "{} q[{}],q[{}];", name, a, b),
                    _ => unreachable!("valid circuits have fixed arity"),
                };
            }
        }
    }
    Ok(out)
}

/// Emits Quil. Readout storage is declared only when the circuit measures;
/// `sdg` and `tdg` lower to RZ rotations, which matches them up to global
/// phase. The identity gate is rejected.
pub fn emit_quil(circuit: &Circuit) -> Result<String, CodegenError> {
    let mut out = String::new();
    if circuit.has_measure() {
        let _ = writeln!(out, "DECLARE ro BIT[{}]", circuit.num_cbits);
    }
    for instr in &circuit.instructions {
        match instr {
            Instruction::Measure { qubit, cbit } => {
                let _ = writeln!(out, "MEASURE {} ro[{}]", qubit, cbit);
            }
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => {
                let name = match kind {
                    GateKind::I => return Err(unsupported("quil", *kind)),
                    GateKind::X => "X",
                    GateKind::Y => "Y",
                    GateKind::Z => "Z",
                    GateKind::H => "H",
                    GateKind::S => "S",
                    GateKind::T => "T",
                    GateKind::Sdg => {
                        let _ = writeln!(out, "RZ({}) {}", -std::f64::consts::FRAC_PI_2, qubits[0]);
                        continue;
                    }
                    GateKind::Tdg => {
                        let _ = writeln!(out, "RZ({}) {}", -std::f64::consts::FRAC_PI_4, qubits[0]);
                        continue;
                    }
                    GateKind::Rx => "RX",
                    GateKind::Ry => "RY",
                    GateKind::Rz => "RZ",
                    GateKind::Cx => "CNOT",
                    GateKind::Cz => "CZ",
                    GateKind::Swap => "SWAP",
                };
                let _ = match (param, qubits.as_slice()) {
                    (Some(angle), [q]) => writeln!(out, "{}({}) {}", name, angle, q),
                    (None, [q]) => writeln!(out, "{} {}", name, q),
                    (None, [a, b]) => writeln!(out, "{} {} {}", name, a, b),
                    _ => unreachable!("valid circuits have fixed arity"),
                };
            }
        }
    }
    Ok(out)
}

/// Dispatches on a backend's declared dialect.
pub fn emit(circuit: &Circuit, assembler: Assembler) -> Result<String, CodegenError> {
    match assembler {
        Assembler::Qasm2 => emit_qasm2(circuit),
        Assembler::Quil => emit_quil(circuit),
    }
}
