//! Vendor-agnostic circuit representation.
//!
//! A [`Circuit`] is an ordered list of gate and measurement instructions over
//! a quantum register and a classical register. All qubits start in |0⟩;
//! measurement is terminal per qubit and always in the computational basis.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The fixed gate set: Clifford+T, the Pauli rotations, and the common
/// two-qubit entanglers. `Rx`/`Ry`/`Rz` carry one angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    Cx,
    Cz,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 15] = [
        GateKind::I,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Swap,
    ];

    /// Number of qubit operands (1 or 2).
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Whether the gate carries an angle parameter.
    pub fn has_param(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    /// Lowercase textual mnemonic, as used by the circuit text format and
    /// backend gate-set descriptions.
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::I => "i",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<GateKind> {
        GateKind::ALL.iter().copied().find(|k| k.mnemonic() == s)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// One circuit instruction: a gate application or a terminal measurement
/// into a classical bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    Gate {
        kind: GateKind,
        qubits: Vec<usize>,
        param: Option<f64>,
    },
    Measure {
        qubit: usize,
        cbit: usize,
    },
}

impl Instruction {
    /// Single-qubit gate without a parameter.
    pub fn gate1(kind: GateKind, qubit: usize) -> Instruction {
        Instruction::Gate {
            kind,
            qubits: vec![qubit],
            param: None,
        }
    }

    /// Two-qubit gate.
    pub fn gate2(kind: GateKind, a: usize, b: usize) -> Instruction {
        Instruction::Gate {
            kind,
            qubits: vec![a, b],
            param: None,
        }
    }

    /// Parameterized rotation.
    pub fn rot(kind: GateKind, qubit: usize, angle: f64) -> Instruction {
        Instruction::Gate {
            kind,
            qubits: vec![qubit],
            param: Some(angle),
        }
    }

    pub fn measure(qubit: usize, cbit: usize) -> Instruction {
        Instruction::Measure { qubit, cbit }
    }

    /// Qubit operands of the instruction.
    pub fn qubits(&self) -> &[usize] {
        match self {
            Instruction::Gate { qubits, .. } => qubits,
            Instruction::Measure { qubit, .. } => std::slice::from_ref(qubit),
        }
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, Instruction::Measure { .. })
    }

    /// Checks the instruction-local invariants: fixed arity, fixed parameter
    /// count, distinct two-qubit operands, finite angle.
    fn local_violation(&self) -> Option<String> {
        match self {
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => {
                if qubits.len() != kind.arity() {
                    return Some(format!(
                        "gate {} expects {} qubit operand(s), got {}",
                        kind,
                        kind.arity(),
                        qubits.len()
                    ));
                }
                if kind.arity() == 2 && qubits[0] == qubits[1] {
                    return Some(format!(
                        "two-qubit gate {} has equal operands {}",
                        kind, qubits[0]
                    ));
                }
                match (kind.has_param(), param) {
                    (true, None) => Some(format!("gate {} requires an angle parameter", kind)),
                    (false, Some(_)) => Some(format!("gate {} takes no parameter", kind)),
                    (true, Some(a)) if !a.is_finite() => {
                        Some(format!("gate {} has non-finite angle {}", kind, a))
                    }
                    _ => None,
                }
            }
            Instruction::Measure { .. } => None,
        }
    }
}

/// Error raised when constructing or extending a circuit would break an
/// invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("a circuit needs at least one qubit")]
    ZeroQubits,
    #[error("instruction {position}: {message}")]
    InvalidInstruction { position: usize, message: String },
}

/// A single invariant violation found by [`Circuit::validate`], located at
/// the offending instruction index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub position: usize,
    pub message: String,
}

/// An ordered list of instructions over `num_qubits` qubits and `num_cbits`
/// classical bits. Valid circuits satisfy:
///
/// - every qubit index < `num_qubits`, every cbit index < `num_cbits`;
/// - per qubit, no gate follows a measurement of that qubit;
/// - per cbit, at most one measurement writes it.
///
/// Circuits built through [`Circuit::new`] and [`Circuit::append`] are valid
/// by construction. The fields are public so that foreign instruction lists
/// can be inspected with [`Circuit::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_cbits: usize,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    /// Empty circuit with the given register sizes.
    pub fn new(num_qubits: usize, num_cbits: usize) -> Result<Circuit, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::ZeroQubits);
        }
        Ok(Circuit {
            num_qubits,
            num_cbits,
            instructions: Vec::new(),
        })
    }

    /// Appends one instruction, keeping all circuit invariants. Consumes and
    /// returns the circuit so that builders can chain appends.
    pub fn append(mut self, instr: Instruction) -> Result<Circuit, CircuitError> {
        let position = self.instructions.len();
        if let Some(message) = self.violation_of(&instr) {
            return Err(CircuitError::InvalidInstruction { position, message });
        }
        self.instructions.push(instr);
        Ok(self)
    }

    /// Builds and fully validates a circuit from an instruction list.
    pub fn from_instructions(
        num_qubits: usize,
        num_cbits: usize,
        instructions: Vec<Instruction>,
    ) -> Result<Circuit, CircuitError> {
        let mut circuit = Circuit::new(num_qubits, num_cbits)?;
        for instr in instructions {
            circuit = circuit.append(instr)?;
        }
        Ok(circuit)
    }

    /// Checks every invariant and reports each violation with its
    /// instruction position. An empty list means the circuit is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.num_qubits == 0 {
            violations.push(Violation {
                position: 0,
                message: "a circuit needs at least one qubit".into(),
            });
        }
        let mut probe = Circuit {
            num_qubits: self.num_qubits.max(1),
            num_cbits: self.num_cbits,
            instructions: Vec::new(),
        };
        for (position, instr) in self.instructions.iter().enumerate() {
            if let Some(message) = probe.violation_of(instr) {
                violations.push(Violation { position, message });
            }
            // Record the instruction regardless so later checks see the
            // same prefix the original list has.
            probe.instructions.push(instr.clone());
        }
        violations
    }

    /// Why `instr` cannot be appended to `self`, if any reason exists.
    fn violation_of(&self, instr: &Instruction) -> Option<String> {
        if let Some(message) = instr.local_violation() {
            return Some(message);
        }
        for &q in instr.qubits() {
            if q >= self.num_qubits {
                return Some(format!(
                    "qubit index {} out of range for {} qubit(s)",
                    q, self.num_qubits
                ));
            }
            if self.is_measured(q) {
                return Some(format!("qubit {} is already measured", q));
            }
        }
        if let Instruction::Measure { cbit, .. } = instr {
            if *cbit >= self.num_cbits {
                return Some(format!(
                    "classical bit index {} out of range for {} bit(s)",
                    cbit, self.num_cbits
                ));
            }
            let taken = self.instructions.iter().any(
                |i| matches!(i, Instruction::Measure { cbit: c, .. } if c == cbit),
            );
            if taken {
                return Some(format!("classical bit {} is already written", cbit));
            }
        }
        None
    }

    fn is_measured(&self, qubit: usize) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i, Instruction::Measure { qubit: q, .. } if *q == qubit))
    }

    /// Gate instructions only (measurements excluded).
    pub fn gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| !i.is_measure()).count()
    }

    pub fn measure_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_measure()).count()
    }

    pub fn has_measure(&self) -> bool {
        self.instructions.iter().any(Instruction::is_measure)
    }

    /// Measured (qubit, cbit) pairs in instruction order.
    pub fn measure_map(&self) -> Vec<(usize, usize)> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Measure { qubit, cbit } => Some((*qubit, *cbit)),
                _ => None,
            })
            .collect()
    }

    /// Circuit depth under greedy layering: every instruction is placed in
    /// the earliest layer after all layers holding instructions that share a
    /// qubit with it. Measurements count as instructions.
    pub fn depth(&self) -> usize {
        let mut qubit_depth = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for instr in &self.instructions {
            let layer = 1 + instr
                .qubits()
                .iter()
                .map(|&q| qubit_depth[q])
                .max()
                .unwrap_or(0);
            for &q in instr.qubits() {
                qubit_depth[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    /// The Figure-style Bell pair: H on qubit 0, CX 0→1, measure both.
    pub fn bell() -> Circuit {
        Circuit::new(2, 2)
            .and_then(|c| c.append(Instruction::gate1(GateKind::H, 0)))
            .and_then(|c| c.append(Instruction::gate2(GateKind::Cx, 0, 1)))
            .and_then(|c| c.append(Instruction::measure(0, 0)))
            .and_then(|c| c.append(Instruction::measure(1, 1)))
            .expect("bell circuit is valid")
    }
}
