//! Support code for property tests and benchmarks, behind the `testkit`
//! feature: seeded random circuit generation and oracles that check
//! transpiled programs end to end.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::analyzer::BackendDescriptor;
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::optimize::OptimizeResult;
use crate::sim::{
    apply_gate, circuit_unitary, equivalent_up_to_global_phase, MAX_STATEVECTOR_QUBITS,
    MAX_UNITARY_QUBITS,
};
use crate::transpiler::TranspiledProgram;

/// Random measurement-free circuit with 1..=`max_qubits` qubits and up to
/// `max_gates` gates drawn uniformly from the gate set. Rotation angles are
/// uniform in (-2π, 2π). The result always passes validation.
pub fn random_gate_circuit(
    rng: &mut ChaCha8Rng,
    max_qubits: usize,
    max_gates: usize,
) -> Circuit {
    assert!(max_qubits >= 1, "need at least one qubit");
    let num_qubits = rng.random_range(1..=max_qubits);
    let num_gates = rng.random_range(0..=max_gates);
    let mut instructions = Vec::with_capacity(num_gates);
    while instructions.len() < num_gates {
        let kind = GateKind::ALL[rng.random_range(0..GateKind::ALL.len())];
        if kind.arity() == 2 && num_qubits < 2 {
            continue;
        }
        let instr = match kind.arity() {
            1 => {
                let q = rng.random_range(0..num_qubits);
                if kind.has_param() {
                    Instruction::rot(kind, q, rng.random_range(-TAU..TAU))
                } else {
                    Instruction::gate1(kind, q)
                }
            }
            _ => {
                let a = rng.random_range(0..num_qubits);
                let mut b = rng.random_range(0..num_qubits - 1);
                if b >= a {
                    b += 1;
                }
                Instruction::gate2(kind, a, b)
            }
        };
        instructions.push(instr);
    }
    Circuit::from_instructions(num_qubits, 0, instructions)
        .expect("generated instructions are valid by construction")
}

/// Like [`random_gate_circuit`], but measures a random subset of qubits
/// into consecutive classical bits at the end.
pub fn random_measured_circuit(
    rng: &mut ChaCha8Rng,
    max_qubits: usize,
    max_gates: usize,
) -> Circuit {
    let base = random_gate_circuit(rng, max_qubits, max_gates);
    let mut qubits: Vec<usize> = (0..base.num_qubits).collect();
    qubits.shuffle(rng);
    let measured = rng.random_range(0..=base.num_qubits);
    let mut instructions = base.instructions;
    for (cbit, &qubit) in qubits[..measured].iter().enumerate() {
        instructions.push(Instruction::measure(qubit, cbit));
    }
    Circuit::from_instructions(base.num_qubits, measured, instructions)
        .expect("terminal measurements keep the circuit valid")
}

/// Checks an optimization outcome against its measurement-free input: the
/// gate count must not grow, and after mapping surviving wires back to
/// their original indices the unitary must be unchanged up to a global
/// phase. Wires dropped by idle-qubit removal act as identity on both
/// sides.
pub fn check_optimize_equivalence(
    original: &Circuit,
    result: &OptimizeResult,
    tol: f64,
) -> Result<(), String> {
    if original.has_measure() {
        return Err("equivalence oracle needs measurement-free circuits".into());
    }
    if original.num_qubits > MAX_UNITARY_QUBITS {
        return Err("circuit too large for the equivalence oracle".into());
    }
    if result.circuit.gate_count() > original.gate_count() {
        return Err(format!(
            "gate count grew from {} to {}",
            original.gate_count(),
            result.circuit.gate_count()
        ));
    }
    let back: std::collections::BTreeMap<usize, usize> = result
        .qubit_map
        .iter()
        .map(|(&old, &new)| (new, old))
        .collect();
    let instructions = result
        .circuit
        .instructions
        .iter()
        .map(|instr| match instr {
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => Instruction::Gate {
                kind: *kind,
                qubits: qubits.iter().map(|q| back[q]).collect(),
                param: *param,
            },
            Instruction::Measure { qubit, cbit } => Instruction::Measure {
                qubit: back[qubit],
                cbit: *cbit,
            },
        })
        .collect();
    let relabeled =
        Circuit::from_instructions(original.num_qubits, original.num_cbits, instructions)
            .map_err(|e| format!("relabeled circuit is invalid: {e}"))?;
    let before = circuit_unitary(original).map_err(|e| e.to_string())?;
    let after = circuit_unitary(&relabeled).map_err(|e| e.to_string())?;
    if equivalent_up_to_global_phase(&after.data, &before.data, tol) {
        Ok(())
    } else {
        Err("optimized circuit does not match the original unitary".into())
    }
}

/// Checks that every gate in a transpiled program is native to the backend
/// and that every two-qubit gate sits on a directed coupling edge.
pub fn check_native_and_coupled(
    program: &TranspiledProgram,
    backend: &BackendDescriptor,
) -> Result<(), String> {
    if program.backend_id != backend.id {
        return Err(format!(
            "program targets {}, backend is {}",
            program.backend_id, backend.id
        ));
    }
    for (position, instr) in program.circuit.instructions.iter().enumerate() {
        if let Instruction::Gate { kind, qubits, .. } = instr {
            if !backend.is_native(*kind) {
                return Err(format!(
                    "instruction {}: {} is not native to {}",
                    position,
                    kind.mnemonic(),
                    backend.id
                ));
            }
            if let [a, b] = qubits[..] {
                if !backend.has_edge(a, b) {
                    return Err(format!(
                        "instruction {}: no coupling edge {} -> {}",
                        position, a, b
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Checks that a routed program implements the logical circuit. Each
/// logical basis state is embedded on the physical register through the
/// initial layout (ancilla wires start in |0⟩), the physical gates are
/// applied, and amplitudes are read back through the final layout. Ancilla
/// wires must end in |0⟩ up to `tol`, and the resulting matrix must match
/// the logical unitary up to a global phase.
pub fn check_routed_equivalence(
    logical: &Circuit,
    program: &TranspiledProgram,
    tol: f64,
) -> Result<(), String> {
    if logical.has_measure() || program.circuit.has_measure() {
        return Err("equivalence oracle needs measurement-free circuits".into());
    }
    let n = logical.num_qubits;
    let physical_qubits = program.circuit.num_qubits;
    if n > MAX_UNITARY_QUBITS || physical_qubits > MAX_STATEVECTOR_QUBITS {
        return Err("circuit too large for the equivalence oracle".into());
    }

    let layout = &program.layout;
    for (name, map) in [("initial", &layout.initial), ("final", &layout.final_map)] {
        if map.len() != n
            || (0..n).any(|q| !map.contains_key(&q))
            || map.values().any(|&p| p >= physical_qubits)
        {
            return Err(format!("{} layout does not cover the logical register", name));
        }
        let mut images: Vec<usize> = map.values().copied().collect();
        images.sort_unstable();
        images.dedup();
        if images.len() != n {
            return Err(format!("{} layout is not injective", name));
        }
    }

    let mut ancilla_mask = 0usize;
    for p in 0..physical_qubits {
        if !layout.final_map.values().any(|&mapped| mapped == p) {
            ancilla_mask |= 1 << p;
        }
    }

    let expected = circuit_unitary(logical).map_err(|e| e.to_string())?;
    let dim = 1usize << n;
    let mut actual = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let mut state = vec![Complex64::new(0.0, 0.0); 1 << physical_qubits];
        let mut embedded = 0usize;
        for q in 0..n {
            if col >> q & 1 == 1 {
                embedded |= 1 << layout.initial[&q];
            }
        }
        state[embedded] = Complex64::new(1.0, 0.0);
        for instr in &program.circuit.instructions {
            apply_gate(&mut state, instr);
        }
        for (phys_index, amp) in state.iter().enumerate() {
            if phys_index & ancilla_mask != 0 {
                if amp.norm() > tol {
                    return Err(format!(
                        "column {}: ancilla wires carry amplitude {:.3e}",
                        col,
                        amp.norm()
                    ));
                }
                continue;
            }
            let mut row = 0usize;
            for q in 0..n {
                if phys_index >> layout.final_map[&q] & 1 == 1 {
                    row |= 1 << q;
                }
            }
            actual[col * dim + row] += amp;
        }
    }

    if equivalent_up_to_global_phase(&actual, &expected.data, tol) {
        Ok(())
    } else {
        Err("routed program does not match the logical unitary".into())
    }
}
