//! Peephole circuit optimization.
//!
//! Three rewrite families run to a joint fixpoint: cancellation of adjacent
//! inverse pairs, merging of same-axis rotations, and template substitution.
//! "Adjacent" is always modulo commutation with instructions on disjoint
//! qubits. Every pass is a pure function from circuit to circuit plus a
//! report; measurements are never moved, retargeted, or removed.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind, Instruction};
use crate::sim::{circuit_unitary, equivalent_up_to_global_phase};

/// Angle magnitude below which a rotation counts as the identity.
pub const ANGLE_EPS: f64 = 1e-12;

/// Tolerance at which template replacements must reproduce their patterns.
pub const TEMPLATE_TOL: f64 = 1e-12;

/// Upper bound on optimization rounds; every rewrite strictly shrinks the
/// circuit, so this is a defensive cap, not a tuning knob.
pub const MAX_OPTIMIZE_ROUNDS: usize = 100;

/// What a pass did to the circuit.
#[derive(Debug, Clone, Serialize)]
pub struct PassReport {
    pub pass: &'static str,
    pub rewrites: usize,
    pub gates_before: usize,
    pub gates_after: usize,
}

impl PassReport {
    fn new(pass: &'static str, rewrites: usize, before: &Circuit, after: &Circuit) -> PassReport {
        PassReport {
            pass,
            rewrites,
            gates_before: before.gate_count(),
            gates_after: after.gate_count(),
        }
    }
}

/// Folds `theta` into the canonical range (-π, π].
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn is_rotation(kind: GateKind) -> bool {
    matches!(kind, GateKind::Rx | GateKind::Ry | GateKind::Rz)
}

/// Whether `a` immediately followed by `b` is the identity. Rotations are
/// left to [`merge_rotations`]; `i` is left to idle-qubit removal.
fn inverse_pair(a: &Instruction, b: &Instruction) -> bool {
    let (
        Instruction::Gate {
            kind: ka,
            qubits: qa,
            ..
        },
        Instruction::Gate {
            kind: kb,
            qubits: qb,
            ..
        },
    ) = (a, b)
    else {
        return false;
    };
    use GateKind::*;
    match (ka, kb) {
        (H, H) | (X, X) | (Y, Y) | (Z, Z) => qa == qb,
        (S, Sdg) | (Sdg, S) | (T, Tdg) | (Tdg, T) => qa == qb,
        (Cx, Cx) => qa == qb,
        (Cz, Cz) | (Swap, Swap) => qa == qb || (qa[0] == qb[1] && qa[1] == qb[0]),
        _ => false,
    }
}

fn can_cancel(instr: &Instruction) -> bool {
    match instr {
        Instruction::Gate { kind, .. } => !matches!(kind, GateKind::I) && !is_rotation(*kind),
        Instruction::Measure { .. } => false,
    }
}

fn shares_qubit(instr: &Instruction, qubits: &[usize]) -> bool {
    instr.qubits().iter().any(|q| qubits.contains(q))
}

fn with_instructions(circuit: &Circuit, instructions: Vec<Instruction>) -> Circuit {
    Circuit {
        num_qubits: circuit.num_qubits,
        num_cbits: circuit.num_cbits,
        instructions,
    }
}

/// Removes pairs of mutually inverse gates separated only by instructions on
/// disjoint qubits, repeating until no pair remains.
pub fn cancel_inverse_pairs(circuit: &Circuit) -> (Circuit, PassReport) {
    let mut instrs = circuit.instructions.clone();
    let mut rewrites = 0;
    'fixpoint: loop {
        for i in 0..instrs.len() {
            if !can_cancel(&instrs[i]) {
                continue;
            }
            let operands = instrs[i].qubits().to_vec();
            for j in i + 1..instrs.len() {
                if !shares_qubit(&instrs[j], &operands) {
                    continue;
                }
                if inverse_pair(&instrs[i], &instrs[j]) {
                    instrs.remove(j);
                    instrs.remove(i);
                    rewrites += 1;
                    continue 'fixpoint;
                }
                // The first overlapping instruction is not the inverse, so
                // nothing further right can reach instruction i.
                break;
            }
        }
        break;
    }
    let out = with_instructions(circuit, instrs);
    let report = PassReport::new("cancel_inverse_pairs", rewrites, circuit, &out);
    (out, report)
}

/// Merges same-axis rotations on the same qubit separated only by
/// instructions on disjoint qubits. Merged angles are folded into (-π, π];
/// rotations whose canonical angle is below [`ANGLE_EPS`] are removed, which
/// changes the circuit by at most a global phase.
pub fn merge_rotations(circuit: &Circuit) -> (Circuit, PassReport) {
    let mut instrs = circuit.instructions.clone();
    let mut rewrites = 0;
    'fixpoint: loop {
        for i in 0..instrs.len() {
            let Instruction::Gate {
                kind,
                qubits,
                param: Some(angle),
            } = &instrs[i]
            else {
                continue;
            };
            if !is_rotation(*kind) {
                continue;
            }
            if canonical_angle(*angle).abs() < ANGLE_EPS {
                instrs.remove(i);
                rewrites += 1;
                continue 'fixpoint;
            }
            let (axis, qubit, first) = (*kind, qubits[0], *angle);
            for j in i + 1..instrs.len() {
                if !shares_qubit(&instrs[j], &[qubit]) {
                    continue;
                }
                if let Instruction::Gate {
                    kind: other_axis,
                    param: Some(second),
                    ..
                } = &instrs[j]
                {
                    if *other_axis == axis {
                        let merged = canonical_angle(first + second);
                        instrs.remove(j);
                        if merged.abs() < ANGLE_EPS {
                            instrs.remove(i);
                        } else {
                            instrs[i] = Instruction::rot(axis, qubit, merged);
                        }
                        rewrites += 1;
                        continue 'fixpoint;
                    }
                }
                break;
            }
        }
        break;
    }
    let out = with_instructions(circuit, instrs);
    let report = PassReport::new("merge_rotations", rewrites, circuit, &out);
    (out, report)
}

/// One gate of a template, with role indices in place of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateOp {
    pub kind: GateKind,
    pub roles: Vec<usize>,
    pub param: Option<f64>,
}

impl TemplateOp {
    pub fn one(kind: GateKind, role: usize) -> TemplateOp {
        TemplateOp {
            kind,
            roles: vec![role],
            param: None,
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> TemplateOp {
        TemplateOp {
            kind,
            roles: vec![a, b],
            param: None,
        }
    }

    fn to_instruction(&self, binding: &[Option<usize>]) -> Instruction {
        Instruction::Gate {
            kind: self.kind,
            qubits: self
                .roles
                .iter()
                .map(|&r| binding[r].expect("replacement roles are bound by the pattern"))
                .collect(),
            param: self.param,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("template {name}: {message}")]
    Invalid { name: String, message: String },
    #[error("template {name}: replacement does not reproduce the pattern unitary")]
    NotEquivalent { name: String },
}

/// A verified rewrite rule: any subcircuit matching `pattern` (up to a
/// renaming of roles to qubits) may be replaced by `replacement`.
/// Construction fails unless both sides have the same unitary up to global
/// phase at [`TEMPLATE_TOL`].
#[derive(Debug, Clone)]
pub struct Template {
    pub name: String,
    pub num_roles: usize,
    pub pattern: Vec<TemplateOp>,
    pub replacement: Vec<TemplateOp>,
}

impl Template {
    pub fn new(
        name: &str,
        num_roles: usize,
        pattern: Vec<TemplateOp>,
        replacement: Vec<TemplateOp>,
    ) -> Result<Template, TemplateError> {
        let invalid = |message: String| TemplateError::Invalid {
            name: name.to_string(),
            message,
        };
        if num_roles == 0 {
            return Err(invalid("a template needs at least one role".into()));
        }
        if pattern.is_empty() {
            return Err(invalid("pattern must not be empty".into()));
        }
        let mut pattern_roles = HashSet::new();
        for op in pattern.iter().chain(&replacement) {
            if op.roles.len() != op.kind.arity() {
                return Err(invalid(format!("{} has wrong arity", op.kind)));
            }
            if op.kind.arity() == 2 && op.roles[0] == op.roles[1] {
                return Err(invalid(format!("{} repeats a role", op.kind)));
            }
            if op.kind.has_param() != op.param.is_some() {
                return Err(invalid(format!("{} has wrong parameter count", op.kind)));
            }
            if op.roles.iter().any(|&r| r >= num_roles) {
                return Err(invalid("role index out of range".into()));
            }
        }
        for op in &pattern {
            pattern_roles.extend(op.roles.iter().copied());
        }
        for op in &replacement {
            if op.roles.iter().any(|r| !pattern_roles.contains(r)) {
                return Err(invalid("replacement uses a role the pattern never binds".into()));
            }
        }

        let as_circuit = |ops: &[TemplateOp]| {
            let instructions = ops
                .iter()
                .map(|op| Instruction::Gate {
                    kind: op.kind,
                    qubits: op.roles.clone(),
                    param: op.param,
                })
                .collect();
            Circuit::from_instructions(num_roles, 0, instructions)
        };
        let lhs = as_circuit(&pattern).map_err(|e| invalid(e.to_string()))?;
        let rhs = as_circuit(&replacement).map_err(|e| invalid(e.to_string()))?;
        let u_lhs = circuit_unitary(&lhs).map_err(|e| invalid(e.to_string()))?;
        let u_rhs = circuit_unitary(&rhs).map_err(|e| invalid(e.to_string()))?;
        if !equivalent_up_to_global_phase(&u_lhs.data, &u_rhs.data, TEMPLATE_TOL) {
            return Err(TemplateError::NotEquivalent {
                name: name.to_string(),
            });
        }
        Ok(Template {
            name: name.to_string(),
            num_roles,
            pattern,
            replacement,
        })
    }
}

/// The built-in template library: CX direction reversal via Hadamards and
/// the T·T→S, S·S→Z, H·Z·H→X contractions.
pub fn standard_templates() -> Vec<Template> {
    use GateKind::*;
    let t = |name, num_roles, pattern, replacement| {
        Template::new(name, num_roles, pattern, replacement)
            .expect("built-in templates are equivalence-checked")
    };
    vec![
        t(
            "cx_reversal",
            2,
            vec![
                TemplateOp::one(H, 0),
                TemplateOp::one(H, 1),
                TemplateOp::two(Cx, 0, 1),
                TemplateOp::one(H, 0),
                TemplateOp::one(H, 1),
            ],
            vec![TemplateOp::two(Cx, 1, 0)],
        ),
        t(
            "tt_to_s",
            1,
            vec![TemplateOp::one(T, 0), TemplateOp::one(T, 0)],
            vec![TemplateOp::one(S, 0)],
        ),
        t(
            "ss_to_z",
            1,
            vec![TemplateOp::one(S, 0), TemplateOp::one(S, 0)],
            vec![TemplateOp::one(Z, 0)],
        ),
        t(
            "hzh_to_x",
            1,
            vec![
                TemplateOp::one(H, 0),
                TemplateOp::one(Z, 0),
                TemplateOp::one(H, 0),
            ],
            vec![TemplateOp::one(X, 0)],
        ),
    ]
}

struct TemplateMatch {
    indices: Vec<usize>,
    binding: Vec<Option<usize>>,
}

/// Tries to bind `op` to `instr` given the current role binding. Bindings
/// are injective, and an instruction whose qubits were touched by a skipped
/// instruction cannot match, because it could no longer commute to the left.
fn op_matches(
    instr: &Instruction,
    op: &TemplateOp,
    binding: &mut [Option<usize>],
    blocked: &HashSet<usize>,
) -> bool {
    let Instruction::Gate {
        kind,
        qubits,
        param,
    } = instr
    else {
        return false;
    };
    if *kind != op.kind || *param != op.param {
        return false;
    }
    if qubits.iter().any(|q| blocked.contains(q)) {
        return false;
    }
    let mut fresh: Vec<(usize, usize)> = Vec::new();
    for (&role, &qubit) in op.roles.iter().zip(qubits) {
        match binding[role] {
            Some(bound) if bound == qubit => {}
            Some(_) => return false,
            None => {
                let taken = binding.iter().any(|b| *b == Some(qubit))
                    || fresh.iter().any(|&(_, q)| q == qubit);
                if taken {
                    return false;
                }
                fresh.push((role, qubit));
            }
        }
    }
    for (role, qubit) in fresh {
        binding[role] = Some(qubit);
    }
    true
}

/// Greedy match of `template` starting exactly at `start`. Later pattern
/// gates may sit further right as long as every skipped instruction stays on
/// disjoint qubits; a final sweep re-checks the skipped instructions against
/// the complete binding.
fn match_template(
    instrs: &[Instruction],
    start: usize,
    template: &Template,
) -> Option<TemplateMatch> {
    let mut binding: Vec<Option<usize>> = vec![None; template.num_roles];
    let mut indices = Vec::with_capacity(template.pattern.len());
    let mut blocked: HashSet<usize> = HashSet::new();
    let mut pos = start;
    for op in &template.pattern {
        loop {
            let instr = instrs.get(pos)?;
            if op_matches(instr, op, &mut binding, &blocked) {
                indices.push(pos);
                pos += 1;
                break;
            }
            if indices.is_empty() {
                return None;
            }
            blocked.extend(instr.qubits().iter().copied());
            pos += 1;
        }
    }
    let bound: HashSet<usize> = binding.iter().flatten().copied().collect();
    let first = indices[0];
    let last = *indices.last().expect("pattern is non-empty");
    for k in first..=last {
        if indices.contains(&k) {
            continue;
        }
        if instrs[k].qubits().iter().any(|q| bound.contains(q)) {
            return None;
        }
    }
    Some(TemplateMatch { indices, binding })
}

/// Single greedy left-to-right template pass. On a match, the replacement is
/// spliced where the first matched gate stood, skipped instructions within
/// the span follow it unchanged, and scanning resumes after the replacement.
pub fn apply_templates(circuit: &Circuit, templates: &[Template]) -> (Circuit, PassReport) {
    let mut instrs = circuit.instructions.clone();
    let mut rewrites = 0;
    let mut pos = 0;
    while pos < instrs.len() {
        let hit = templates
            .iter()
            .find_map(|t| match_template(&instrs, pos, t).map(|m| (t, m)));
        let Some((template, found)) = hit else {
            pos += 1;
            continue;
        };
        let replacement: Vec<Instruction> = template
            .replacement
            .iter()
            .map(|op| op.to_instruction(&found.binding))
            .collect();
        let last = *found.indices.last().expect("pattern is non-empty");
        let mut spliced = Vec::with_capacity(instrs.len());
        spliced.extend_from_slice(&instrs[..pos]);
        let advance = replacement.len();
        spliced.extend(replacement);
        for k in pos..=last {
            if !found.indices.contains(&k) {
                spliced.push(instrs[k].clone());
            }
        }
        spliced.extend_from_slice(&instrs[last + 1..]);
        instrs = spliced;
        rewrites += 1;
        pos += advance;
    }
    let out = with_instructions(circuit, instrs);
    let report = PassReport::new("apply_templates", rewrites, circuit, &out);
    (out, report)
}

/// Drops qubits no instruction touches and renumbers the rest in ascending
/// order. At least one qubit always survives. The returned map sends old
/// indices of kept qubits to their new positions.
pub fn remove_idle_qubits(circuit: &Circuit) -> (Circuit, PassReport, BTreeMap<usize, usize>) {
    let mut used = vec![false; circuit.num_qubits];
    for instr in &circuit.instructions {
        for &q in instr.qubits() {
            used[q] = true;
        }
    }
    if used.iter().all(|&u| !u) {
        used[0] = true;
    }
    let mut map = BTreeMap::new();
    for (old, &keep) in used.iter().enumerate() {
        if keep {
            map.insert(old, map.len());
        }
    }
    let removed = circuit.num_qubits - map.len();
    let instructions = circuit
        .instructions
        .iter()
        .map(|instr| match instr {
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => Instruction::Gate {
                kind: *kind,
                qubits: qubits.iter().map(|q| map[q]).collect(),
                param: *param,
            },
            Instruction::Measure { qubit, cbit } => Instruction::Measure {
                qubit: map[qubit],
                cbit: *cbit,
            },
        })
        .collect();
    let out = Circuit {
        num_qubits: map.len(),
        num_cbits: circuit.num_cbits,
        instructions,
    };
    let report = PassReport::new("remove_idle_qubits", removed, circuit, &out);
    (out, report, map)
}

/// What the optimizer is asked to minimize. Both objectives currently run
/// the same pass pipeline; the choice is carried through to the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Size,
    Depth,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    pub circuit: Circuit,
    pub objective: Objective,
    pub rounds: usize,
    pub reports: Vec<PassReport>,
    /// Original qubit index to final index, for qubits that survived
    /// idle-qubit removal.
    pub qubit_map: BTreeMap<usize, usize>,
}

/// Runs rounds of cancel, merge, template, and idle-removal passes until a
/// round performs no rewrite. Gate count never increases; the unitary is
/// preserved up to global phase modulo the qubit renumbering in `qubit_map`.
pub fn optimize(circuit: &Circuit, objective: Objective) -> OptimizeResult {
    let templates = standard_templates();
    let mut current = circuit.clone();
    let mut qubit_map: BTreeMap<usize, usize> =
        (0..circuit.num_qubits).map(|q| (q, q)).collect();
    let mut reports = Vec::new();
    let mut rounds = 0;
    while rounds < MAX_OPTIMIZE_ROUNDS {
        rounds += 1;
        let (c, r_cancel) = cancel_inverse_pairs(&current);
        let (c, r_merge) = merge_rotations(&c);
        let (c, r_templates) = apply_templates(&c, &templates);
        let (c, r_idle, round_map) = remove_idle_qubits(&c);
        let round_rewrites =
            r_cancel.rewrites + r_merge.rewrites + r_templates.rewrites + r_idle.rewrites;
        reports.extend([r_cancel, r_merge, r_templates, r_idle]);
        qubit_map = qubit_map
            .into_iter()
            .filter_map(|(old, mid)| round_map.get(&mid).map(|&fin| (old, fin)))
            .collect();
        current = c;
        if round_rewrites == 0 {
            break;
        }
    }
    OptimizeResult {
        circuit: current,
        objective,
        rounds,
        reports,
        qubit_map,
    }
}
