//! Lowering of logical circuits onto concrete backends.
//!
//! The pipeline has three stages. Decomposition rewrites every gate into the
//! backend's native set, assuming that set offers `rz`, `rx`, and one of
//! `cx` or `cz`. Placement and routing map logical qubits onto physical
//! ones and insert SWAPs until every two-qubit gate acts on coupled qubits.
//! Legalization expands the inserted SWAPs, orients two-qubit gates along
//! directed coupling edges, and re-expands any helper gates that fall
//! outside the native set. A final cancellation and rotation-merge sweep
//! removes the noise these gadgets leave behind.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::analyzer::BackendDescriptor;
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::optimize::{cancel_inverse_pairs, merge_rotations};
use crate::vaql::print_circuit;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranspileError {
    #[error("decompose: backend {backend} must offer rz, rx, and one of cx or cz")]
    UnsupportedNativeSet { backend: String },
    #[error("placement: circuit needs {needed} qubits, backend {backend} offers {available}")]
    InsufficientQubits {
        backend: String,
        needed: usize,
        available: usize,
    },
    #[error("routing: no path between physical qubits {a} and {b} on backend {backend}")]
    Disconnected { backend: String, a: usize, b: usize },
}

/// Logical-to-physical qubit assignment before and after routing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub initial: BTreeMap<usize, usize>,
    #[serde(rename = "final")]
    pub final_map: BTreeMap<usize, usize>,
}

fn circuit_as_text<S: Serializer>(circuit: &Circuit, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&print_circuit(circuit))
}

/// A circuit lowered for one backend: only native gates, only coupled
/// two-qubit operands, measurements retargeted through the final layout.
/// Serializes with the physical circuit in canonical text form.
#[derive(Debug, Clone, Serialize)]
pub struct TranspiledProgram {
    #[serde(serialize_with = "circuit_as_text")]
    pub circuit: Circuit,
    pub layout: Layout,
    pub backend_id: String,
    pub swap_count: usize,
}

fn check_native_set(backend: &BackendDescriptor) -> Result<(), TranspileError> {
    let ok = backend.is_native(GateKind::Rz)
        && backend.is_native(GateKind::Rx)
        && (backend.is_native(GateKind::Cx) || backend.is_native(GateKind::Cz));
    if ok {
        Ok(())
    } else {
        Err(TranspileError::UnsupportedNativeSet {
            backend: backend.id.clone(),
        })
    }
}

/// One-step expansion of a non-native gate. Helper gates in the output may
/// themselves be non-native; callers iterate to a fixpoint. With the native
/// set precondition established, every gate kind has an expansion.
fn expand_gate(kind: GateKind, qubits: &[usize], param: Option<f64>) -> Vec<Instruction> {
    use GateKind::*;
    let q = qubits[0];
    match kind {
        I => vec![],
        X => vec![Instruction::rot(Rx, q, PI)],
        Y => vec![Instruction::rot(Rz, q, PI), Instruction::rot(Rx, q, PI)],
        Z => vec![Instruction::rot(Rz, q, PI)],
        S => vec![Instruction::rot(Rz, q, FRAC_PI_2)],
        Sdg => vec![Instruction::rot(Rz, q, -FRAC_PI_2)],
        T => vec![Instruction::rot(Rz, q, FRAC_PI_4)],
        Tdg => vec![Instruction::rot(Rz, q, -FRAC_PI_4)],
        H => vec![
            Instruction::rot(Rz, q, FRAC_PI_2),
            Instruction::rot(Rx, q, FRAC_PI_2),
            Instruction::rot(Rz, q, FRAC_PI_2),
        ],
        Ry => {
            let theta = param.expect("ry carries an angle");
            vec![
                Instruction::rot(Rz, q, -FRAC_PI_2),
                Instruction::rot(Rx, q, theta),
                Instruction::rot(Rz, q, FRAC_PI_2),
            ]
        }
        Rx | Rz => unreachable!("rx and rz are native by precondition"),
        Swap => {
            let (a, b) = (qubits[0], qubits[1]);
            vec![
                Instruction::gate2(Cx, a, b),
                Instruction::gate2(Cx, b, a),
                Instruction::gate2(Cx, a, b),
            ]
        }
        Cx => {
            // cz is native here, by the precondition.
            let (a, b) = (qubits[0], qubits[1]);
            vec![
                Instruction::gate1(H, b),
                Instruction::gate2(Cz, a, b),
                Instruction::gate1(H, b),
            ]
        }
        Cz => {
            let (a, b) = (qubits[0], qubits[1]);
            vec![
                Instruction::gate1(H, b),
                Instruction::gate2(Cx, a, b),
                Instruction::gate1(H, b),
            ]
        }
    }
}

/// Rewrites every gate into the backend's native set, preserving the
/// unitary up to global phase. Gate operands are untouched; connectivity is
/// the routing stage's concern.
pub fn decompose_to_native(
    circuit: &Circuit,
    backend: &BackendDescriptor,
) -> Result<Circuit, TranspileError> {
    check_native_set(backend)?;
    let mut instructions = circuit.instructions.clone();
    loop {
        let mut out = Vec::with_capacity(instructions.len());
        let mut changed = false;
        for instr in &instructions {
            match instr {
                Instruction::Measure { .. } => out.push(instr.clone()),
                Instruction::Gate {
                    kind,
                    qubits,
                    param,
                } => {
                    if backend.is_native(*kind) {
                        out.push(instr.clone());
                    } else {
                        out.extend(expand_gate(*kind, qubits, *param));
                        changed = true;
                    }
                }
            }
        }
        instructions = out;
        if !changed {
            break;
        }
    }
    Ok(Circuit {
        num_qubits: circuit.num_qubits,
        num_cbits: circuit.num_cbits,
        instructions,
    })
}

struct Topology {
    adjacency: Vec<Vec<usize>>,
    dist: Vec<Vec<Option<usize>>>,
}

impl Topology {
    fn of(backend: &BackendDescriptor) -> Topology {
        let adjacency = backend.adjacency();
        let n = backend.num_qubits;
        let mut dist = vec![vec![None; n]; n];
        for start in 0..n {
            dist[start][start] = Some(0);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let d = dist[start][v].expect("visited nodes have distances");
                for &u in &adjacency[v] {
                    if dist[start][u].is_none() {
                        dist[start][u] = Some(d + 1);
                        queue.push_back(u);
                    }
                }
            }
        }
        Topology { adjacency, dist }
    }
}

/// Interaction weight per unordered logical qubit pair.
fn interaction_weights(circuit: &Circuit) -> BTreeMap<(usize, usize), usize> {
    let mut weights = BTreeMap::new();
    for instr in &circuit.instructions {
        if let Instruction::Gate { qubits, .. } = instr {
            if let [a, b] = qubits[..] {
                *weights.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
    weights
}

/// SWAPs a layout would need if every interaction were routed on a shortest
/// path, or `None` if some interacting pair is disconnected.
fn estimated_swaps(
    layout: &[usize],
    weights: &BTreeMap<(usize, usize), usize>,
    topo: &Topology,
) -> Option<usize> {
    let mut swaps = 0;
    for (&(a, b), &w) in weights {
        let d = topo.dist[layout[a]][layout[b]]?;
        swaps += w * (d - 1);
    }
    Some(swaps)
}

/// Frequency-driven placement: the most-interacting logical qubit seeds the
/// highest-degree physical qubit, then each remaining qubit (strongest link
/// to the placed set first) takes the free slot minimizing weighted distance
/// to its placed partners. All ties break toward lower indices.
fn greedy_placement(
    num_logical: usize,
    weights: &BTreeMap<(usize, usize), usize>,
    topo: &Topology,
) -> Vec<usize> {
    let num_physical = topo.adjacency.len();
    let far = num_physical * num_physical + 1;
    let mut total = vec![0usize; num_logical];
    for (&(a, b), &w) in weights {
        total[a] += w;
        total[b] += w;
    }
    let mut layout: Vec<Option<usize>> = vec![None; num_logical];
    let mut used = vec![false; num_physical];
    for round in 0..num_logical {
        let next = (0..num_logical)
            .filter(|&l| layout[l].is_none())
            .max_by_key(|&l| {
                let link: usize = weights
                    .iter()
                    .filter_map(|(&(a, b), &w)| match () {
                        _ if a == l && layout[b].is_some() => Some(w),
                        _ if b == l && layout[a].is_some() => Some(w),
                        _ => None,
                    })
                    .sum();
                (link, total[l], std::cmp::Reverse(l))
            })
            .expect("an unplaced logical qubit remains");
        let partners: Vec<(usize, usize)> = weights
            .iter()
            .filter_map(|(&(a, b), &w)| match () {
                _ if a == next => layout[b].map(|p| (p, w)),
                _ if b == next => layout[a].map(|p| (p, w)),
                _ => None,
            })
            .collect();
        let slot = if !partners.is_empty() {
            (0..num_physical)
                .filter(|&p| !used[p])
                .min_by_key(|&p| {
                    let cost: usize = partners
                        .iter()
                        .map(|&(pp, w)| w * topo.dist[p][pp].unwrap_or(far))
                        .sum();
                    (cost, p)
                })
                .expect("a free physical qubit remains")
        } else if round == 0 && total[next] > 0 {
            (0..num_physical)
                .filter(|&p| !used[p])
                .max_by_key(|&p| (topo.adjacency[p].len(), std::cmp::Reverse(p)))
                .expect("a free physical qubit remains")
        } else {
            (0..num_physical)
                .find(|&p| !used[p])
                .expect("a free physical qubit remains")
        };
        layout[next] = Some(slot);
        used[slot] = true;
    }
    layout
        .into_iter()
        .map(|slot| slot.expect("every logical qubit was placed"))
        .collect()
}

/// Maps logical qubits onto physical ones and inserts SWAPs so that every
/// two-qubit gate acts on adjacent physical qubits.
///
/// The identity layout is kept unless the frequency-driven placement
/// strictly lowers the estimated SWAP count. Routing walks the first
/// operand along a breadth-first shortest path, always taking the
/// lowest-index next hop. Measurements are collected during the scan and
/// re-emitted at the end, retargeted through the final layout, so inserted
/// SWAPs never act on an already-measured wire.
pub fn place_and_route(
    circuit: &Circuit,
    backend: &BackendDescriptor,
) -> Result<(Circuit, Layout, usize), TranspileError> {
    if circuit.num_qubits > backend.num_qubits {
        return Err(TranspileError::InsufficientQubits {
            backend: backend.id.clone(),
            needed: circuit.num_qubits,
            available: backend.num_qubits,
        });
    }
    let topo = Topology::of(backend);
    let weights = interaction_weights(circuit);
    let identity: Vec<usize> = (0..circuit.num_qubits).collect();
    let greedy = greedy_placement(circuit.num_qubits, &weights, &topo);
    let use_greedy = match (
        estimated_swaps(&greedy, &weights, &topo),
        estimated_swaps(&identity, &weights, &topo),
    ) {
        (Some(g), Some(i)) => g < i,
        (Some(_), None) => true,
        _ => false,
    };
    let initial = if use_greedy { greedy } else { identity };

    let mut log2phys = initial.clone();
    let mut phys2log: Vec<Option<usize>> = vec![None; backend.num_qubits];
    for (l, &p) in initial.iter().enumerate() {
        phys2log[p] = Some(l);
    }
    let mut out = Vec::with_capacity(circuit.instructions.len());
    let mut deferred: Vec<(usize, usize)> = Vec::new();
    let mut swap_count = 0;
    for instr in &circuit.instructions {
        match instr {
            Instruction::Measure { qubit, cbit } => deferred.push((*qubit, *cbit)),
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => {
                if let [q] = qubits[..] {
                    out.push(Instruction::Gate {
                        kind: *kind,
                        qubits: vec![log2phys[q]],
                        param: *param,
                    });
                    continue;
                }
                let (a, b) = (qubits[0], qubits[1]);
                let mut pa = log2phys[a];
                let pb = log2phys[b];
                let Some(mut d) = topo.dist[pa][pb] else {
                    return Err(TranspileError::Disconnected {
                        backend: backend.id.clone(),
                        a: pa,
                        b: pb,
                    });
                };
                while d > 1 {
                    let hop = topo.adjacency[pa]
                        .iter()
                        .copied()
                        .filter(|&u| topo.dist[u][pb] == Some(d - 1))
                        .min()
                        .expect("shortest path has a next hop");
                    out.push(Instruction::gate2(GateKind::Swap, pa, hop));
                    swap_count += 1;
                    let (la, lh) = (phys2log[pa], phys2log[hop]);
                    phys2log[pa] = lh;
                    phys2log[hop] = la;
                    if let Some(l) = lh {
                        log2phys[l] = pa;
                    }
                    if let Some(l) = la {
                        log2phys[l] = hop;
                    }
                    pa = hop;
                    d -= 1;
                }
                out.push(Instruction::Gate {
                    kind: *kind,
                    qubits: vec![pa, log2phys[b]],
                    param: *param,
                });
            }
        }
    }
    for (logical, cbit) in deferred {
        out.push(Instruction::measure(log2phys[logical], cbit));
    }
    let layout = Layout {
        initial: initial.iter().enumerate().map(|(l, &p)| (l, p)).collect(),
        final_map: log2phys.iter().enumerate().map(|(l, &p)| (l, p)).collect(),
    };
    let physical = Circuit {
        num_qubits: backend.num_qubits,
        num_cbits: circuit.num_cbits,
        instructions: out,
    };
    Ok((physical, layout, swap_count))
}

/// Makes a routed physical circuit executable as-is: SWAPs and other
/// non-native helpers expand through the shared rule table, symmetric gates
/// flip onto the available directed edge, and a CX against the coupling
/// direction is conjugated with Hadamards.
pub fn legalize(circuit: &Circuit, backend: &BackendDescriptor) -> Result<Circuit, TranspileError> {
    check_native_set(backend)?;
    let mut instructions = circuit.instructions.clone();
    loop {
        let mut out = Vec::with_capacity(instructions.len());
        let mut changed = false;
        for instr in &instructions {
            let Instruction::Gate {
                kind,
                qubits,
                param,
            } = instr
            else {
                out.push(instr.clone());
                continue;
            };
            if !backend.is_native(*kind) {
                out.extend(expand_gate(*kind, qubits, *param));
                changed = true;
                continue;
            }
            let [a, b] = qubits[..] else {
                out.push(instr.clone());
                continue;
            };
            if backend.has_edge(a, b) {
                out.push(instr.clone());
            } else if backend.has_edge(b, a) {
                changed = true;
                match kind {
                    GateKind::Cz | GateKind::Swap => out.push(Instruction::gate2(*kind, b, a)),
                    GateKind::Cx => out.extend([
                        Instruction::gate1(GateKind::H, a),
                        Instruction::gate1(GateKind::H, b),
                        Instruction::gate2(GateKind::Cx, b, a),
                        Instruction::gate1(GateKind::H, a),
                        Instruction::gate1(GateKind::H, b),
                    ]),
                    _ => unreachable!("two-qubit gates are cx, cz, swap"),
                }
            } else {
                return Err(TranspileError::Disconnected {
                    backend: backend.id.clone(),
                    a,
                    b,
                });
            }
        }
        instructions = out;
        if !changed {
            break;
        }
    }
    Ok(Circuit {
        num_qubits: circuit.num_qubits,
        num_cbits: circuit.num_cbits,
        instructions,
    })
}

/// Full lowering pipeline: decompose, place and route, legalize, then a
/// cancellation and rotation-merge sweep over the physical circuit.
pub fn transpile(
    circuit: &Circuit,
    backend: &BackendDescriptor,
) -> Result<TranspiledProgram, TranspileError> {
    let decomposed = decompose_to_native(circuit, backend)?;
    let (routed, layout, swap_count) = place_and_route(&decomposed, backend)?;
    let legal = legalize(&routed, backend)?;
    let (cleaned, _) = cancel_inverse_pairs(&legal);
    let (cleaned, _) = merge_rotations(&cleaned);
    Ok(TranspiledProgram {
        circuit: cleaned,
        layout,
        backend_id: backend.id.clone(),
        swap_count,
    })
}
