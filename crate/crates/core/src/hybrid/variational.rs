//! Variational drivers: QAOA for MaxCut and a hardware-efficient VQE.
//!
//! Both share one derivative-free optimizer: sweeps of single-coordinate
//! probes at a fixed step, halving the step whenever a sweep stops
//! improving. Everything is seeded and deterministic.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    cut_size, expectation, Graph, HybridError, Observable, ParameterizedCircuit, PauliOp,
    PInstruction,
};
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::sim::{measurement_distribution, sample_counts, MAX_STATEVECTOR_QUBITS};

/// Deepest QAOA circuit the grid-search stage accepts; the grid has
/// `grid^(2p)` points, so this is a cost guard, not a physics limit.
pub const MAX_GRID_LAYERS: usize = 2;

/// Step size below which coordinate descent stops refining.
pub const MIN_DESCENT_STEP: f64 = 1e-3;

const MAX_SWEEPS: usize = 500;

/// Outcome of a variational optimization. `history` traces the best value
/// at coarse checkpoints: after the grid search and after each step level
/// for QAOA, after each restart for VQE. The cut fields are only present
/// for MaxCut runs.
#[derive(Debug, Clone, Serialize)]
pub struct VariationalResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub history: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_bitstring: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_cut: Option<usize>,
}

/// Coordinate descent with step halving. Probes `x[i] ± step` for each
/// coordinate, keeps strict improvements, repeats the sweep until it stops
/// improving, then halves the step until it drops below `min_step`. Pushes
/// the best value after each step level onto `history`.
fn coordinate_descent<F: FnMut(&[f64]) -> f64>(
    mut eval: F,
    mut x: Vec<f64>,
    mut fx: f64,
    initial_step: f64,
    min_step: f64,
    maximize: bool,
    history: &mut Vec<f64>,
) -> (Vec<f64>, f64) {
    let better = |candidate: f64, current: f64| {
        if maximize {
            candidate > current
        } else {
            candidate < current
        }
    };
    let mut step = initial_step;
    let mut sweeps = 0;
    while step >= min_step && sweeps < MAX_SWEEPS {
        loop {
            let mut improved = false;
            sweeps += 1;
            for i in 0..x.len() {
                for delta in [step, -step] {
                    let previous = x[i];
                    x[i] = previous + delta;
                    let fy = eval(&x);
                    if better(fy, fx) {
                        fx = fy;
                        improved = true;
                    } else {
                        x[i] = previous;
                    }
                }
            }
            if !improved || sweeps >= MAX_SWEEPS {
                break;
            }
        }
        history.push(fx);
        step *= 0.5;
    }
    (x, fx)
}

/// MaxCut cost as an observable: C = Σ_edges (1 - Z_i Z_j) / 2, written as
/// a constant identity term plus one -1/2 Z_iZ_j term per edge.
pub fn maxcut_cost_observable(graph: &Graph) -> Observable {
    let identity = vec![PauliOp::I; graph.n];
    let mut terms = vec![(graph.edges.len() as f64 / 2.0, identity.clone())];
    for (a, b) in graph.sorted_edges() {
        let mut paulis = identity.clone();
        paulis[a] = PauliOp::Z;
        paulis[b] = PauliOp::Z;
        terms.push((-0.5, paulis));
    }
    Observable::new(graph.n, terms).expect("cost observable is well formed")
}

/// QAOA state-preparation circuit for given angles: Hadamards on every
/// qubit, then per layer `k` the phase separator exp(-i γ_k Z_iZ_j) for
/// each sorted edge as a CX·RZ(2γ_k)·CX gadget, followed by the mixer
/// RX(2β_k) on every qubit. No classical register is attached.
pub fn build_qaoa_circuit(
    graph: &Graph,
    gammas: &[f64],
    betas: &[f64],
) -> Result<Circuit, HybridError> {
    graph.validate()?;
    if gammas.is_empty() || gammas.len() != betas.len() {
        return Err(HybridError::InvalidConfig(format!(
            "need equal, non-zero layer counts, got {} gammas and {} betas",
            gammas.len(),
            betas.len()
        )));
    }
    let edges = graph.sorted_edges();
    let mut circuit = Circuit::new(graph.n, 0).map_err(|e| HybridError::InvalidConfig(e.to_string()))?;
    let push = |c: Circuit, instr| {
        c.append(instr)
            .map_err(|e| HybridError::InvalidConfig(e.to_string()))
    };
    for q in 0..graph.n {
        circuit = push(circuit, Instruction::gate1(GateKind::H, q))?;
    }
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        for &(a, b) in &edges {
            circuit = push(circuit, Instruction::gate2(GateKind::Cx, a, b))?;
            circuit = push(circuit, Instruction::rot(GateKind::Rz, b, 2.0 * gamma))?;
            circuit = push(circuit, Instruction::gate2(GateKind::Cx, a, b))?;
        }
        for q in 0..graph.n {
            circuit = push(circuit, Instruction::rot(GateKind::Rx, q, 2.0 * beta))?;
        }
    }
    Ok(circuit)
}

/// QAOA for MaxCut: a full grid search over [0, π)^(2p) seeds coordinate
/// descent on the exact expected cut, then the optimized state is sampled
/// `shots` times and the best observed cut reported (lexicographically
/// smallest assignment on ties).
pub fn run_qaoa(
    graph: &Graph,
    p: usize,
    grid: usize,
    shots: u64,
    seed: u64,
) -> Result<VariationalResult, HybridError> {
    graph.validate()?;
    if p == 0 {
        return Err(HybridError::InvalidConfig("p must be at least 1".into()));
    }
    if p > MAX_GRID_LAYERS {
        return Err(HybridError::InvalidConfig(format!(
            "grid search supports at most {} layers, got {}",
            MAX_GRID_LAYERS, p
        )));
    }
    if grid < 2 {
        return Err(HybridError::InvalidConfig(
            "grid must have at least 2 points per axis".into(),
        ));
    }
    if shots == 0 {
        return Err(HybridError::InvalidConfig("shots must be positive".into()));
    }
    if graph.n > MAX_STATEVECTOR_QUBITS {
        return Err(HybridError::InvalidConfig(format!(
            "graph has {} vertices, simulation supports at most {}",
            graph.n, MAX_STATEVECTOR_QUBITS
        )));
    }

    let cost = maxcut_cost_observable(graph);
    let mut evaluations = 0usize;
    let mut eval = |params: &[f64]| -> f64 {
        evaluations += 1;
        let circuit = build_qaoa_circuit(graph, &params[..p], &params[p..])
            .expect("angles validated by construction");
        expectation(&circuit, &cost).expect("qaoa circuits are simulable")
    };

    let dims = 2 * p;
    let spacing = PI / grid as f64;
    let mut index = vec![0usize; dims];
    let mut best_params = vec![0.0; dims];
    let mut best_value = f64::NEG_INFINITY;
    'grid: loop {
        let params: Vec<f64> = index.iter().map(|&i| i as f64 * spacing).collect();
        let value = eval(&params);
        if value > best_value {
            best_value = value;
            best_params = params;
        }
        let mut d = dims;
        loop {
            if d == 0 {
                break 'grid;
            }
            d -= 1;
            index[d] += 1;
            if index[d] < grid {
                break;
            }
            index[d] = 0;
        }
    }

    let mut history = vec![best_value];
    let (best_params, best_value) = coordinate_descent(
        &mut eval,
        best_params,
        best_value,
        spacing,
        MIN_DESCENT_STEP,
        true,
        &mut history,
    );

    let optimized = build_qaoa_circuit(graph, &best_params[..p], &best_params[p..])?;
    let mut instructions = optimized.instructions;
    for q in 0..graph.n {
        instructions.push(Instruction::measure(q, q));
    }
    let measured = Circuit::from_instructions(graph.n, graph.n, instructions)
        .expect("measured qaoa circuit is valid");
    let histogram = sample_counts(&measurement_distribution(&measured)?, shots, seed);
    let mut best_bitstring = None;
    let mut best_cut = 0;
    for assignment in histogram.keys() {
        let cut = cut_size(graph, assignment);
        if best_bitstring.is_none() || cut > best_cut {
            best_bitstring = Some(assignment.clone());
            best_cut = cut;
        }
    }

    Ok(VariationalResult {
        best_params,
        best_value,
        evaluations,
        history,
        best_cut: best_bitstring.as_ref().map(|_| best_cut),
        best_bitstring,
    })
}

/// Hardware-efficient VQE ansatz: `reps` blocks of an RY rotation on every
/// qubit followed by a CX chain, closed by a final RY layer. Parameters are
/// named `theta0`, `theta1`, … in appearance order, (reps+1)·n in total.
pub fn build_vqe_ansatz(
    num_qubits: usize,
    reps: usize,
) -> Result<ParameterizedCircuit, HybridError> {
    let mut pc = ParameterizedCircuit::new(num_qubits, 0)?;
    let mut next = 0usize;
    let mut ry_layer = |mut pc: ParameterizedCircuit| -> Result<ParameterizedCircuit, HybridError> {
        for q in 0..num_qubits {
            pc = pc.append(PInstruction::rot_sym(
                GateKind::Ry,
                q,
                &format!("theta{}", next),
            ))?;
            next += 1;
        }
        Ok(pc)
    };
    for _ in 0..reps {
        pc = ry_layer(pc)?;
        for q in 0..num_qubits.saturating_sub(1) {
            pc = pc.append(PInstruction::gate2(GateKind::Cx, q, q + 1))?;
        }
    }
    ry_layer(pc)
}

/// VQE ground-state search: `restarts` random starting points in [0, 2π)
/// drawn from a seeded generator, each refined by coordinate descent on the
/// exact expectation. Returns the lowest value found; exact value ties
/// resolve toward the lexicographically smaller parameter vector.
pub fn run_vqe(
    observable: &Observable,
    reps: usize,
    restarts: usize,
    seed: u64,
) -> Result<VariationalResult, HybridError> {
    if restarts == 0 {
        return Err(HybridError::InvalidConfig(
            "restarts must be at least 1".into(),
        ));
    }
    if observable.num_qubits > MAX_STATEVECTOR_QUBITS {
        return Err(HybridError::InvalidConfig(format!(
            "observable has {} qubits, simulation supports at most {}",
            observable.num_qubits, MAX_STATEVECTOR_QUBITS
        )));
    }
    let ansatz = build_vqe_ansatz(observable.num_qubits, reps)?;
    let num_params = ansatz.params().len();
    let mut evaluations = 0usize;
    let mut eval = |params: &[f64]| -> f64 {
        evaluations += 1;
        let circuit = ansatz
            .bind_positional(params)
            .expect("descent supplies one finite value per parameter");
        expectation(&circuit, observable).expect("ansatz circuits are simulable")
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::with_capacity(restarts);
    for _ in 0..restarts {
        let start: Vec<f64> = (0..num_params).map(|_| rng.random::<f64>() * TAU).collect();
        let start_value = eval(&start);
        let mut scratch = Vec::new();
        let (params, value) = coordinate_descent(
            &mut eval,
            start,
            start_value,
            FRAC_PI_4,
            MIN_DESCENT_STEP,
            false,
            &mut scratch,
        );
        let replace = match &best {
            None => true,
            Some((best_params, best_value)) => {
                match value.total_cmp(best_value) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => {
                        params
                            .iter()
                            .zip(best_params)
                            .find_map(|(a, b)| match a.total_cmp(b) {
                                std::cmp::Ordering::Equal => None,
                                order => Some(order == std::cmp::Ordering::Less),
                            })
                            .unwrap_or(false)
                    }
                }
            }
        };
        if replace {
            best = Some((params, value));
        }
        history.push(best.as_ref().expect("a restart has completed").1);
    }
    let (best_params, best_value) = best.expect("at least one restart ran");
    Ok(VariationalResult {
        best_params,
        best_value,
        evaluations,
        history,
        best_bitstring: None,
        best_cut: None,
    })
}
