//! Circuit resource profiling and backend selection.
//!
//! A [`CircuitProfile`] summarizes the resources a circuit needs. A
//! [`BackendDescriptor`] captures what a device offers: register size,
//! native gate set, directed coupling, error rates, and price. Selection
//! transpiles the circuit for every candidate, scores the program that would
//! actually run, and ranks the feasible devices.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind, Instruction};
use crate::transpiler::transpile;

/// Static resource summary of a circuit. The histogram counts instructions
/// by mnemonic, with measurements under the key `"measure"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitProfile {
    pub num_qubits: usize,
    pub num_cbits: usize,
    pub depth: usize,
    pub gate_histogram: BTreeMap<String, usize>,
    pub t_count: usize,
    pub two_qubit_count: usize,
    pub measure_count: usize,
}

/// Profiles a circuit in one pass plus the depth layering.
pub fn profile(circuit: &Circuit) -> CircuitProfile {
    let mut gate_histogram = BTreeMap::new();
    let mut t_count = 0;
    let mut two_qubit_count = 0;
    let mut measure_count = 0;
    for instr in &circuit.instructions {
        match instr {
            Instruction::Gate { kind, .. } => {
                *gate_histogram
                    .entry(kind.mnemonic().to_string())
                    .or_insert(0) += 1;
                if matches!(kind, GateKind::T | GateKind::Tdg) {
                    t_count += 1;
                }
                if kind.arity() == 2 {
                    two_qubit_count += 1;
                }
            }
            Instruction::Measure { .. } => {
                *gate_histogram.entry("measure".to_string()).or_insert(0) += 1;
                measure_count += 1;
            }
        }
    }
    CircuitProfile {
        num_qubits: circuit.num_qubits,
        num_cbits: circuit.num_cbits,
        depth: circuit.depth(),
        gate_histogram,
        t_count,
        two_qubit_count,
        measure_count,
    }
}

/// Assembly dialect a backend ingests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assembler {
    Qasm2,
    Quil,
}

/// Device capability record, typically loaded from a registry JSON file.
/// `coupling_map` lists directed edges: a two-qubit native gate may be
/// applied from `from` to `to` for each `[from, to]` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendDescriptor {
    pub id: String,
    pub vendor: String,
    pub num_qubits: usize,
    pub native_gates: BTreeSet<String>,
    pub coupling_map: Vec<[usize; 2]>,
    pub error_1q: f64,
    pub error_2q: f64,
    pub readout_error: f64,
    pub cost_per_shot: f64,
    pub assembler: Assembler,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzerError {
    #[error("backend {backend}: {message}")]
    InvalidBackend { backend: String, message: String },
    #[error("registry: {0}")]
    MalformedRegistry(String),
    #[error("duplicate backend id {0}")]
    DuplicateBackendId(String),
    #[error("gate {gate} is not native to backend {backend}")]
    NonNativeGate { gate: String, backend: String },
}

impl BackendDescriptor {
    pub fn validate(&self) -> Result<(), AnalyzerError> {
        let fail = |message: String| {
            Err(AnalyzerError::InvalidBackend {
                backend: self.id.clone(),
                message,
            })
        };
        if self.id.is_empty() {
            return fail("id must not be empty".into());
        }
        if self.num_qubits == 0 {
            return fail("num_qubits must be positive".into());
        }
        for gate in &self.native_gates {
            if GateKind::from_mnemonic(gate).is_none() {
                return fail(format!("unknown native gate '{}'", gate));
            }
        }
        for &[from, to] in &self.coupling_map {
            if from >= self.num_qubits || to >= self.num_qubits {
                return fail(format!("coupling edge [{}, {}] out of range", from, to));
            }
            if from == to {
                return fail(format!("coupling edge [{}, {}] is a self-loop", from, to));
            }
        }
        for (name, rate) in [
            ("error_1q", self.error_1q),
            ("error_2q", self.error_2q),
            ("readout_error", self.readout_error),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return fail(format!("{} must lie in [0, 1), got {}", name, rate));
            }
        }
        if !self.cost_per_shot.is_finite() || self.cost_per_shot < 0.0 {
            return fail(format!(
                "cost_per_shot must be a finite non-negative number, got {}",
                self.cost_per_shot
            ));
        }
        Ok(())
    }

    pub fn is_native(&self, kind: GateKind) -> bool {
        self.native_gates.contains(kind.mnemonic())
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.coupling_map.contains(&[from, to])
    }

    /// Undirected neighbor lists derived from the coupling map.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut neighbors = vec![BTreeSet::new(); self.num_qubits];
        for &[from, to] in &self.coupling_map {
            neighbors[from].insert(to);
            neighbors[to].insert(from);
        }
        neighbors
            .into_iter()
            .map(|set| set.into_iter().collect())
            .collect()
    }
}

/// Parses and validates a JSON array of backend descriptors. Ids must be
/// unique; every descriptor must pass [`BackendDescriptor::validate`].
pub fn parse_registry(json: &str) -> Result<Vec<BackendDescriptor>, AnalyzerError> {
    let backends: Vec<BackendDescriptor> =
        serde_json::from_str(json).map_err(|e| AnalyzerError::MalformedRegistry(e.to_string()))?;
    let mut seen = BTreeSet::new();
    for backend in &backends {
        backend.validate()?;
        if !seen.insert(backend.id.clone()) {
            return Err(AnalyzerError::DuplicateBackendId(backend.id.clone()));
        }
    }
    Ok(backends)
}

/// Multiplicative success estimate: each single-qubit gate survives with
/// probability 1-error_1q, each two-qubit gate with 1-error_2q, each
/// readout with 1-readout_error. Fails if the profile contains a gate the
/// backend does not implement natively.
pub fn estimate_success(
    profile: &CircuitProfile,
    backend: &BackendDescriptor,
) -> Result<f64, AnalyzerError> {
    let mut one_qubit = 0usize;
    for (gate, count) in &profile.gate_histogram {
        if gate == "measure" {
            continue;
        }
        if !backend.native_gates.contains(gate) {
            return Err(AnalyzerError::NonNativeGate {
                gate: gate.clone(),
                backend: backend.id.clone(),
            });
        }
        let kind = GateKind::from_mnemonic(gate).expect("histogram keys are mnemonics");
        if kind.arity() == 1 {
            one_qubit += count;
        }
    }
    Ok((1.0 - backend.error_1q).powi(one_qubit as i32)
        * (1.0 - backend.error_2q).powi(profile.two_qubit_count as i32)
        * (1.0 - backend.readout_error).powi(profile.measure_count as i32))
}

/// Ordering rule for ranking feasible backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionObjective {
    Success,
    Cost,
}

/// One backend's evaluation for a given circuit. `success` scores the
/// transpiled program, not the logical input.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionEntry {
    pub backend_id: String,
    pub feasible: bool,
    pub success: Option<f64>,
    pub total_cost: Option<f64>,
    pub reason: Option<String>,
}

/// Evaluates feasibility of every backend in registry order. A backend is
/// feasible when the register fits and transpilation succeeds; infeasible
/// entries carry the reason. `total_cost` is left unset because it depends
/// on the shot count.
pub fn filter_backends(circuit: &Circuit, registry: &[BackendDescriptor]) -> Vec<SelectionEntry> {
    registry
        .iter()
        .map(|backend| {
            if circuit.num_qubits > backend.num_qubits {
                return SelectionEntry {
                    backend_id: backend.id.clone(),
                    feasible: false,
                    success: None,
                    total_cost: None,
                    reason: Some("insufficient qubits".into()),
                };
            }
            match transpile(circuit, backend) {
                Ok(program) => {
                    let success = estimate_success(&profile(&program.circuit), backend)
                        .expect("transpiled programs contain only native gates");
                    SelectionEntry {
                        backend_id: backend.id.clone(),
                        feasible: true,
                        success: Some(success),
                        total_cost: None,
                        reason: None,
                    }
                }
                Err(err) => SelectionEntry {
                    backend_id: backend.id.clone(),
                    feasible: false,
                    success: None,
                    total_cost: None,
                    reason: Some(format!("transpilation failed: {}", err)),
                },
            }
        })
        .collect()
}

/// Ranked evaluation of a registry for one circuit and shot budget.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub objective: SelectionObjective,
    pub shots: u64,
    pub selected: Option<String>,
    pub ranking: Vec<SelectionEntry>,
}

/// Ranks backends and picks the best feasible one.
///
/// Under [`SelectionObjective::Success`] feasible backends sort by
/// descending success, then ascending total cost, then id. Under
/// [`SelectionObjective::Cost`] they sort by ascending total cost, then
/// descending success, then id. Infeasible backends follow, ordered by id.
pub fn select_backend(
    circuit: &Circuit,
    registry: &[BackendDescriptor],
    objective: SelectionObjective,
    shots: u64,
) -> SelectionReport {
    let mut entries = filter_backends(circuit, registry);
    let costs: BTreeMap<String, f64> = registry
        .iter()
        .map(|b| (b.id.clone(), shots as f64 * b.cost_per_shot))
        .collect();
    for entry in &mut entries {
        if entry.feasible {
            entry.total_cost = Some(costs[&entry.backend_id]);
        }
    }
    entries.sort_by(|a, b| {
        match (a.feasible, b.feasible) {
            (true, false) => return std::cmp::Ordering::Less,
            (false, true) => return std::cmp::Ordering::Greater,
            (false, false) => return a.backend_id.cmp(&b.backend_id),
            (true, true) => {}
        }
        let (sa, sb) = (a.success.unwrap_or(0.0), b.success.unwrap_or(0.0));
        let (ca, cb) = (
            a.total_cost.unwrap_or(f64::INFINITY),
            b.total_cost.unwrap_or(f64::INFINITY),
        );
        let key = match objective {
            SelectionObjective::Success => sb.total_cmp(&sa).then(ca.total_cmp(&cb)),
            SelectionObjective::Cost => ca.total_cmp(&cb).then(sb.total_cmp(&sa)),
        };
        key.then_with(|| a.backend_id.cmp(&b.backend_id))
    });
    let selected = entries
        .first()
        .filter(|e| e.feasible)
        .map(|e| e.backend_id.clone());
    SelectionReport {
        objective,
        shots,
        selected,
        ranking: entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backend(id: &str, n: usize, gates: &[&str], edges: &[[usize; 2]]) -> BackendDescriptor {
        BackendDescriptor {
            id: id.into(),
            vendor: "test".into(),
            num_qubits: n,
            native_gates: gates.iter().map(|s| s.to_string()).collect(),
            coupling_map: edges.to_vec(),
            error_1q: 0.001,
            error_2q: 0.01,
            readout_error: 0.02,
            cost_per_shot: 0.1,
            assembler: Assembler::Qasm2,
        }
    }

    fn line(n: usize) -> Vec<[usize; 2]> {
        let mut edges = Vec::new();
        for i in 0..n - 1 {
            edges.push([i, i + 1]);
            edges.push([i + 1, i]);
        }
        edges
    }

    #[test]
    fn profiles_bell_circuit() {
        let p = profile(&Circuit::bell());
        assert_eq!(p.num_qubits, 2);
        assert_eq!(p.num_cbits, 2);
        assert_eq!(p.depth, 3);
        assert_eq!(p.t_count, 0);
        assert_eq!(p.two_qubit_count, 1);
        assert_eq!(p.measure_count, 2);
        let expected: BTreeMap<String, usize> = [("h", 1), ("cx", 1), ("measure", 2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(p.gate_histogram, expected);
    }

    #[test]
    fn counts_t_and_adjoint_t() {
        let c = Circuit::from_instructions(
            1,
            0,
            vec![
                Instruction::gate1(GateKind::T, 0),
                Instruction::gate1(GateKind::Tdg, 0),
                Instruction::gate1(GateKind::T, 0),
            ],
        )
        .unwrap();
        assert_eq!(profile(&c).t_count, 3);
    }

    #[test]
    fn registry_round_trips_and_validates() {
        let reg = vec![backend("a", 3, &["rx", "rz", "cx"], &line(3))];
        let json = serde_json::to_string(&reg).unwrap();
        assert_eq!(parse_registry(&json).unwrap(), reg);
    }

    #[test]
    fn registry_rejects_unknown_fields_and_bad_values() {
        let json = r#"[{"id":"a","vendor":"v","num_qubits":1,"native_gates":[],
            "coupling_map":[],"error_1q":0.0,"error_2q":0.0,"readout_error":0.0,
            "cost_per_shot":0.0,"assembler":"qasm2","extra":1}]"#;
        assert!(matches!(
            parse_registry(json),
            Err(AnalyzerError::MalformedRegistry(_))
        ));

        let mut bad = backend("a", 2, &["frobnicate"], &[]);
        assert!(bad.validate().is_err());
        bad.native_gates = ["rx".to_string()].into();
        bad.coupling_map = vec![[0, 5]];
        assert!(bad.validate().is_err());
        bad.coupling_map = vec![[1, 1]];
        assert!(bad.validate().is_err());
        bad.coupling_map = vec![[0, 1]];
        bad.error_2q = 1.0;
        assert!(bad.validate().is_err());

        let dup = vec![backend("a", 2, &["rx"], &[]), backend("a", 2, &["rx"], &[])];
        let json = serde_json::to_string(&dup).unwrap();
        assert!(matches!(
            parse_registry(&json),
            Err(AnalyzerError::DuplicateBackendId(_))
        ));
    }

    #[test]
    fn success_estimate_is_the_error_free_product() {
        let b = backend("a", 2, &["h", "cx"], &line(2));
        let p = profile(&Circuit::bell());
        let got = estimate_success(&p, &b).unwrap();
        let want = (1.0 - 0.001) * (1.0 - 0.01) * (1.0 - 0.02f64).powi(2);
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn success_estimate_rejects_non_native_gates() {
        let b = backend("a", 2, &["rx", "rz", "cx"], &line(2));
        let err = estimate_success(&profile(&Circuit::bell()), &b).unwrap_err();
        assert!(matches!(err, AnalyzerError::NonNativeGate { .. }));
    }

    #[test]
    fn filter_separates_feasible_and_reasons() {
        let registry = vec![
            backend("big", 4, &["rx", "rz", "cx"], &line(4)),
            backend("tiny", 1, &["rx", "rz", "cx"], &[]),
            backend("nohw", 4, &["h", "cx"], &line(4)),
        ];
        let entries = filter_backends(&Circuit::bell(), &registry);
        assert_eq!(entries.len(), 3);
        assert!(entries[0].feasible);
        assert!(entries[0].success.is_some());
        assert!(!entries[1].feasible);
        assert_eq!(entries[1].reason.as_deref(), Some("insufficient qubits"));
        assert!(!entries[2].feasible);
        assert!(entries[2]
            .reason
            .as_deref()
            .unwrap()
            .starts_with("transpilation failed:"));
    }

    #[test]
    fn selection_orders_by_objective() {
        let mut cheap_noisy = backend("cheap", 4, &["rx", "rz", "cx"], &line(4));
        cheap_noisy.error_2q = 0.05;
        cheap_noisy.cost_per_shot = 0.01;
        let mut pricey_clean = backend("clean", 4, &["rx", "rz", "cx"], &line(4));
        pricey_clean.error_2q = 0.001;
        pricey_clean.cost_per_shot = 1.0;
        let registry = vec![cheap_noisy, pricey_clean];

        let by_success = select_backend(
            &Circuit::bell(),
            &registry,
            SelectionObjective::Success,
            100,
        );
        assert_eq!(by_success.selected.as_deref(), Some("clean"));

        let by_cost = select_backend(&Circuit::bell(), &registry, SelectionObjective::Cost, 100);
        assert_eq!(by_cost.selected.as_deref(), Some("cheap"));
        assert_eq!(by_cost.ranking[0].total_cost, Some(1.0));
    }

    #[test]
    fn selection_breaks_ties_by_cost_then_id() {
        let mut a = backend("bravo", 4, &["rx", "rz", "cx"], &line(4));
        let mut b = backend("alpha", 4, &["rx", "rz", "cx"], &line(4));
        a.cost_per_shot = 0.5;
        b.cost_per_shot = 0.5;
        let report = select_backend(
            &Circuit::bell(),
            &[a.clone(), b.clone()],
            SelectionObjective::Success,
            10,
        );
        assert_eq!(report.selected.as_deref(), Some("alpha"));

        a.cost_per_shot = 0.1;
        let report = select_backend(&Circuit::bell(), &[a, b], SelectionObjective::Success, 10);
        assert_eq!(report.selected.as_deref(), Some("bravo"));
    }

    #[test]
    fn infeasible_backends_rank_last_by_id() {
        let registry = vec![
            backend("zeta", 1, &["rx"], &[]),
            backend("able", 4, &["rx", "rz", "cx"], &line(4)),
            backend("mini", 1, &["rx"], &[]),
        ];
        let report = select_backend(
            &Circuit::bell(),
            &registry,
            SelectionObjective::Success,
            10,
        );
        let ids: Vec<&str> = report
            .ranking
            .iter()
            .map(|e| e.backend_id.as_str())
            .collect();
        assert_eq!(ids, vec!["able", "mini", "zeta"]);

        let none = select_backend(
            &Circuit::bell(),
            &registry[..1],
            SelectionObjective::Success,
            10,
        );
        assert_eq!(none.selected, None);
    }
}
