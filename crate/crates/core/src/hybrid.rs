//! Hybrid quantum-classical workloads: parameterized circuits, Pauli
//! observables, exact expectation values, and MaxCut utilities shared by the
//! variational drivers in [`variational`].

pub mod variational;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateKind, Instruction};
use crate::sim::{run_statevector, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HybridError {
    #[error("instruction {position}: {message}")]
    InvalidInstruction { position: usize, message: String },
    #[error("no parameter named {0} in the circuit")]
    UnknownParameter(String),
    #[error("no value bound for parameter {0}")]
    MissingParameter(String),
    #[error("expected {expected} parameter values, got {got}")]
    WrongParameterCount { expected: usize, got: usize },
    #[error("parameter {0} bound to a non-finite value")]
    NonFiniteValue(String),
    #[error("observable: {0}")]
    MalformedObservable(String),
    #[error("graph: {0}")]
    MalformedGraph(String),
    #[error("observable acts on {observable} qubits, circuit has {circuit}")]
    DimensionMismatch { observable: usize, circuit: usize },
    #[error("brute force supports at most {limit} vertices, got {got}")]
    GraphTooLarge { got: usize, limit: usize },
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A rotation angle that is either fixed or a named free parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamExpr {
    Const(f64),
    Sym(String),
}

/// Instruction over a [`ParameterizedCircuit`]: identical to the concrete
/// form except that rotation angles are [`ParamExpr`]s.
#[derive(Debug, Clone, PartialEq)]
pub enum PInstruction {
    Gate {
        kind: GateKind,
        qubits: Vec<usize>,
        param: Option<ParamExpr>,
    },
    Measure {
        qubit: usize,
        cbit: usize,
    },
}

impl PInstruction {
    pub fn gate1(kind: GateKind, qubit: usize) -> PInstruction {
        PInstruction::Gate {
            kind,
            qubits: vec![qubit],
            param: None,
        }
    }

    pub fn gate2(kind: GateKind, a: usize, b: usize) -> PInstruction {
        PInstruction::Gate {
            kind,
            qubits: vec![a, b],
            param: None,
        }
    }

    pub fn rot_const(kind: GateKind, qubit: usize, angle: f64) -> PInstruction {
        PInstruction::Gate {
            kind,
            qubits: vec![qubit],
            param: Some(ParamExpr::Const(angle)),
        }
    }

    pub fn rot_sym(kind: GateKind, qubit: usize, name: &str) -> PInstruction {
        PInstruction::Gate {
            kind,
            qubits: vec![qubit],
            param: Some(ParamExpr::Sym(name.to_string())),
        }
    }

    pub fn measure(qubit: usize, cbit: usize) -> PInstruction {
        PInstruction::Measure { qubit, cbit }
    }
}

/// A circuit whose rotation angles may be free parameters. Parameters are
/// registered in first-use order; binding substitutes concrete angles and
/// yields a validated [`Circuit`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedCircuit {
    skeleton: Vec<PInstruction>,
    params: Vec<String>,
    // Shadow concrete circuit with zeroed symbolic angles; appending to it
    // enforces exactly the invariants of the concrete representation.
    shadow: Circuit,
}

impl ParameterizedCircuit {
    pub fn new(num_qubits: usize, num_cbits: usize) -> Result<ParameterizedCircuit, HybridError> {
        let shadow = Circuit::new(num_qubits, num_cbits).map_err(|e| match e {
            CircuitError::ZeroQubits => HybridError::InvalidConfig(e.to_string()),
            CircuitError::InvalidInstruction { position, message } => {
                HybridError::InvalidInstruction { position, message }
            }
        })?;
        Ok(ParameterizedCircuit {
            skeleton: Vec::new(),
            params: Vec::new(),
            shadow,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.shadow.num_qubits
    }

    pub fn num_cbits(&self) -> usize {
        self.shadow.num_cbits
    }

    pub fn instructions(&self) -> &[PInstruction] {
        &self.skeleton
    }

    /// Free parameter names in first-use order.
    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn append(mut self, instr: PInstruction) -> Result<ParameterizedCircuit, HybridError> {
        let concrete = match &instr {
            PInstruction::Gate {
                kind,
                qubits,
                param,
            } => Instruction::Gate {
                kind: *kind,
                qubits: qubits.clone(),
                param: match param {
                    None => None,
                    Some(ParamExpr::Const(a)) => Some(*a),
                    Some(ParamExpr::Sym(_)) => Some(0.0),
                },
            },
            PInstruction::Measure { qubit, cbit } => Instruction::Measure {
                qubit: *qubit,
                cbit: *cbit,
            },
        };
        self.shadow = self.shadow.append(concrete).map_err(|e| match e {
            CircuitError::InvalidInstruction { position, message } => {
                HybridError::InvalidInstruction { position, message }
            }
            CircuitError::ZeroQubits => HybridError::InvalidConfig(e.to_string()),
        })?;
        if let PInstruction::Gate {
            param: Some(ParamExpr::Sym(name)),
            ..
        } = &instr
        {
            if !self.params.contains(name) {
                self.params.push(name.clone());
            }
        }
        self.skeleton.push(instr);
        Ok(self)
    }

    /// Substitutes named values. Every circuit parameter must receive a
    /// value and every supplied name must exist in the circuit.
    pub fn bind_parameters(
        &self,
        values: &BTreeMap<String, f64>,
    ) -> Result<Circuit, HybridError> {
        for name in values.keys() {
            if !self.params.contains(name) {
                return Err(HybridError::UnknownParameter(name.clone()));
            }
        }
        for name in &self.params {
            if !values.contains_key(name) {
                return Err(HybridError::MissingParameter(name.clone()));
            }
        }
        for (name, value) in values {
            if !value.is_finite() {
                return Err(HybridError::NonFiniteValue(name.clone()));
            }
        }
        let instructions = self
            .skeleton
            .iter()
            .map(|instr| match instr {
                PInstruction::Gate {
                    kind,
                    qubits,
                    param,
                } => Instruction::Gate {
                    kind: *kind,
                    qubits: qubits.clone(),
                    param: param.as_ref().map(|p| match p {
                        ParamExpr::Const(a) => *a,
                        ParamExpr::Sym(name) => values[name],
                    }),
                },
                PInstruction::Measure { qubit, cbit } => Instruction::Measure {
                    qubit: *qubit,
                    cbit: *cbit,
                },
            })
            .collect();
        Ok(Circuit {
            num_qubits: self.shadow.num_qubits,
            num_cbits: self.shadow.num_cbits,
            instructions,
        })
    }

    /// Binds values positionally, following [`ParameterizedCircuit::params`]
    /// order.
    pub fn bind_positional(&self, values: &[f64]) -> Result<Circuit, HybridError> {
        if values.len() != self.params.len() {
            return Err(HybridError::WrongParameterCount {
                expected: self.params.len(),
                got: values.len(),
            });
        }
        let map: BTreeMap<String, f64> = self
            .params
            .iter()
            .cloned()
            .zip(values.iter().copied())
            .collect();
        self.bind_parameters(&map)
    }
}

/// Single-qubit Pauli factor inside an observable term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    fn from_char(c: char) -> Option<PauliOp> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    fn gate(self) -> Option<GateKind> {
        match self {
            PauliOp::I => None,
            PauliOp::X => Some(GateKind::X),
            PauliOp::Y => Some(GateKind::Y),
            PauliOp::Z => Some(GateKind::Z),
        }
    }
}

/// Hermitian operator as a real combination of Pauli strings. In a term,
/// position `i` of the string acts on qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub num_qubits: usize,
    pub terms: Vec<(f64, Vec<PauliOp>)>,
}

impl Observable {
    pub fn new(
        num_qubits: usize,
        terms: Vec<(f64, Vec<PauliOp>)>,
    ) -> Result<Observable, HybridError> {
        if num_qubits == 0 {
            return Err(HybridError::MalformedObservable(
                "observable needs at least one qubit".into(),
            ));
        }
        if terms.is_empty() {
            return Err(HybridError::MalformedObservable(
                "observable needs at least one term".into(),
            ));
        }
        for (coeff, paulis) in &terms {
            if !coeff.is_finite() {
                return Err(HybridError::MalformedObservable(format!(
                    "non-finite coefficient {}",
                    coeff
                )));
            }
            if paulis.len() != num_qubits {
                return Err(HybridError::MalformedObservable(format!(
                    "term length {} does not match {} qubits",
                    paulis.len(),
                    num_qubits
                )));
            }
        }
        Ok(Observable { num_qubits, terms })
    }
}

/// Parses the on-disk observable form: a JSON array of
/// `[coefficient, "pauli string"]` pairs, e.g. `[[1.0, "ZZ"]]`.
pub fn parse_observable(json: &str) -> Result<Observable, HybridError> {
    let raw: Vec<(f64, String)> =
        serde_json::from_str(json).map_err(|e| HybridError::MalformedObservable(e.to_string()))?;
    let Some(first) = raw.first() else {
        return Err(HybridError::MalformedObservable(
            "observable needs at least one term".into(),
        ));
    };
    let num_qubits = first.1.chars().count();
    let mut terms = Vec::with_capacity(raw.len());
    for (coeff, string) in &raw {
        let paulis: Option<Vec<PauliOp>> = string.chars().map(PauliOp::from_char).collect();
        let paulis = paulis.ok_or_else(|| {
            HybridError::MalformedObservable(format!(
                "term '{}' contains a letter outside I, X, Y, Z",
                string
            ))
        })?;
        terms.push((*coeff, paulis));
    }
    Observable::new(num_qubits, terms)
}

/// Exact expectation value ⟨ψ|O|ψ⟩ of an observable in the output state of
/// a measurement-free circuit.
pub fn expectation(circuit: &Circuit, observable: &Observable) -> Result<f64, HybridError> {
    if observable.num_qubits != circuit.num_qubits {
        return Err(HybridError::DimensionMismatch {
            observable: observable.num_qubits,
            circuit: circuit.num_qubits,
        });
    }
    let state = run_statevector(circuit)?;
    let mut value = Complex64::new(0.0, 0.0);
    for (coeff, paulis) in &observable.terms {
        let mut transformed = state.clone();
        for (qubit, op) in paulis.iter().enumerate() {
            if let Some(kind) = op.gate() {
                crate::sim::apply_gate(&mut transformed, &Instruction::gate1(kind, qubit));
            }
        }
        let inner: Complex64 = state
            .iter()
            .zip(&transformed)
            .map(|(a, b)| a.conj() * b)
            .sum();
        value += coeff * inner;
    }
    assert!(
        value.im.abs() < 1e-9,
        "Pauli expectation must be real, got imaginary part {}",
        value.im
    );
    Ok(value.re)
}

/// Undirected graph for MaxCut workloads, as stored on disk:
/// `{"n": 4, "edges": [[0, 1], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn validate(&self) -> Result<(), HybridError> {
        if self.n == 0 {
            return Err(HybridError::MalformedGraph(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for &[a, b] in &self.edges {
            if a >= self.n || b >= self.n {
                return Err(HybridError::MalformedGraph(format!(
                    "edge [{}, {}] out of range for {} vertices",
                    a, b, self.n
                )));
            }
            if a == b {
                return Err(HybridError::MalformedGraph(format!(
                    "edge [{}, {}] is a self-loop",
                    a, b
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(HybridError::MalformedGraph(format!(
                    "edge [{}, {}] appears twice",
                    a, b
                )));
            }
        }
        Ok(())
    }

    /// Edges normalized to (low, high) and sorted, the order every
    /// deterministic construction over the graph uses.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&[a, b]| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges
    }
}

pub fn parse_graph(json: &str) -> Result<Graph, HybridError> {
    let graph: Graph =
        serde_json::from_str(json).map_err(|e| HybridError::MalformedGraph(e.to_string()))?;
    graph.validate()?;
    Ok(graph)
}

/// Edges cut by an assignment, where character `i` gives the side of
/// vertex `i`.
pub fn cut_size(graph: &Graph, assignment: &str) -> usize {
    let bits: Vec<char> = assignment.chars().collect();
    assert_eq!(bits.len(), graph.n, "assignment length must match vertex count");
    graph
        .edges
        .iter()
        .filter(|&&[a, b]| bits[a] != bits[b])
        .count()
}

/// Vertex count limit for [`maxcut_bruteforce`].
pub const MAX_BRUTEFORCE_VERTICES: usize = 24;

/// Exhaustive MaxCut: returns the optimal cut size and the
/// lexicographically smallest optimal assignment.
pub fn maxcut_bruteforce(graph: &Graph) -> Result<(usize, String), HybridError> {
    graph.validate()?;
    if graph.n > MAX_BRUTEFORCE_VERTICES {
        return Err(HybridError::GraphTooLarge {
            got: graph.n,
            limit: MAX_BRUTEFORCE_VERTICES,
        });
    }
    let n = graph.n;
    let edges = graph.sorted_edges();
    let mut best_cut = 0;
    let mut best_mask = 0u32;
    // Vertex 0 is the most significant bit, so increasing masks enumerate
    // assignments in lexicographic string order and the first optimum found
    // is the lexicographically smallest.
    for mask in 0..(1u32 << n) {
        let side = |v: usize| mask >> (n - 1 - v) & 1;
        let cut = edges.iter().filter(|&&(a, b)| side(a) != side(b)).count();
        if cut > best_cut {
            best_cut = cut;
            best_mask = mask;
        }
    }
    let assignment: String = (0..n)
        .map(|v| if best_mask >> (n - 1 - v) & 1 == 1 { '1' } else { '0' })
        .collect();
    Ok((best_cut, assignment))
}
