//! Vendor-neutral quantum circuit toolchain.
//!
//! The crate takes circuits written in the plain-text `vaql` format through
//! a full pipeline: parsing ([`vaql`]), gate-level optimization
//! ([`optimize`]), resource profiling and backend selection ([`analyzer`]),
//! rebasing and routing onto a device ([`transpiler`]), vendor assembler
//! emission ([`codegen`]), and exact statevector simulation ([`sim`]).
//! [`hybrid`] adds parameterized circuits plus QAOA and VQE drivers on top
//! of the simulator.
//!
//! Everything is deterministic: sampling and variational searches take
//! explicit seeds, and collections with observable iteration order are
//! B-tree maps.

pub mod analyzer;
pub mod circuit;
pub mod codegen;
pub mod hybrid;
pub mod optimize;
pub mod sim;
pub mod transpiler;
pub mod vaql;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use analyzer::{
    estimate_success, filter_backends, parse_registry, profile, select_backend, AnalyzerError,
    Assembler, BackendDescriptor, CircuitProfile, SelectionEntry, SelectionObjective,
    SelectionReport,
};
pub use circuit::{Circuit, CircuitError, GateKind, Instruction, Violation};
pub use codegen::{emit, emit_qasm2, emit_quil, CodegenError};
pub use hybrid::variational::{
    build_qaoa_circuit, build_vqe_ansatz, maxcut_cost_observable, run_qaoa, run_vqe,
    VariationalResult,
};
pub use hybrid::{
    cut_size, expectation, maxcut_bruteforce, parse_graph, parse_observable, Graph, HybridError,
    Observable, ParamExpr, ParameterizedCircuit, PauliOp, PInstruction,
};
pub use optimize::{optimize, Objective, OptimizeResult, PassReport};
pub use sim::{
    circuit_unitary, equivalent_up_to_global_phase, measurement_distribution, run_statevector,
    sample_counts, Distribution, Histogram, SimError, Unitary,
};
pub use transpiler::{transpile, Layout, TranspileError, TranspiledProgram};
pub use vaql::{parse_circuit, print_circuit, ParseError};
