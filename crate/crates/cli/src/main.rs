//! Command-line driver for the circuit toolchain.
//!
//! Every subcommand reads plain files, writes its main result to stdout
//! (JSON unless the result is a circuit or assembler program), and reports
//! problems on stderr. Exit status is 0 on success, 1 on any domain error,
//! and 2 on usage errors.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use vaql_core::analyzer::SelectionObjective;
use vaql_core::circuit::Circuit;
use vaql_core::codegen::{emit_qasm2, emit_quil};
use vaql_core::hybrid::variational::{run_qaoa, run_vqe};
use vaql_core::hybrid::{parse_graph, parse_observable};
use vaql_core::optimize::Objective;
use vaql_core::sim::{measurement_distribution, sample_counts};
use vaql_core::transpiler::transpile;
use vaql_core::{
    parse_circuit, parse_registry, print_circuit, profile, select_backend, BackendDescriptor,
};
use vaql_qaas::Service;

#[derive(Parser)]
#[command(name = "vaql", version, about = "Vendor-neutral quantum circuit toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a program and reprint it in canonical form.
    Parse {
        /// Circuit file in vaql text form.
        file: PathBuf,
    },
    /// Rewrite a circuit into a smaller equivalent one.
    Optimize {
        file: PathBuf,
        /// What the rewrite pipeline aims to shrink.
        #[arg(long, value_enum, default_value_t)]
        objective: ObjectiveArg,
        /// Also write a JSON pass report to stderr.
        #[arg(long)]
        report: bool,
    },
    /// Print resource counts: depth, gate histogram, T count.
    Analyze {
        file: PathBuf,
    },
    /// Rank the registry's backends for a circuit.
    Select {
        file: PathBuf,
        /// Backend registry JSON file.
        #[arg(long)]
        backends: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        objective: SelectionArg,
        /// Shot budget used for cost estimates.
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        /// Only consider backends from these vendors; repeatable.
        #[arg(long)]
        trust: Vec<String>,
    },
    /// Rebase and route a circuit onto one backend.
    Transpile {
        file: PathBuf,
        /// Backend registry JSON file.
        #[arg(long)]
        backends: PathBuf,
        /// Target backend id from the registry.
        #[arg(long)]
        backend: String,
        /// Print the routed circuit in this format instead of the full
        /// JSON program record.
        #[arg(long, value_enum)]
        emit: Option<EmitArg>,
    },
    /// Sample measurement outcomes from the exact distribution.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        shots: u64,
        /// Sampling seed; drawn at random when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Approximate MaxCut on a graph with QAOA.
    Qaoa {
        /// Graph JSON file: {"n": ..., "edges": [[a, b], ...]}.
        #[arg(long)]
        graph: PathBuf,
        /// Number of alternating layers.
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Grid points per angle axis in the seeding search.
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Minimize an observable with a variational ansatz.
    Vqe {
        /// Observable JSON file: [[coefficient, "pauli string"], ...].
        #[arg(long)]
        observable: PathBuf,
        /// Entangling blocks in the ansatz.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the HTTP job service.
    Serve {
        /// Backend registry JSON file.
        #[arg(long)]
        backends: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Concurrent job workers; 1 preserves strict FIFO completion.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Append finished job records to this JSON-lines file.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum ObjectiveArg {
    #[default]
    Size,
    Depth,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum SelectionArg {
    #[default]
    Success,
    Cost,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Vaql,
    Qasm2,
    Quil,
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_circuit(&text).map_err(|e| anyhow!("{}: {}", path.display(), e))
}

fn read_registry(path: &Path) -> Result<Vec<BackendDescriptor>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_registry(&text).map_err(|e| anyhow!("{}: {}", path.display(), e))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse { file } => {
            let circuit = read_circuit(&file)?;
            print!("{}", print_circuit(&circuit));
        }
        Command::Optimize {
            file,
            objective,
            report,
        } => {
            let circuit = read_circuit(&file)?;
            let objective = match objective {
                ObjectiveArg::Size => Objective::Size,
                ObjectiveArg::Depth => Objective::Depth,
            };
            let result = vaql_core::optimize(&circuit, objective);
            if report {
                let summary = json!({
                    "objective": result.objective,
                    "rounds": result.rounds,
                    "gates_before": circuit.gate_count(),
                    "gates_after": result.circuit.gate_count(),
                    "passes": result.reports,
                    "qubit_map": result.qubit_map,
                });
                eprintln!("{}", serde_json::to_string_pretty(&summary)?);
            }
            print!("{}", print_circuit(&result.circuit));
        }
        Command::Analyze { file } => {
            let circuit = read_circuit(&file)?;
            print_json(&profile(&circuit))?;
        }
        Command::Select {
            file,
            backends,
            objective,
            shots,
            trust,
        } => {
            let circuit = read_circuit(&file)?;
            let mut registry = read_registry(&backends)?;
            if !trust.is_empty() {
                let trusted: BTreeSet<&str> = trust.iter().map(String::as_str).collect();
                registry.retain(|b| trusted.contains(b.vendor.as_str()));
            }
            let objective = match objective {
                SelectionArg::Success => SelectionObjective::Success,
                SelectionArg::Cost => SelectionObjective::Cost,
            };
            print_json(&select_backend(&circuit, &registry, objective, shots))?;
        }
        Command::Transpile {
            file,
            backends,
            backend,
            emit,
        } => {
            let circuit = read_circuit(&file)?;
            let registry = read_registry(&backends)?;
            let target = registry.iter().find(|b| b.id == backend).ok_or_else(|| {
                let available: Vec<&str> = registry.iter().map(|b| b.id.as_str()).collect();
                anyhow!(
                    "unknown backend '{}' (available: {})",
                    backend,
                    available.join(", ")
                )
            })?;
            let program = transpile(&circuit, target)?;
            match emit {
                None => print_json(&program)?,
                Some(EmitArg::Vaql) => print!("{}", print_circuit(&program.circuit)),
                Some(EmitArg::Qasm2) => print!("{}", emit_qasm2(&program.circuit)?),
                Some(EmitArg::Quil) => print!("{}", emit_quil(&program.circuit)?),
            }
        }
        Command::Simulate { file, shots, seed } => {
            if shots == 0 {
                bail!("shots must be positive");
            }
            let circuit = read_circuit(&file)?;
            let seed = seed.unwrap_or_else(|| rand::rng().random());
            let distribution = measurement_distribution(&circuit)?;
            let histogram = sample_counts(&distribution, shots, seed);
            print_json(&json!({
                "shots": shots,
                "seed": seed,
                "distribution": distribution,
                "histogram": histogram,
            }))?;
        }
        Command::Qaoa {
            graph,
            p,
            grid,
            shots,
            seed,
        } => {
            let text = std::fs::read_to_string(&graph)
                .with_context(|| format!("reading {}", graph.display()))?;
            let graph = parse_graph(&text)?;
            print_json(&run_qaoa(&graph, p, grid, shots, seed)?)?;
        }
        Command::Vqe {
            observable,
            reps,
            restarts,
            seed,
        } => {
            let text = std::fs::read_to_string(&observable)
                .with_context(|| format!("reading {}", observable.display()))?;
            let observable = parse_observable(&text)?;
            print_json(&run_vqe(&observable, reps, restarts, seed)?)?;
        }
        Command::Serve {
            backends,
            port,
            workers,
            journal,
        } => {
            let registry = read_registry(&backends)?;
            let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
            runtime.block_on(async move {
                let service = Service::start(registry, workers, journal.as_deref())
                    .context("starting service")?;
                let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
                    .await
                    .with_context(|| format!("binding 127.0.0.1:{port}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                service.serve(listener).await.context("serving requests")
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
