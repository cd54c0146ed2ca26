//! Acceptance suite: ten numbered criteria covering the whole toolchain,
//! each with an explicit tolerance and runtime budget. One test per
//! criterion, so the harness output reads as one pass/fail line each.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use vaql_core::analyzer::SelectionObjective;
use vaql_core::circuit::{Circuit, GateKind, Instruction};
use vaql_core::codegen::{emit_qasm2, emit_quil};
use vaql_core::hybrid::variational::{run_qaoa, run_vqe};
use vaql_core::hybrid::{maxcut_bruteforce, parse_graph, parse_observable};
use vaql_core::optimize::{
    cancel_inverse_pairs, merge_rotations, standard_templates, Objective,
};
use vaql_core::sim::{
    circuit_unitary, equivalent_up_to_global_phase, measurement_distribution, sample_counts,
};
use vaql_core::testkit::{
    check_native_and_coupled, check_optimize_equivalence, check_routed_equivalence,
    random_gate_circuit, random_measured_circuit,
};
use vaql_core::transpiler::{decompose_to_native, legalize, transpile};
use vaql_core::{
    optimize, parse_circuit, parse_registry, print_circuit, profile, select_backend, Assembler,
    BackendDescriptor, CircuitProfile,
};

const EXACT: f64 = 1e-12;
const NUMERIC: f64 = 1e-9;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture exists")
}

fn bell() -> Circuit {
    parse_circuit(&read_fixture("bell.vaql")).expect("bell fixture parses")
}

fn registry() -> Vec<BackendDescriptor> {
    parse_registry(&read_fixture("registry.json")).expect("registry fixture parses")
}

fn backend(
    id: &str,
    num_qubits: usize,
    gates: &[&str],
    coupling_map: Vec<[usize; 2]>,
) -> BackendDescriptor {
    BackendDescriptor {
        id: id.into(),
        vendor: "test".into(),
        num_qubits,
        native_gates: gates.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        coupling_map,
        error_1q: 0.001,
        error_2q: 0.01,
        readout_error: 0.02,
        cost_per_shot: 0.05,
        assembler: Assembler::Qasm2,
    }
}

fn assert_equivalent(a: &Circuit, b: &Circuit, tol: f64, what: &str) {
    let ua = circuit_unitary(a).unwrap();
    let ub = circuit_unitary(b).unwrap();
    assert!(
        equivalent_up_to_global_phase(&ua.data, &ub.data, tol),
        "{what}: unitaries differ beyond {tol}"
    );
}

#[test]
fn c01_bell_distribution_is_exact_and_sampling_concentrates() {
    let start = Instant::now();
    let dist = measurement_distribution(&bell()).unwrap();
    let keys: Vec<&String> = dist.keys().collect();
    assert_eq!(keys, ["00", "11"]);
    assert!((dist["00"] - 0.5).abs() < NUMERIC);
    assert!((dist["11"] - 0.5).abs() < NUMERIC);

    let histogram = sample_counts(&dist, 10_000, 42);
    let total: u64 = histogram.values().sum();
    assert_eq!(total, 10_000);
    for key in ["00", "11"] {
        let count = histogram[key];
        assert!((4_800..=5_200).contains(&count), "{key} sampled {count}");
    }
    assert!(start.elapsed() < Duration::from_secs(1), "took {:?}", start.elapsed());
}

#[test]
fn c02_optimizer_preserves_500_random_circuits() {
    let start = Instant::now();
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_gate_circuit(&mut rng, 5, 30);
        let result = optimize(&circuit, Objective::Size);
        if let Err(e) = check_optimize_equivalence(&circuit, &result, NUMERIC) {
            panic!("seed {seed}: {e}");
        }
    }
    assert!(start.elapsed() < Duration::from_secs(20), "took {:?}", start.elapsed());
}

#[test]
fn c03_transpiler_is_sound_on_line_and_ring_devices() {
    let start = Instant::now();
    let registry = registry();
    let toy5 = registry.iter().find(|b| b.id == "toy5").unwrap();
    let ring4 = registry.iter().find(|b| b.id == "ring4").unwrap();
    for (device, max_qubits, seed_base) in [(toy5, 5usize, 1_000u64), (ring4, 4, 2_000)] {
        for offset in 0..200u64 {
            let seed = seed_base + offset;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let logical = random_gate_circuit(&mut rng, max_qubits, 30);
            let program = transpile(&logical, device)
                .unwrap_or_else(|e| panic!("seed {seed} on {}: {e}", device.id));
            if let Err(e) = check_native_and_coupled(&program, device) {
                panic!("seed {seed} on {}: {e}", device.id);
            }
            if let Err(e) = check_routed_equivalence(&logical, &program, NUMERIC) {
                panic!("seed {seed} on {}: {e}", device.id);
            }
        }
    }
    assert!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());
}

#[test]
fn c04_every_rewrite_rule_is_oracle_checked() {
    use GateKind::*;

    // Inverse pairs reduce to the identity and the cancel pass removes them.
    let pairs_1q = [
        (H, H),
        (X, X),
        (Y, Y),
        (Z, Z),
        (S, Sdg),
        (Sdg, S),
        (T, Tdg),
        (Tdg, T),
    ];
    let identity_1q = Circuit::from_instructions(1, 0, vec![]).unwrap();
    for (a, b) in pairs_1q {
        let pair = Circuit::from_instructions(
            1,
            0,
            vec![Instruction::gate1(a, 0), Instruction::gate1(b, 0)],
        )
        .unwrap();
        assert_equivalent(&pair, &identity_1q, EXACT, &format!("{a:?} then {b:?}"));
        let (cancelled, _) = cancel_inverse_pairs(&pair);
        assert!(cancelled.instructions.is_empty(), "{a:?}/{b:?} not cancelled");
    }
    let pairs_2q = [
        (Cx, [0, 1], [0, 1]),
        (Cz, [0, 1], [0, 1]),
        (Cz, [0, 1], [1, 0]),
        (Swap, [0, 1], [0, 1]),
        (Swap, [0, 1], [1, 0]),
    ];
    let identity_2q = Circuit::from_instructions(2, 0, vec![]).unwrap();
    for (kind, first, second) in pairs_2q {
        let pair = Circuit::from_instructions(
            2,
            0,
            vec![
                Instruction::gate2(kind, first[0], first[1]),
                Instruction::gate2(kind, second[0], second[1]),
            ],
        )
        .unwrap();
        assert_equivalent(&pair, &identity_2q, EXACT, &format!("{kind:?} pair"));
        let (cancelled, _) = cancel_inverse_pairs(&pair);
        assert!(cancelled.instructions.is_empty(), "{kind:?} pair not cancelled");
    }

    // Rotation merging preserves the unitary for every axis.
    for kind in [Rx, Ry, Rz] {
        for (alpha, beta) in [
            (0.3, 0.4),
            (3.0 * std::f64::consts::FRAC_PI_2, std::f64::consts::PI),
            (0.2, -0.2),
        ] {
            let before = Circuit::from_instructions(
                1,
                0,
                vec![
                    Instruction::rot(kind, 0, alpha),
                    Instruction::rot(kind, 0, beta),
                ],
            )
            .unwrap();
            let (merged, _) = merge_rotations(&before);
            assert!(merged.gate_count() <= 1, "{kind:?} pair left {merged:?}");
            assert_equivalent(&before, &merged, EXACT, &format!("{kind:?} merge"));
        }
    }

    // Every built-in template replacement reproduces its pattern unitary.
    let templates = standard_templates();
    let names: BTreeSet<&str> = templates.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(
        names,
        ["cx_reversal", "tt_to_s", "ss_to_z", "hzh_to_x"].into_iter().collect()
    );
    for template in &templates {
        let realize = |ops: &[vaql_core::optimize::TemplateOp]| {
            let instructions = ops
                .iter()
                .map(|op| Instruction::Gate {
                    kind: op.kind,
                    qubits: op.roles.clone(),
                    param: op.param,
                })
                .collect();
            Circuit::from_instructions(template.num_roles, 0, instructions).unwrap()
        };
        assert_equivalent(
            &realize(&template.pattern),
            &realize(&template.replacement),
            EXACT,
            &template.name,
        );
    }

    // Every gate kind decomposes exactly onto both native two-qubit bases.
    let duplex = vec![[0, 1], [1, 0]];
    let cx_device = backend("cxdev", 2, &["rx", "rz", "cx"], duplex.clone());
    let cz_device = backend("czdev", 2, &["rx", "rz", "cz"], duplex.clone());
    for kind in GateKind::ALL {
        let instr = match (kind.arity(), kind.has_param()) {
            (1, false) => Instruction::gate1(kind, 0),
            (1, true) => Instruction::rot(kind, 0, 0.37),
            _ => Instruction::gate2(kind, 0, 1),
        };
        let single = Circuit::from_instructions(2, 0, vec![instr]).unwrap();
        for device in [&cx_device, &cz_device] {
            let lowered = decompose_to_native(&single, device).unwrap();
            for gate in &lowered.instructions {
                if let Instruction::Gate { kind, .. } = gate {
                    assert!(device.is_native(*kind), "{kind:?} left in {}", device.id);
                }
            }
            assert_equivalent(
                &single,
                &lowered,
                EXACT,
                &format!("{kind:?} on {}", device.id),
            );
        }
    }

    // Direction legalization: reversed two-qubit gates on a one-way edge.
    let one_way_cx = backend("onewaycx", 2, &["rx", "rz", "cx"], vec![[0, 1]]);
    let one_way_cz = backend("onewaycz", 2, &["rx", "rz", "cz"], vec![[0, 1]]);
    let one_way_swap = backend("onewayswap", 2, &["rx", "rz", "cx", "swap"], vec![[0, 1]]);
    for (device, kind) in [(&one_way_cx, Cx), (&one_way_cz, Cz), (&one_way_swap, Swap)] {
        let reversed =
            Circuit::from_instructions(2, 0, vec![Instruction::gate2(kind, 1, 0)]).unwrap();
        let legal = legalize(&reversed, device).unwrap();
        for gate in &legal.instructions {
            if let Instruction::Gate { kind, qubits, .. } = gate {
                assert!(device.is_native(*kind));
                if qubits.len() == 2 {
                    assert!(device.has_edge(qubits[0], qubits[1]), "{gate:?} off edge");
                }
            }
        }
        assert_equivalent(&reversed, &legal, EXACT, &format!("reversed {kind:?}"));
    }
}

#[test]
fn c05_profile_is_exact_and_selection_matches_hand_computation() {
    let bell = bell();
    let profile_report = profile(&bell);
    assert_eq!(profile_report.num_qubits, 2);
    assert_eq!(profile_report.num_cbits, 2);
    assert_eq!(profile_report.depth, 3);
    assert_eq!(profile_report.t_count, 0);
    assert_eq!(profile_report.two_qubit_count, 1);
    assert_eq!(profile_report.measure_count, 2);
    let histogram: Vec<(&str, usize)> = profile_report
        .gate_histogram
        .iter()
        .map(|(k, v)| (k.as_str(), *v))
        .collect();
    assert_eq!(histogram, [("cx", 1), ("h", 1), ("measure", 2)]);

    let registry = registry();
    let report = select_backend(&bell, &registry, SelectionObjective::Success, 1024);
    assert_eq!(report.selected.as_deref(), Some("toy5"));
    assert_eq!(report.ranking.len(), 3);
    assert_eq!(report.ranking[0].backend_id, "toy5");
    assert_eq!(report.ranking[1].backend_id, "ring4");
    assert_eq!(report.ranking[2].backend_id, "tiny1");
    assert!(!report.ranking[2].feasible);
    assert_eq!(report.ranking[2].reason.as_deref(), Some("insufficient qubits"));

    let hand_success = |routed: &CircuitProfile, device: &BackendDescriptor| {
        let total: usize = routed.gate_histogram.values().sum();
        let one_qubit = total - routed.two_qubit_count - routed.measure_count;
        (1.0 - device.error_1q).powi(one_qubit as i32)
            * (1.0 - device.error_2q).powi(routed.two_qubit_count as i32)
            * (1.0 - device.readout_error).powi(routed.measure_count as i32)
    };
    for entry in report.ranking.iter().filter(|e| e.feasible) {
        let device = registry.iter().find(|b| b.id == entry.backend_id).unwrap();
        let routed = profile(&transpile(&bell, device).unwrap().circuit);
        let expected = hand_success(&routed, device);
        assert!(
            (entry.success.unwrap() - expected).abs() < EXACT,
            "{}: reported {} vs recomputed {}",
            entry.backend_id,
            entry.success.unwrap(),
            expected
        );
        assert!(
            (entry.total_cost.unwrap() - 1024.0 * device.cost_per_shot).abs() < EXACT
        );
    }
    assert!(report.ranking[0].success.unwrap() > report.ranking[1].success.unwrap());

    let by_cost = select_backend(&bell, &registry, SelectionObjective::Cost, 1024);
    assert_eq!(by_cost.selected.as_deref(), Some("toy5"));
}

#[test]
fn c06_qaoa_recovers_the_square_maxcut() {
    let start = Instant::now();
    let graph = parse_graph(&read_fixture("graph_square.json")).unwrap();
    let (optimum, _) = maxcut_bruteforce(&graph).unwrap();
    assert_eq!(optimum, 4);

    let result = run_qaoa(&graph, 1, 32, 1024, 7).unwrap();
    assert!(result.best_value >= 2.9, "expected cut {}", result.best_value);
    assert_eq!(result.best_cut, Some(optimum));
    assert!(start.elapsed() < Duration::from_secs(10), "took {:?}", start.elapsed());
}

#[test]
fn c07_vqe_reaches_the_zz_ground_state() {
    let start = Instant::now();
    let observable = parse_observable(&read_fixture("obs_zz.json")).unwrap();
    let result = run_vqe(&observable, 1, 5, 1).unwrap();
    assert!(result.best_value <= -0.999, "reached {}", result.best_value);
    assert!(start.elapsed() < Duration::from_secs(5), "took {:?}", start.elapsed());
}

#[test]
fn c08_bell_assembler_output_is_byte_exact() {
    let bell = bell();
    let qasm2 = "OPENQASM 2.0;\n\
        include \"qelib1.inc\";\n\
        qreg q[2];\n\
        creg c[2];\n\
        h q[0];\n\
        cx q[0],q[1];\n\
        measure q[0] -> c[0];\n\
        measure q[1] -> c[1];\n";
    assert_eq!(emit_qasm2(&bell).unwrap(), qasm2);

    let quil = "DECLARE ro BIT[2]\n\
        H 0\n\
        CNOT 0 1\n\
        MEASURE 0 ro[0]\n\
        MEASURE 1 ro[1]\n";
    assert_eq!(emit_quil(&bell).unwrap(), quil);
}

#[test]
fn c09_printer_and_parser_are_exact_inverses() {
    for seed in 0..250u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_measured_circuit(&mut rng, 5, 30);
        let text = print_circuit(&circuit);
        let reparsed =
            parse_circuit(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(reparsed, circuit, "seed {seed} changed the circuit");
        assert_eq!(print_circuit(&reparsed), text, "seed {seed} changed the text");
    }
}

#[tokio::test]
async fn c10_job_service_runs_bell_jobs_in_order() {
    let start = Instant::now();
    let service = vaql_qaas::Service::start(registry(), 1, None).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(async move {
        service.serve(listener).await.unwrap();
    });
    let client = reqwest::Client::new();

    let response = client
        .post(format!("{base}/jobs"))
        .json(&json!({ "program": "qubits 2; cbits 2;\nbadgate 0;\n", "shots": 10 }))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 400);
    let body: Value = response.json().await.unwrap();
    assert!(body["error"].as_str().unwrap().contains("unknown mnemonic"));
    assert_eq!(body["line"], 2);

    let program = read_fixture("bell.vaql");
    let mut ids = Vec::new();
    for seed in 0..10u64 {
        let response = client
            .post(format!("{base}/jobs"))
            .json(&json!({ "program": program, "shots": 1000, "seed": seed }))
            .send()
            .await
            .unwrap();
        assert_eq!(response.status().as_u16(), 202);
        let body: Value = response.json().await.unwrap();
        ids.push(body["job_id"].as_str().unwrap().to_string());
    }

    let mut started = Vec::new();
    for (index, id) in ids.iter().enumerate() {
        let record = loop {
            let record: Value = client
                .get(format!("{base}/jobs/{id}"))
                .send()
                .await
                .unwrap()
                .json()
                .await
                .unwrap();
            match record["status"].as_str().unwrap() {
                "done" => break record,
                "failed" => panic!("job {id} failed: {}", record["error"]),
                _ => {
                    assert!(
                        start.elapsed() < Duration::from_secs(10),
                        "jobs not finished in time"
                    );
                    tokio::time::sleep(Duration::from_millis(5)).await;
                }
            }
        };
        assert_eq!(record["position"], index as u64);
        let histogram = record["result"]["histogram"].as_object().unwrap();
        let total: u64 = histogram.values().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(total, 1000);
        assert!(histogram.keys().all(|k| k == "00" || k == "11"));
        let stamp = record["started"].as_str().unwrap();
        started.push(
            time::OffsetDateTime::parse(stamp, &time::format_description::well_known::Rfc3339)
                .unwrap(),
        );
    }
    for pair in started.windows(2) {
        assert!(pair[0] <= pair[1], "start order violated: {pair:?}");
    }
    assert!(start.elapsed() < Duration::from_secs(10), "took {:?}", start.elapsed());
}
