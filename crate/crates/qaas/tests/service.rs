//! End-to-end tests against the HTTP surface on an ephemeral port.

use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;
use vaql_core::parse_registry;
use vaql_qaas::Service;

const BELL: &str = "qubits 2; cbits 2;\nh 0;\ncx 0, 1;\nmeasure 0 -> 0;\nmeasure 1 -> 1;\n";

async fn start(workers: usize, journal: Option<&Path>) -> String {
    let registry = parse_registry(include_str!("../../../fixtures/registry.json")).unwrap();
    let service = Service::start(registry, workers, journal).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        service.serve(listener).await.unwrap();
    });
    format!("http://{addr}")
}

async fn submit(client: &reqwest::Client, base: &str, body: &Value) -> (u16, Value) {
    let response = client
        .post(format!("{base}/jobs"))
        .json(body)
        .send()
        .await
        .unwrap();
    let status = response.status().as_u16();
    let body: Value = response.json().await.unwrap();
    (status, body)
}

async fn wait_terminal(client: &reqwest::Client, base: &str, id: &str) -> Value {
    let deadline = Instant::now() + Duration::from_secs(10);
    loop {
        let record: Value = client
            .get(format!("{base}/jobs/{id}"))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        match record["status"].as_str().unwrap() {
            "done" | "failed" => return record,
            status => {
                assert!(Instant::now() < deadline, "job {id} stuck in '{status}'");
                tokio::time::sleep(Duration::from_millis(5)).await;
            }
        }
    }
}

#[tokio::test]
async fn bell_job_completes_with_exact_counts() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();
    let (status, body) = submit(
        &client,
        &base,
        &json!({ "program": BELL, "shots": 1000, "seed": 7 }),
    )
    .await;
    assert_eq!(status, 202);
    let id = body["job_id"].as_str().unwrap().to_string();

    let record = wait_terminal(&client, &base, &id).await;
    assert_eq!(record["status"], "done");
    assert_eq!(record["position"], 0);
    assert!(record["submitted"].is_string());
    assert!(record["started"].is_string());
    assert!(record["finished"].is_string());
    assert_eq!(record["result"]["backend_id"], "toy5");

    let histogram = record["result"]["histogram"].as_object().unwrap();
    let total: u64 = histogram.values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 1000);
    assert!(histogram.keys().all(|k| k == "00" || k == "11"));
    let transpiled = &record["result"]["transpiled"];
    assert!(transpiled["circuit"].as_str().unwrap().starts_with("qubits 5; cbits 2;"));
}

#[tokio::test]
async fn jobs_start_in_submission_order() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();
    let mut ids = Vec::new();
    for _ in 0..6 {
        let (status, body) = submit(
            &client,
            &base,
            &json!({ "program": BELL, "shots": 200 }),
        )
        .await;
        assert_eq!(status, 202);
        ids.push(body["job_id"].as_str().unwrap().to_string());
    }

    let mut started = Vec::new();
    for (expected_position, id) in ids.iter().enumerate() {
        let record = wait_terminal(&client, &base, id).await;
        assert_eq!(record["status"], "done");
        assert_eq!(record["position"], expected_position as u64);
        let stamp = record["started"].as_str().unwrap();
        started.push(OffsetDateTime::parse(stamp, &Rfc3339).unwrap());
    }
    for pair in started.windows(2) {
        assert!(pair[0] <= pair[1], "started out of order: {pair:?}");
    }
}

#[tokio::test]
async fn malformed_programs_are_rejected_with_a_location() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();
    let (status, body) = submit(
        &client,
        &base,
        &json!({ "program": "qubits 2; cbits 2;\nfoo 0;\n", "shots": 100 }),
    )
    .await;
    assert_eq!(status, 400);
    assert!(body["error"].as_str().unwrap().contains("unknown mnemonic"));
    assert_eq!(body["line"], 2);
    assert_eq!(body["column"], 1);
}

#[tokio::test]
async fn invalid_requests_are_rejected() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();

    let (status, body) = submit(&client, &base, &json!({ "program": BELL, "shots": 0 })).await;
    assert_eq!(status, 400);
    assert_eq!(body["error"], "shots must be positive");

    let (status, body) = submit(
        &client,
        &base,
        &json!({ "program": BELL, "shots": 10, "backend_id": "nope" }),
    )
    .await;
    assert_eq!(status, 400);
    assert!(body["error"].as_str().unwrap().contains("nope"));

    let response = client
        .post(format!("{base}/jobs"))
        .header("content-type", "application/json")
        .body("{ not json")
        .send()
        .await
        .unwrap();
    assert_eq!(response.status().as_u16(), 400);
    let body: Value = response.json().await.unwrap();
    assert!(body["error"].is_string());
}

#[tokio::test]
async fn unknown_jobs_return_404() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();
    for path in ["/jobs/5e81cbb0-982c-4bb5-a3cb-0a5e35a5d425", "/jobs/not-a-uuid"] {
        let response = client.get(format!("{base}{path}")).send().await.unwrap();
        assert_eq!(response.status().as_u16(), 404);
        let body: Value = response.json().await.unwrap();
        assert_eq!(body["error"], "unknown job");
    }
}

#[tokio::test]
async fn backends_endpoint_lists_the_registry() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();
    let body: Value = client
        .get(format!("{base}/backends"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let ids: Vec<&str> = body
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, vec!["tiny1", "toy5", "ring4"]);
}

#[tokio::test]
async fn infeasible_jobs_fail_with_an_explanation() {
    let base = start(1, None).await;
    let client = reqwest::Client::new();
    let wide = "qubits 6; cbits 0;\ncx 0, 1;\ncx 1, 2;\ncx 2, 3;\ncx 3, 4;\ncx 4, 5;\n";
    let (status, body) = submit(&client, &base, &json!({ "program": wide, "shots": 10 })).await;
    assert_eq!(status, 202);
    let record = wait_terminal(&client, &base, body["job_id"].as_str().unwrap()).await;
    assert_eq!(record["status"], "failed");
    assert_eq!(record["error"], "no feasible backend for this circuit");
    assert!(record["result"].is_null());
}

#[tokio::test]
async fn journal_captures_terminal_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.jsonl");
    let base = start(1, Some(&path)).await;
    let client = reqwest::Client::new();
    let (_, body) = submit(&client, &base, &json!({ "program": BELL, "shots": 50 })).await;
    let record = wait_terminal(&client, &base, body["job_id"].as_str().unwrap()).await;
    assert_eq!(record["status"], "done");

    let contents = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = contents.lines().collect();
    assert_eq!(lines.len(), 1);
    let entry: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(entry["id"], record["id"]);
    assert_eq!(entry["status"], "done");
}
