//! Queued quantum job service.
//!
//! Exposes the toolchain over three endpoints:
//!
//! * `POST /jobs` accepts a program plus shot count and answers `202` with
//!   a job id.
//! * `GET /jobs/{id}` returns the full job record: status, queue position,
//!   timestamps, and on completion the histogram and transpiled program.
//! * `GET /backends` lists the device registry the service was started
//!   with.
//!
//! Jobs run first in, first out. Submission validates the program text and
//! the requested backend so malformed requests fail immediately with a
//! JSON error body instead of occupying the queue.

pub mod job;

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path as FilePath;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tokio::sync::mpsc;
use uuid::Uuid;

use job::{execute, timestamp, JobRecord, JobRequest, JobStatus};
use vaql_core::{parse_circuit, BackendDescriptor};

struct JobTable {
    records: HashMap<Uuid, JobRecord>,
    next_position: u64,
}

struct Inner {
    registry: Vec<BackendDescriptor>,
    table: Mutex<JobTable>,
    sender: mpsc::UnboundedSender<Uuid>,
    journal: Option<Mutex<File>>,
}

/// Shared service handle; cheap to clone into handlers and workers.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

impl Service {
    /// Creates the service and spawns `workers` job consumers on the
    /// current runtime. With one worker (the default deployment) jobs also
    /// finish in submission order. A journal path turns on an append-only
    /// JSON-lines log of every terminal job record.
    pub fn start(
        registry: Vec<BackendDescriptor>,
        workers: usize,
        journal: Option<&FilePath>,
    ) -> std::io::Result<Service> {
        let journal = match journal {
            Some(path) => Some(Mutex::new(
                OpenOptions::new().create(true).append(true).open(path)?,
            )),
            None => None,
        };
        let (sender, receiver) = mpsc::unbounded_channel();
        let service = Service {
            inner: Arc::new(Inner {
                registry,
                table: Mutex::new(JobTable {
                    records: HashMap::new(),
                    next_position: 0,
                }),
                sender,
                journal,
            }),
        };
        let receiver = Arc::new(tokio::sync::Mutex::new(receiver));
        for _ in 0..workers.max(1) {
            tokio::spawn(worker_loop(service.clone(), receiver.clone()));
        }
        Ok(service)
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/jobs", post(submit_job))
            .route("/jobs/{id}", get(fetch_job))
            .route("/backends", get(list_backends))
            .with_state(self.clone())
    }

    /// Serves requests on an already-bound listener until the task is
    /// dropped or the process exits.
    pub async fn serve(&self, listener: tokio::net::TcpListener) -> std::io::Result<()> {
        axum::serve(listener, self.router()).await
    }
}

async fn worker_loop(
    service: Service,
    receiver: Arc<tokio::sync::Mutex<mpsc::UnboundedReceiver<Uuid>>>,
) {
    loop {
        let id = {
            let mut receiver = receiver.lock().await;
            match receiver.recv().await {
                Some(id) => id,
                None => return,
            }
        };
        let request = {
            let mut table = service.inner.table.lock().expect("job table lock");
            let record = table.records.get_mut(&id).expect("queued jobs have records");
            record.status = JobStatus::Running;
            record.started = Some(timestamp());
            record.request.clone()
        };
        let registry = service.inner.registry.clone();
        let outcome = tokio::task::spawn_blocking(move || execute(&request, &registry)).await;
        let line = {
            let mut table = service.inner.table.lock().expect("job table lock");
            let record = table.records.get_mut(&id).expect("running jobs have records");
            record.finished = Some(timestamp());
            match outcome {
                Ok(Ok(result)) => {
                    record.status = JobStatus::Done;
                    record.result = Some(result);
                }
                Ok(Err(message)) => {
                    record.status = JobStatus::Failed;
                    record.error = Some(message);
                }
                Err(join_error) => {
                    record.status = JobStatus::Failed;
                    record.error = Some(format!("job task panicked: {join_error}"));
                }
            }
            serde_json::to_string(&*record).expect("job records serialize")
        };
        if let Some(journal) = &service.inner.journal {
            let mut file = journal.lock().expect("journal lock");
            if let Err(e) = writeln!(file, "{line}") {
                eprintln!("journal write failed: {e}");
            }
        }
    }
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn submit_job(
    State(service): State<Service>,
    payload: Result<Json<JobRequest>, JsonRejection>,
) -> Response {
    let Json(request) = match payload {
        Ok(json) => json,
        Err(rejection) => {
            return error_response(StatusCode::BAD_REQUEST, rejection.body_text());
        }
    };
    if request.shots == 0 {
        return error_response(StatusCode::BAD_REQUEST, "shots must be positive");
    }
    if let Err(e) = parse_circuit(&request.program) {
        return (
            StatusCode::BAD_REQUEST,
            Json(json!({ "error": e.to_string(), "line": e.line, "column": e.column })),
        )
            .into_response();
    }
    if let Some(backend_id) = &request.backend_id {
        if !service.inner.registry.iter().any(|b| b.id == *backend_id) {
            return error_response(
                StatusCode::BAD_REQUEST,
                format!("unknown backend '{backend_id}'"),
            );
        }
    }

    let id = Uuid::new_v4();
    {
        let mut table = service.inner.table.lock().expect("job table lock");
        let position = table.next_position;
        table.next_position += 1;
        table.records.insert(
            id,
            JobRecord {
                id,
                status: JobStatus::Queued,
                position,
                submitted: timestamp(),
                started: None,
                finished: None,
                request,
                result: None,
                error: None,
            },
        );
        if service.inner.sender.send(id).is_err() {
            let record = table.records.get_mut(&id).expect("record just inserted");
            record.status = JobStatus::Failed;
            record.error = Some("worker queue is closed".into());
            return error_response(StatusCode::INTERNAL_SERVER_ERROR, "worker queue is closed");
        }
    }
    (StatusCode::ACCEPTED, Json(json!({ "job_id": id }))).into_response()
}

async fn fetch_job(State(service): State<Service>, Path(id): Path<String>) -> Response {
    let Ok(id) = Uuid::parse_str(&id) else {
        return error_response(StatusCode::NOT_FOUND, "unknown job");
    };
    let table = service.inner.table.lock().expect("job table lock");
    match table.records.get(&id) {
        Some(record) => Json(record.clone()).into_response(),
        None => error_response(StatusCode::NOT_FOUND, "unknown job"),
    }
}

async fn list_backends(State(service): State<Service>) -> Json<Vec<BackendDescriptor>> {
    Json(service.inner.registry.clone())
}
