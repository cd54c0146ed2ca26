//! Job lifecycle records and the pipeline a worker runs for each job.

use serde::{Deserialize, Serialize};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;
use uuid::Uuid;

use vaql_core::analyzer::{select_backend, SelectionObjective};
use vaql_core::sim::{measurement_distribution, sample_counts, Distribution, Histogram};
use vaql_core::transpiler::{transpile, TranspiledProgram};
use vaql_core::{optimize, parse_circuit, BackendDescriptor, Objective};

/// Submission payload for `POST /jobs`. When `backend_id` is omitted the
/// service picks the feasible backend with the best estimated success.
/// Sampling uses `seed`, defaulting to 0, so identical submissions produce
/// identical histograms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobRequest {
    pub program: String,
    #[serde(default)]
    pub backend_id: Option<String>,
    pub shots: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

/// Output of a finished job: the exact distribution, the seeded histogram,
/// and the program that would be shipped to the device.
#[derive(Debug, Clone, Serialize)]
pub struct JobResult {
    pub backend_id: String,
    pub histogram: Histogram,
    pub distribution: Distribution,
    pub transpiled: TranspiledProgram,
}

/// Full job state as returned by `GET /jobs/{id}`. `position` is the
/// submission index; jobs start in exactly that order.
#[derive(Debug, Clone, Serialize)]
pub struct JobRecord {
    pub id: Uuid,
    pub status: JobStatus,
    pub position: u64,
    pub submitted: String,
    pub started: Option<String>,
    pub finished: Option<String>,
    pub request: JobRequest,
    pub result: Option<JobResult>,
    pub error: Option<String>,
}

/// Current UTC time in RFC 3339 form, truncated to microseconds.
pub fn timestamp() -> String {
    let now = OffsetDateTime::now_utc();
    let truncated = now
        .replace_nanosecond(now.nanosecond() / 1_000 * 1_000)
        .expect("truncated nanoseconds stay in range");
    truncated.format(&Rfc3339).expect("UTC timestamps format")
}

/// Runs one job to completion: parse, optimize, pick a backend, transpile,
/// simulate, sample. Any stage error becomes the job's failure message.
pub fn execute(request: &JobRequest, registry: &[BackendDescriptor]) -> Result<JobResult, String> {
    let circuit = parse_circuit(&request.program).map_err(|e| format!("parse: {e}"))?;
    let optimized = optimize(&circuit, Objective::Size).circuit;
    let backend = match &request.backend_id {
        Some(id) => registry
            .iter()
            .find(|b| b.id == *id)
            .ok_or_else(|| format!("unknown backend '{id}'"))?,
        None => {
            let report = select_backend(
                &optimized,
                registry,
                SelectionObjective::Success,
                request.shots,
            );
            let Some(chosen) = report.selected else {
                return Err("no feasible backend for this circuit".into());
            };
            registry
                .iter()
                .find(|b| b.id == chosen)
                .expect("selected ids come from the registry")
        }
    };
    let program = transpile(&optimized, backend).map_err(|e| e.to_string())?;
    let distribution = measurement_distribution(&program.circuit).map_err(|e| e.to_string())?;
    let histogram = sample_counts(&distribution, request.shots, request.seed.unwrap_or(0));
    Ok(JobResult {
        backend_id: backend.id.clone(),
        histogram,
        distribution,
        transpiled: program,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> Vec<BackendDescriptor> {
        vaql_core::parse_registry(include_str!("../../../fixtures/registry.json")).unwrap()
    }

    fn bell_request(backend_id: Option<&str>) -> JobRequest {
        JobRequest {
            program: "qubits 2; cbits 2;\nh 0;\ncx 0, 1;\nmeasure 0 -> 0;\nmeasure 1 -> 1;\n"
                .into(),
            backend_id: backend_id.map(str::to_string),
            shots: 1000,
            seed: Some(7),
        }
    }

    #[test]
    fn bell_job_runs_end_to_end() {
        let result = execute(&bell_request(None), &registry()).unwrap();
        assert_eq!(result.backend_id, "toy5");
        let total: u64 = result.histogram.values().sum();
        assert_eq!(total, 1000);
        assert!(result.histogram.keys().all(|k| k == "00" || k == "11"));
        assert!((result.distribution["00"] - 0.5).abs() < 1e-9);
        assert!((result.distribution["11"] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn explicit_backend_is_honored() {
        let result = execute(&bell_request(Some("ring4")), &registry()).unwrap();
        assert_eq!(result.backend_id, "ring4");
        assert_eq!(result.transpiled.backend_id, "ring4");
    }

    #[test]
    fn unknown_backend_fails_with_its_name() {
        let err = execute(&bell_request(Some("nope")), &registry()).unwrap_err();
        assert!(err.contains("nope"));
    }

    #[test]
    fn infeasible_circuits_report_no_backend() {
        let mut request = bell_request(None);
        request.program =
            "qubits 6; cbits 0;\ncx 0, 1;\ncx 1, 2;\ncx 2, 3;\ncx 3, 4;\ncx 4, 5;\n".into();
        let err = execute(&request, &registry()).unwrap_err();
        assert_eq!(err, "no feasible backend for this circuit");
    }

    #[test]
    fn seeds_default_to_zero() {
        let mut request = bell_request(None);
        request.seed = None;
        let a = execute(&request, &registry()).unwrap();
        request.seed = Some(0);
        let b = execute(&request, &registry()).unwrap();
        assert_eq!(a.histogram, b.histogram);
    }

    #[test]
    fn timestamps_are_rfc3339_utc() {
        let stamp = timestamp();
        assert!(stamp.ends_with('Z'), "got {stamp}");
        assert!(OffsetDateTime::parse(&stamp, &Rfc3339).is_ok());
    }
}
