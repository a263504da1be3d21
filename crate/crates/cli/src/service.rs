//! `induct serve`: the HTTP reward service.
//!
//! Endpoints:
//! - `POST /judge` — judge a hypothesis against a preloaded task
//!   (`task_id`) or an inline (background, positives, negatives) triple;
//!   returns syntax/overall/partial scores, HTTP 200 even for invalid
//!   hypotheses (scores are data, not transport errors).
//! - `GET /task/{id}` — the stored task record.
//! - `GET /healthz` — liveness.
//!
//! Concurrency is bounded by a semaphore (saturation yields 503), each
//! judgment runs on the blocking pool in its own engine, and client
//! limit overrides can only tighten the server's per-request budget.

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Args;
use induct_core::engine::ResourceLimits;
use induct_core::judge::{judge, judge_inline};
use induct_core::logic::{parse_atom, parse_program};
use induct_core::records::{read_jsonl, JudgeRequest, JudgeResponse, TaskRecord};
use induct_core::synth::TaskInstance;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use tokio::sync::Semaphore;

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Dataset JSONL file or directory of split files to preload.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Maximum in-flight judge requests before 503.
    #[arg(long, default_value_t = 64)]
    pub max_concurrency: usize,
    /// Per-query wall-timeout cap in milliseconds.
    #[arg(long, default_value_t = 5000)]
    pub timeout_ms: u64,
    /// Per-query resolution depth cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_depth: usize,
    /// Per-query resolution step cap.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Hypothesis size cap in KiB.
    #[arg(long, default_value_t = 64)]
    pub hypothesis_cap_kib: usize,
}

pub struct ServiceState {
    pub tasks: BTreeMap<String, (TaskRecord, TaskInstance)>,
    pub limits: ResourceLimits,
    pub hypothesis_cap: usize,
    pub semaphore: Semaphore,
}

impl ServiceState {
    pub fn new(
        records: Vec<TaskRecord>,
        limits: ResourceLimits,
        max_concurrency: usize,
        hypothesis_cap: usize,
    ) -> anyhow::Result<ServiceState> {
        let mut tasks = BTreeMap::new();
        for record in records {
            let task = record.to_task()?;
            tasks.insert(record.id.clone(), (record, task));
        }
        Ok(ServiceState {
            tasks,
            limits,
            hypothesis_cap,
            semaphore: Semaphore::new(max_concurrency.max(1)),
        })
    }
}

pub fn build_router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/judge", post(judge_handler))
        .route("/task/{id}", get(task_handler))
        .route("/healthz", get(healthz))
        .with_state(state)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn task_handler(
    State(state): State<Arc<ServiceState>>,
    Path(id): Path<String>,
) -> Response {
    match state.tasks.get(&id) {
        Some((record, _)) => Json(record.clone()).into_response(),
        None => error_response(StatusCode::NOT_FOUND, format!("unknown task id `{id}`")),
    }
}

fn error_response(status: StatusCode, message: String) -> Response {
    (status, Json(serde_json::json!({ "error": message }))).into_response()
}

async fn judge_handler(
    State(state): State<Arc<ServiceState>>,
    Json(request): Json<JudgeRequest>,
) -> Response {
    if request.hypothesis.len() > state.hypothesis_cap {
        return error_response(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!(
                "hypothesis exceeds the {} byte cap",
                state.hypothesis_cap
            ),
        );
    }
    let Ok(permit) = state.semaphore.try_acquire() else {
        return error_response(
            StatusCode::SERVICE_UNAVAILABLE,
            "concurrency limit saturated, retry later".to_string(),
        );
    };

    let limits = request
        .limits
        .unwrap_or_default()
        .clamp_to(&state.limits);

    let result = match &request.task_id {
        Some(id) => match state.tasks.get(id) {
            Some((_, task)) => {
                let task = task.clone();
                let hypothesis = request.hypothesis.clone();
                tokio::task::spawn_blocking(move || judge(&hypothesis, &task, &limits)).await
            }
            None => {
                return error_response(
                    StatusCode::NOT_FOUND,
                    format!("unknown task id `{}`", id),
                )
            }
        },
        None => {
            let (Some(background), Some(positives)) =
                (request.background.clone(), request.positives.clone())
            else {
                return error_response(
                    StatusCode::BAD_REQUEST,
                    "provide either task_id or inline background + positives".to_string(),
                );
            };
            let negatives = request.negatives.clone().unwrap_or_default();
            let program = match parse_program(&background) {
                Ok(p) => p,
                Err(e) => {
                    return error_response(
                        StatusCode::BAD_REQUEST,
                        format!("background does not parse: {e}"),
                    )
                }
            };
            let parse_queries = |items: &[String]| -> Result<Vec<_>, String> {
                items
                    .iter()
                    .map(|s| parse_atom(s).map_err(|e| format!("query `{s}`: {e}")))
                    .collect()
            };
            let positives = match parse_queries(&positives) {
                Ok(q) => q,
                Err(e) => return error_response(StatusCode::BAD_REQUEST, e),
            };
            let negatives = match parse_queries(&negatives) {
                Ok(q) => q,
                Err(e) => return error_response(StatusCode::BAD_REQUEST, e),
            };
            if positives.is_empty() && negatives.is_empty() {
                return error_response(
                    StatusCode::BAD_REQUEST,
                    "no example queries supplied".to_string(),
                );
            }
            let target = request
                .target
                .clone()
                .or_else(|| positives.first().map(|q| q.predicate.clone()))
                .or_else(|| negatives.first().map(|q| q.predicate.clone()))
                .unwrap_or_else(|| "eastbound".to_string());
            let hypothesis = request.hypothesis.clone();
            tokio::task::spawn_blocking(move || {
                judge_inline(&hypothesis, &program, &positives, &negatives, &target, &limits)
            })
            .await
        }
    };
    drop(permit);

    match result {
        Ok(judgment) => Json(JudgeResponse::from_judgment(&judgment)).into_response(),
        Err(e) => error_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("judge task panicked: {e}"),
        ),
    }
}

fn load_records(path: &PathBuf) -> anyhow::Result<Vec<TaskRecord>> {
    let mut records = Vec::new();
    if path.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        entries.sort();
        for file in entries {
            records.extend(read_jsonl(std::io::BufReader::new(std::fs::File::open(file)?))?);
        }
    } else {
        records.extend(read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))?);
    }
    Ok(records)
}

pub fn run(args: &ServeArgs) -> anyhow::Result<()> {
    let records = match &args.dataset {
        Some(path) => load_records(path)?,
        None => Vec::new(),
    };
    let limits = ResourceLimits {
        wall_timeout: std::time::Duration::from_millis(args.timeout_ms),
        max_depth: args.max_depth,
        max_steps: args.max_steps,
    };
    let state = Arc::new(ServiceState::new(
        records,
        limits,
        args.max_concurrency,
        args.hypothesis_cap_kib * 1024,
    )?);
    eprintln!(
        "serving {} preloaded tasks on port {} (max {} concurrent judgments)",
        state.tasks.len(),
        args.port,
        args.max_concurrency
    );

    let router = build_router(state);
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(async move {
            let listener =
                tokio::net::TcpListener::bind(("0.0.0.0", args.port)).await?;
            axum::serve(listener, router)
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
            Ok(())
        })
}
