//! JSON-over-HTTP facade over the `trimhill` library.
//!
//! Datasets are uploaded once as CSV and kept in memory; every other endpoint
//! is a pure function of the stored sample and the query string.
//!
//! | method | path                              | response                         |
//! |--------|-----------------------------------|----------------------------------|
//! | POST   | `/v1/datasets`                    | `{id, n}`                        |
//! | GET    | `/v1/datasets/{id}`               | dataset handle                   |
//! | GET    | `/v1/datasets/{id}/estimate`      | `{tail_estimate, detection?}`    |
//! | GET    | `/v1/datasets/{id}/detect`        | `{detection}`                    |
//! | GET    | `/v1/datasets/{id}/diagnostic`    | `{series}` with band             |
//! | GET    | `/v1/datasets/{id}/hillplot`      | `{classic, trimmed, biased}`     |
//! | GET    | `/v1/datasets/{id}/qq`            | `{series}`                       |
//! | POST   | `/v1/simulate`                    | `{mc_report}`                    |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use trimhill::format::{to_json, DetectDoc, DetectionDoc, EstimateDoc, McReportDoc, SeriesDoc};
use trimhill::{
    adaptive_trimmed_hill, alpha_schedule, classic_hill, diagnostic_series, hill_series,
    ingest_csv, pareto_qq_series, ratio_statistics, run_mc, select_k0, trimmed_hill,
    ColumnSelector, IngestOptions, McConfig, Sample, TiePolicy, DEFAULT_LEVEL, DEFAULT_WEIGHT,
};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Largest accepted dataset, in values.
    pub max_values: usize,
    /// Largest accepted request body, in bytes.
    pub max_body_bytes: usize,
    /// Upper bound on `reps * n * |k_grid|` for `/v1/simulate`.
    pub simulation_budget: u128,
    /// Allowed CORS origin; any origin when `None`.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_values: 10_000_000,
            max_body_bytes: 256 * 1024 * 1024,
            simulation_budget: 50_000_000,
            cors_origin: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHandle {
    pub id: String,
    pub n: usize,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub tie_policy_applied: IngestOptions,
}

struct Dataset {
    handle: DatasetHandle,
    sample: Sample,
}

struct AppState {
    config: ServiceConfig,
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
    next_id: AtomicU64,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: message.into(),
        }
    }

    fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code,
            message: message.into(),
        }
    }
}

impl From<trimhill::Error> for ApiError {
    fn from(e: trimhill::Error) -> Self {
        let status = match e {
            trimhill::Error::Parse { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self {
            status,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: &'a str,
}

fn json_response(status: StatusCode, body: String) -> Response {
    (
        status,
        [(
            header::CONTENT_TYPE,
            HeaderValue::from_static("application/json"),
        )],
        body,
    )
        .into_response()
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = to_json(&ErrorBody {
            error: ErrorDetail {
                code: self.code,
                message: &self.message,
            },
        });
        json_response(self.status, body)
    }
}

fn ok<T: Serialize>(doc: &T) -> Response {
    json_response(StatusCode::OK, to_json(doc))
}

type ApiResult = Result<Response, ApiError>;
type Params = Query<HashMap<String, String>>;

fn required<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<T, ApiError> {
    optional(q, key)?
        .ok_or_else(|| ApiError::bad_request(format!("missing query parameter '{key}'")))
}

fn optional<T: std::str::FromStr>(
    q: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, ApiError> {
    q.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| ApiError::bad_request(format!("cannot parse {key}='{v}'")))
        })
        .transpose()
}

fn level_and_weight(q: &HashMap<String, String>) -> Result<(f64, f64), ApiError> {
    Ok((
        optional(q, "q")?.unwrap_or(DEFAULT_LEVEL),
        optional(q, "a")?.unwrap_or(DEFAULT_WEIGHT),
    ))
}

impl AppState {
    fn dataset(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        self.datasets
            .read()
            .expect("dataset store poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError {
                status: StatusCode::NOT_FOUND,
                code: "not_found",
                message: format!("unknown dataset '{id}'"),
            })
    }
}

fn ingest_options(q: &HashMap<String, String>) -> Result<IngestOptions, ApiError> {
    let mut opts = IngestOptions::default();
    if let Some(col) = q.get("column") {
        opts.column = match col.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(col.clone()),
        };
    }
    if let Some(d) = q.get("delimiter") {
        opts.delimiter = match d.as_bytes() {
            [b] => *b,
            _ if d == "tab" => b'\t',
            _ => return Err(ApiError::bad_request(format!("bad delimiter '{d}'"))),
        };
    }
    opts.tie_policy = match q.get("tie_policy").map(String::as_str) {
        None | Some("unique") => TiePolicy::Unique,
        Some("none") => TiePolicy::None,
        Some("dither") => TiePolicy::Dither {
            epsilon: optional(q, "epsilon")?.unwrap_or(trimhill::ingest::DEFAULT_DITHER_EPSILON),
            seed: required(q, "seed")?,
        },
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown tie_policy '{other}'"
            )))
        }
    };
    Ok(opts)
}

async fn upload(State(state): State<Arc<AppState>>, Query(q): Params, body: String) -> ApiResult {
    let opts = ingest_options(&q)?;
    let parse_opts = opts.clone();
    let sample = tokio::task::spawn_blocking(move || ingest_csv(body.as_bytes(), &parse_opts))
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))??;
    if sample.len() > state.config.max_values {
        return Err(ApiError::unprocessable(
            "dataset_too_large",
            format!(
                "dataset has {} values, limit is {}",
                sample.len(),
                state.config.max_values
            ),
        ));
    }
    let id = format!("ds{}", state.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let handle = DatasetHandle {
        id: id.clone(),
        n: sample.len(),
        created_at: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        tie_policy_applied: opts,
    };
    let n = sample.len();
    state
        .datasets
        .write()
        .expect("dataset store poisoned")
        .insert(id.clone(), Arc::new(Dataset { handle, sample }));

    #[derive(Serialize)]
    struct Created {
        id: String,
        n: usize,
    }
    Ok(json_response(
        StatusCode::CREATED,
        to_json(&Created { id, n }),
    ))
}

async fn describe(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    Ok(ok(&state.dataset(&id)?.handle))
}

async fn estimate(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult {
    let ds = state.dataset(&id)?;
    let k: usize = required(&q, "k")?;
    let doc = match q.get("k0").map(String::as_str) {
        Some("auto") => {
            let (qv, a) = level_and_weight(&q)?;
            let (d, e) = adaptive_trimmed_hill(&ds.sample, k, qv, a)?;
            EstimateDoc {
                tail_estimate: e,
                detection: Some(DetectionDoc::from(&d)),
            }
        }
        Some(_) => EstimateDoc {
            tail_estimate: trimmed_hill(&ds.sample, required(&q, "k0")?, k)?,
            detection: None,
        },
        None => EstimateDoc {
            tail_estimate: classic_hill(&ds.sample, k)?,
            detection: None,
        },
    };
    Ok(ok(&doc))
}

async fn detect(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult {
    let ds = state.dataset(&id)?;
    let k: usize = required(&q, "k")?;
    let (qv, a) = level_and_weight(&q)?;
    let ratios = ratio_statistics(&ds.sample, k)?;
    let d = select_k0(&ratios, &alpha_schedule(k, qv, a)?)?;
    Ok(ok(&DetectDoc {
        detection: DetectionDoc::from(&d),
    }))
}

async fn diagnostic(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult {
    let ds = state.dataset(&id)?;
    let series = diagnostic_series(&ds.sample, required(&q, "k")?)?;
    Ok(ok(&SeriesDoc { series }))
}

async fn hillplot(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult {
    let ds = state.dataset(&id)?;
    let h = hill_series(
        &ds.sample,
        required(&q, "k0")?,
        required(&q, "kmin")?,
        required(&q, "kmax")?,
    )?;
    Ok(ok(&h))
}

async fn qq(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let ds = state.dataset(&id)?;
    Ok(ok(&SeriesDoc {
        series: pareto_qq_series(&ds.sample),
    }))
}

async fn simulate(State(state): State<Arc<AppState>>, body: String) -> ApiResult {
    let cfg: McConfig = serde_json::from_str(&body)
        .map_err(|e| ApiError::bad_request(format!("invalid simulation config: {e}")))?;
    if cfg.cost() > state.config.simulation_budget {
        return Err(ApiError::unprocessable(
            "budget_exceeded",
            format!(
                "reps * n * |k_grid| = {} exceeds the budget of {}",
                cfg.cost(),
                state.config.simulation_budget
            ),
        ));
    }
    let report = tokio::task::spawn_blocking(move || run_mc(&cfg))
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))??;
    Ok(ok(&McReportDoc { mc_report: report }))
}

pub fn router(config: ServiceConfig) -> Router {
    let origin = match &config.cors_origin {
        Some(o) => {
            AllowOrigin::exact(HeaderValue::from_str(o).unwrap_or(HeaderValue::from_static("null")))
        }
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any);
    let body_limit = config.max_body_bytes;
    let state = Arc::new(AppState {
        config,
        datasets: RwLock::new(HashMap::new()),
        next_id: AtomicU64::new(0),
    });
    Router::new()
        .route("/v1/datasets", post(upload))
        .route("/v1/datasets/{id}", get(describe))
        .route("/v1/datasets/{id}/estimate", get(estimate))
        .route("/v1/datasets/{id}/detect", get(detect))
        .route("/v1/datasets/{id}/diagnostic", get(diagnostic))
        .route("/v1/datasets/{id}/hillplot", get(hillplot))
        .route("/v1/datasets/{id}/qq", get(qq))
        .route("/v1/simulate", post(simulate))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

/// Serves the API on `addr` until Ctrl-C.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
