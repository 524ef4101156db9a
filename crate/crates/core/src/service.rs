//! Read-only HTTP bridge for the browser viewer.
//!
//! Every route is served both at the root and under `/v1`:
//!
//! | Method | Path | Body | Response |
//! |---|---|---|---|
//! | GET | `/health` | | `{"status":"ok"}` |
//! | GET | `/meshes` | | `[{id, name, file, stats}]` |
//! | GET | `/mesh/{id}` | | mesh JSON export |
//! | POST | `/geodesic` | `{id, a, b, refine?}` | `{length_mm, lower_bound_mm, polyline}` |
//! | POST | `/projection` | `{id, view, scale?, grid_spacing?}` | template sheet |
//!
//! Geodesic endpoints are either `{"face": f, "bary": [u, v, w]}` or
//! `{"point": [x, y, z]}`, the latter snapped to the nearest surface point.
//! Errors carry `{code, message}` with status 404 (unknown mesh), 400 (malformed
//! body) or 422 (domain error).

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use crate::error::{Error, ErrorCode};
use crate::geodesics::{GeodesicPathJson, GeodesicSolver, SurfacePoint};
use crate::mesh::{export_mesh_json, load_mesh, mesh_stats, Mesh, MeshStats};
use crate::templating::{overlay_grid, project_view, ProjectionOptions, View};

pub const DEFAULT_PORT: u16 = 8737;

pub struct MeshEntry {
    pub id: String,
    pub file: Option<PathBuf>,
    pub mesh: Arc<Mesh>,
    pub stats: MeshStats,
    solver: OnceLock<GeodesicSolver>,
}

impl MeshEntry {
    fn new(id: String, file: Option<PathBuf>, mesh: Mesh) -> Self {
        MeshEntry {
            id,
            file,
            stats: mesh_stats(&mesh),
            mesh: Arc::new(mesh),
            solver: OnceLock::new(),
        }
    }

    /// Adjacency and search structures, built on first use.
    pub fn solver(&self) -> &GeodesicSolver {
        self.solver.get_or_init(|| GeodesicSolver::new(Arc::clone(&self.mesh)))
    }
}

/// Meshes keyed by id; immutable once built.
#[derive(Default)]
pub struct MeshCatalog {
    entries: BTreeMap<String, MeshEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogItem {
    pub id: String,
    pub name: String,
    pub file: Option<String>,
    pub stats: MeshStats,
}

impl MeshCatalog {
    /// Loads every OBJ, STL, PLY and mesh-JSON file in `dir` (not recursive).
    /// Ids are file stems; unreadable files are listed in the returned warnings.
    pub fn load_dir(dir: &Path) -> Result<(Self, Vec<String>), Error> {
        let read = std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut paths: Vec<PathBuf> = read
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "obj" | "stl" | "ply" | "json"))
            })
            .collect();
        paths.sort();
        let mut catalog = MeshCatalog::default();
        let mut warnings = Vec::new();
        for p in paths {
            match load_mesh(&p) {
                Ok(mesh) => {
                    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh").to_string();
                    let id = if catalog.entries.contains_key(&stem) {
                        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or_default();
                        format!("{stem}-{ext}")
                    } else {
                        stem
                    };
                    catalog.entries.insert(id.clone(), MeshEntry::new(id, Some(p), mesh));
                }
                Err(e) => warnings.push(format!("{}: {e}", p.display())),
            }
        }
        if catalog.entries.is_empty() {
            return Err(Error::InvalidInput(format!("no parseable meshes in {}", dir.display())));
        }
        Ok((catalog, warnings))
    }

    pub fn from_meshes(meshes: impl IntoIterator<Item = (String, Mesh)>) -> Self {
        MeshCatalog {
            entries: meshes.into_iter().map(|(id, m)| (id.clone(), MeshEntry::new(id, None, m))).collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&MeshEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn items(&self) -> Vec<CatalogItem> {
        self.entries
            .values()
            .map(|e| CatalogItem {
                id: e.id.clone(),
                name: e.mesh.name().to_string(),
                file: e.file.as_ref().and_then(|f| f.file_name()).map(|f| f.to_string_lossy().into_owned()),
                stats: e.stats.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    code: String,
    message: String,
}

struct ApiError(StatusCode, ErrorBody);

impl ApiError {
    fn unknown(id: &str) -> Self {
        ApiError(
            StatusCode::NOT_FOUND,
            ErrorBody {
                code: "UnknownMesh".into(),
                message: format!("no mesh with id {id:?}"),
            },
        )
    }

    fn bad_request(message: String) -> Self {
        ApiError(
            StatusCode::BAD_REQUEST,
            ErrorBody {
                code: "BadRequest".into(),
                message,
            },
        )
    }

    fn domain<E: ErrorCode + std::fmt::Display>(e: E) -> Self {
        ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            ErrorBody {
                code: e.code().into(),
                message: e.to_string(),
            },
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Endpoint {
    Surface(SurfacePoint),
    Near { point: [f64; 3] },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeodesicRequest {
    id: String,
    a: Endpoint,
    b: Endpoint,
    #[serde(default = "yes")]
    refine: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionRequest {
    id: String,
    view: String,
    #[serde(default)]
    scale: Option<f64>,
    #[serde(default)]
    grid_spacing: Option<f64>,
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

type Shared = Arc<MeshCatalog>;

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn list(State(cat): State<Shared>) -> Json<Vec<CatalogItem>> {
    Json(cat.items())
}

async fn mesh(State(cat): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let entry = cat.get(&id).ok_or_else(|| ApiError::unknown(&id))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], export_mesh_json(&entry.mesh)).into_response())
}

async fn geodesic(State(cat): State<Shared>, body: Bytes) -> Result<Json<GeodesicPathJson>, ApiError> {
    let req: GeodesicRequest = parse_body(&body)?;
    if cat.get(&req.id).is_none() {
        return Err(ApiError::unknown(&req.id));
    }
    let cat = Arc::clone(&cat);
    tokio::task::spawn_blocking(move || {
        let entry = cat.get(&req.id).expect("checked above");
        let solver = entry.solver();
        let resolve = |e: &Endpoint| match e {
            Endpoint::Surface(s) => *s,
            Endpoint::Near { point } => solver.surface_point_near(&Point3::from(*point)),
        };
        if let Endpoint::Near { point } = &req.a {
            if !point.iter().all(|v| v.is_finite()) {
                return Err(ApiError::bad_request("endpoint a is not finite".into()));
            }
        }
        if let Endpoint::Near { point } = &req.b {
            if !point.iter().all(|v| v.is_finite()) {
                return Err(ApiError::bad_request("endpoint b is not finite".into()));
            }
        }
        let path = solver.distance(&resolve(&req.a), &resolve(&req.b), req.refine).map_err(ApiError::domain)?;
        Ok(Json(GeodesicPathJson::from(&path)))
    })
    .await
    .map_err(|e| ApiError::bad_request(format!("request failed: {e}")))?
}

async fn projection(State(cat): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: ProjectionRequest = parse_body(&body)?;
    let entry = cat.get(&req.id).ok_or_else(|| ApiError::unknown(&req.id))?;
    let view: View = req.view.parse().map_err(ApiError::domain)?;
    let opts = ProjectionOptions {
        scale: req.scale.unwrap_or(1.0),
        ..ProjectionOptions::default()
    };
    let mut sheet = project_view(&entry.mesh, view, &opts).map_err(ApiError::domain)?;
    if let Some(s) = req.grid_spacing {
        sheet = overlay_grid(&sheet, s).map_err(ApiError::domain)?;
    }
    Ok(Json(sheet).into_response())
}

fn routes() -> Router<Shared> {
    Router::new()
        .route("/health", get(health))
        .route("/meshes", get(list))
        .route("/mesh/{id}", get(mesh))
        .route("/geodesic", post(geodesic))
        .route("/projection", post(projection))
}

pub fn router(catalog: Arc<MeshCatalog>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .merge(routes())
        .nest("/v1", routes())
        .layer(cors)
        .with_state(catalog)
}

/// Serves until Ctrl-C.
pub async fn serve(catalog: Arc<MeshCatalog>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(catalog))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
