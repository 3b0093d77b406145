//! HTTP endpoints.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use scenesuggest_core::corpus::{identify_support_surface, locate_surface, validate_scene};
use scenesuggest_core::geometry::{to_array, vec3};
use scenesuggest_core::placement::{attachment_anchor, compose_placement, recover_spin};
use scenesuggest_core::raycast::Ray;
use scenesuggest_core::suggest::{keyword_search, ContextQuery, Placement, SuggestionEngine};
use scenesuggest_core::{AttachmentFace, Error, ModelInstance, Scene, SurfaceType, Transform};

use crate::mutation::{apply_delete, apply_insert, apply_update, Deleted, Inserted, SessionCreated, Updated};
use crate::state::{AppState, Session};

const PLACEHOLDER_PNG: &[u8] = include_bytes!("../assets/placeholder.png");
const DEFAULT_LIMIT: usize = 20;
const EXPECTED_REVISION: &str = "x-expected-revision";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    details: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), details: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    /// Maps a scene validation failure, attaching the violation list.
    fn invalid_scene(status: StatusCode, err: Error) -> Self {
        let details = match &err {
            Error::Validation { violations, .. } => Some(json!({ "violations": violations })),
            _ => None,
        };
        ApiError { status, message: err.to_string(), details }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(Value::Object(extra)) = self.details {
            body.as_object_mut().expect("object").extend(extra);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/suggest", post(suggest))
        .route("/session/{id}/expand", post(expand))
        .route("/session/{id}/objects", post(insert_object))
        .route("/session/{id}/objects/{oid}", patch(update_object).delete(delete_object))
        .route("/models", get(search_models))
        .route("/scenes/{id}/export", get(export_scene))
        .route("/thumbnails/{file}", get(thumbnail))
        .with_state(state)
}

fn thumbnail_url(model_id: &str) -> String {
    format!("/thumbnails/{model_id}.png")
}

fn session_or_404(state: &AppState, id: &str) -> ApiResult<Arc<std::sync::Mutex<Session>>> {
    state.session(id).ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))
}

fn scene_value(scene: &Scene) -> Value {
    serde_json::from_str(&scene.to_json()).expect("scene json parses")
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateSession {
    scene_type: String,
    #[serde(default)]
    scene: Option<Value>,
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: CreateSession = parse_body(&body)?;
    if req.scene_type.trim().is_empty() {
        return Err(ApiError::bad_request("sceneType must be a non-empty string"));
    }
    let scene = match req.scene {
        None => None,
        Some(v) => {
            let mut scene: Scene = serde_json::from_value(v)
                .map_err(|e| ApiError::bad_request(format!("malformed scene: {e}")))?;
            scene.scene_type = req.scene_type.clone();
            validate_scene(&scene, &state.models, Path::new("<request>"))
                .map_err(|e| ApiError::invalid_scene(StatusCode::BAD_REQUEST, e))?;
            Some(scene)
        }
    };
    let session = state.open_session(scene, &req.scene_type);
    let payload = SessionCreated { scene_type: req.scene_type, scene: scene_value(&session.scene) };
    state.log.record(&session.id, "session", serde_json::to_value(&payload).expect("payload"));
    Ok(Json(json!({ "sessionId": session.id, "revision": session.revision })))
}

async fn get_session(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let s = state.snapshot(&id).ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))?;
    Ok(Json(json!({ "sessionId": s.id, "revision": s.revision, "scene": scene_value(&s.scene) })))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SuggestRequest {
    #[serde(default)]
    ray: Option<Ray>,
    #[serde(default)]
    pos: Option<[f64; 3]>,
    #[serde(default)]
    parent_id: Option<String>,
    #[serde(default)]
    surface_normal: Option<[f64; 3]>,
    #[serde(default)]
    limit: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QueryContext {
    parent_id: String,
    parent_category: String,
    pos: [f64; 3],
    surface_normal: [f64; 3],
    surface_type: SurfaceType,
}

/// Stable id of a query: the session, its revision and the request body.
fn query_id(session_id: &str, revision: u64, body: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(session_id.as_bytes());
    h.update([0]);
    h.update(revision.to_le_bytes());
    h.update(body);
    format!("{:x}", h.finalize())[..16].to_string()
}

async fn suggest(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: SuggestRequest = parse_body(&body)?;
    let session = session_or_404(&state, &id)?;
    let s = session.lock().expect("session lock");
    let query = match (&req.ray, &req.pos, &req.parent_id, &req.surface_normal) {
        (Some(ray), None, None, None) => {
            let ray = Ray::new(vec3(ray.origin), vec3(ray.direction))
                .map_err(|e| ApiError::unprocessable(e.to_string()))?;
            ContextQuery::from_ray(&s.scene, &state.models, &ray)
                .map_err(|e| ApiError::unprocessable(e.to_string()))?
                .ok_or_else(|| ApiError::unprocessable("ray misses the scene"))?
        }
        (None, Some(pos), Some(parent), Some(normal)) => {
            if s.scene.object(parent).is_none() {
                return Err(ApiError::unprocessable(format!("parent {parent} not in scene")));
            }
            ContextQuery::new(&s.scene, &state.models, parent, vec3(*pos), vec3(*normal))
                .map_err(|e| ApiError::unprocessable(e.to_string()))?
        }
        _ => return Err(ApiError::bad_request("give either ray or pos, parentId and surfaceNormal")),
    };
    let engine = SuggestionEngine::new(&state.priors, &state.models);
    let suggestions = engine
        .suggest(&query, req.limit.unwrap_or(DEFAULT_LIMIT))
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let qid = query_id(&s.id, s.revision, &body);
    let ranked: Vec<&str> = suggestions.iter().map(|x| x.category.as_str()).collect();
    state.log.record(
        &s.id,
        "suggest",
        json!({ "queryId": qid, "revision": s.revision, "rankedCategories": ranked }),
    );
    let context = QueryContext {
        parent_id: query.parent_id.clone(),
        parent_category: query.parent_category.clone(),
        pos: to_array(&query.pos),
        surface_normal: to_array(&query.surface_normal),
        surface_type: query.surface_type,
    };
    let suggestions: Vec<Value> = suggestions
        .iter()
        .map(|x| {
            let mut v = serde_json::to_value(x).expect("suggestion");
            v["thumbnailUrl"] = json!(thumbnail_url(&x.representative_model_id));
            v
        })
        .collect();
    Ok(Json(json!({
        "queryId": qid,
        "revision": s.revision,
        "context": context,
        "suggestions": suggestions,
    })))
}

#[derive(Deserialize)]
struct ExpandRequest {
    category: String,
    placement: Placement,
}

async fn expand(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ExpandRequest = parse_body(&body)?;
    session_or_404(&state, &id)?;
    let engine = SuggestionEngine::new(&state.priors, &state.models);
    let models = engine
        .expand_category(&req.category, &req.placement)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let models: Vec<Value> = models
        .into_iter()
        .map(|(model_id, placement)| {
            json!({ "thumbnailUrl": thumbnail_url(&model_id), "modelId": model_id, "placement": placement })
        })
        .collect();
    Ok(Json(json!({ "category": req.category, "models": models })))
}

fn expected_revision(headers: &HeaderMap, from_body: Option<u64>) -> ApiResult<Option<u64>> {
    match headers.get(EXPECTED_REVISION) {
        None => Ok(from_body),
        Some(v) => v
            .to_str()
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .map(Some)
            .ok_or_else(|| ApiError::bad_request("X-Expected-Revision must be an integer")),
    }
}

fn check_revision(session: &Session, expected: Option<u64>) -> ApiResult<()> {
    match expected {
        Some(e) if e != session.revision => Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("revision conflict: expected {e}, session is at {}", session.revision),
        )),
        _ => Ok(()),
    }
}

/// Validates a mutated copy before it replaces the session scene.
fn commit(state: &AppState, session: &mut Session, scene: Scene) -> ApiResult<u64> {
    validate_scene(&scene, &state.models, Path::new("<session>"))
        .map_err(|e| ApiError::invalid_scene(StatusCode::UNPROCESSABLE_ENTITY, e))?;
    session.scene = scene;
    session.revision += 1;
    Ok(session.revision)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct InsertRequest {
    model_id: String,
    #[serde(default)]
    parent_id: Option<String>,
    #[serde(default)]
    object_id: Option<String>,
    #[serde(default)]
    placement: Option<Placement>,
    #[serde(default)]
    transform: Option<Transform>,
    #[serde(default)]
    expected_revision: Option<u64>,
    #[serde(default)]
    selection: Option<Value>,
}

fn fresh_id(scene: &Scene, category: &str) -> String {
    (1..)
        .map(|n| format!("{category}_{n}"))
        .find(|id| scene.object(id).is_none())
        .expect("unbounded range")
}

async fn insert_object(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let req: InsertRequest = parse_body(&body)?;
    let expected = expected_revision(&headers, req.expected_revision)?;
    let session = session_or_404(&state, &id)?;
    let mut s = session.lock().expect("session lock");
    check_revision(&s, expected)?;

    let meta = state
        .models
        .get(&req.model_id)
        .ok_or_else(|| ApiError::unprocessable(format!("unknown model {}", req.model_id)))?;
    let transform = match (&req.placement, &req.transform) {
        (Some(p), None) => p.transform,
        (None, Some(t)) => *t,
        _ => return Err(ApiError::bad_request("give exactly one of placement or transform")),
    };
    let object_id = match req.object_id {
        Some(oid) if s.scene.object(&oid).is_some() => {
            return Err(ApiError::unprocessable(format!("object id {oid} already in use")));
        }
        Some(oid) => oid,
        None => fresh_id(&s.scene, &meta.category),
    };
    let object = ModelInstance {
        id: object_id.clone(),
        model_id: req.model_id.clone(),
        transform,
        parent_id: req.parent_id.clone(),
        is_architecture: req.parent_id.is_none(),
    };
    match &req.parent_id {
        Some(pid) => {
            let parent = s
                .scene
                .object(pid)
                .ok_or_else(|| ApiError::unprocessable(format!("parent {pid} not in scene")))?;
            let contact = identify_support_surface(&object, parent, &state.models)
                .map_err(|e| ApiError::unprocessable(e.to_string()))?;
            if contact.low_confidence {
                return Err(ApiError::unprocessable(format!(
                    "object {object_id} does not rest on a surface of {pid}"
                )));
            }
        }
        None if !s.scene.objects.is_empty() => {
            return Err(ApiError::unprocessable("parentId is required unless the scene is empty"));
        }
        None => {}
    }

    let mut m = Inserted { object, parent_id: req.parent_id, revision: 0, selection: req.selection };
    let mut scene = s.scene.clone();
    apply_insert(&mut scene, &m);
    m.revision = commit(&state, &mut s, scene)?;
    state.log.record(&s.id, "insert", serde_json::to_value(&m).expect("payload"));
    Ok(Json(json!({ "revision": m.revision, "object": m.object })))
}

#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
enum UpdateRequest {
    #[serde(rename_all = "camelCase")]
    Move {
        anchor: [f64; 3],
        #[serde(default)]
        parent_id: Option<String>,
        #[serde(default)]
        expected_revision: Option<u64>,
    },
    #[serde(rename_all = "camelCase")]
    Rotate {
        alpha: f64,
        #[serde(default)]
        expected_revision: Option<u64>,
    },
}

/// Ids of everything `id` transitively supports.
fn descendants(scene: &Scene, id: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![id.to_string()];
    while let Some(cur) = stack.pop() {
        for c in scene.children_of(&cur) {
            out.push(c.id.clone());
            stack.push(c.id.clone());
        }
    }
    out
}

async fn update_object(
    State(state): State<Arc<AppState>>,
    UrlPath((id, oid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let req: UpdateRequest = parse_body(&body)?;
    let from_body = match &req {
        UpdateRequest::Move { expected_revision, .. } | UpdateRequest::Rotate { expected_revision, .. } => {
            *expected_revision
        }
    };
    let expected = expected_revision(&headers, from_body)?;
    let session = session_or_404(&state, &id)?;
    let mut s = session.lock().expect("session lock");
    check_revision(&s, expected)?;

    let object = s.scene.object(&oid).ok_or_else(|| ApiError::not_found(format!("unknown object {oid}")))?;
    let meta = state
        .models
        .get(&object.model_id)
        .ok_or_else(|| ApiError::unprocessable(format!("unknown model {}", object.model_id)))?;
    let current_parent = s
        .scene
        .parent_of(&oid)
        .ok_or_else(|| ApiError::unprocessable(format!("object {oid} has no support parent")))?
        .to_string();
    let parent = s.scene.object(&current_parent).expect("valid scene");
    let contact = identify_support_surface(object, parent, &state.models)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let face: AttachmentFace = contact.face;

    let (op, parent_id, new_transform) = match req {
        UpdateRequest::Move { anchor, parent_id, .. } => {
            let parent_id = parent_id.unwrap_or(current_parent);
            if parent_id == oid || descendants(&s.scene, &oid).contains(&parent_id) {
                return Err(ApiError::unprocessable(format!("{parent_id} cannot support {oid}")));
            }
            let new_parent = s
                .scene
                .object(&parent_id)
                .ok_or_else(|| ApiError::unprocessable(format!("parent {parent_id} not in scene")))?;
            let anchor = vec3(anchor);
            let surface = locate_surface(new_parent, &state.models, &anchor, 1e-3).ok_or_else(|| {
                ApiError::unprocessable(format!("anchor is not on a support surface of {parent_id}"))
            })?;
            let alpha = recover_spin(&object.transform, meta, face, &contact.normal)
                .map_err(|e| ApiError::unprocessable(e.to_string()))?;
            let t = compose_placement(&anchor, &surface.normal, face, alpha, meta)
                .map_err(|e| ApiError::unprocessable(e.to_string()))?;
            ("move", parent_id, t)
        }
        UpdateRequest::Rotate { alpha, .. } => {
            if !alpha.is_finite() {
                return Err(ApiError::unprocessable("alpha must be finite"));
            }
            let anchor = attachment_anchor(&object.transform, meta, face);
            let t = compose_placement(&anchor, &contact.normal, face, alpha, meta)
                .map_err(|e| ApiError::unprocessable(e.to_string()))?;
            ("rotate", current_parent, t)
        }
    };

    let delta = new_transform.compose(&object.transform.inverse());
    let mut transforms = BTreeMap::new();
    transforms.insert(oid.clone(), new_transform);
    for d in descendants(&s.scene, &oid) {
        let t = s.scene.object(&d).expect("descendant exists").transform;
        transforms.insert(d, delta.compose(&t));
    }
    let mut m = Updated { object_id: oid, parent_id, transforms, revision: 0 };
    let mut scene = s.scene.clone();
    apply_update(&mut scene, &m);
    m.revision = commit(&state, &mut s, scene)?;
    state.log.record(&s.id, op, serde_json::to_value(&m).expect("payload"));
    Ok(Json(json!({ "revision": m.revision, "objectId": m.object_id, "parentId": m.parent_id, "transforms": m.transforms })))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RevisionQuery {
    #[serde(default)]
    expected_revision: Option<u64>,
}

async fn delete_object(
    State(state): State<Arc<AppState>>,
    UrlPath((id, oid)): UrlPath<(String, String)>,
    Query(q): Query<RevisionQuery>,
    headers: HeaderMap,
) -> ApiResult<Json<Value>> {
    let expected = expected_revision(&headers, q.expected_revision)?;
    let session = session_or_404(&state, &id)?;
    let mut s = session.lock().expect("session lock");
    check_revision(&s, expected)?;
    if s.scene.object(&oid).is_none() {
        return Err(ApiError::not_found(format!("unknown object {oid}")));
    }
    let mut scene = s.scene.clone();
    let mut m = Deleted { object_id: oid, removed: Vec::new(), revision: 0 };
    m.removed = apply_delete(&mut scene, &m);
    m.revision = commit(&state, &mut s, scene)?;
    state.log.record(&s.id, "delete", serde_json::to_value(&m).expect("payload"));
    Ok(Json(json!({ "revision": m.revision, "removed": m.removed })))
}

#[derive(Deserialize)]
struct SearchQuery {
    #[serde(default)]
    q: String,
    #[serde(default)]
    limit: Option<usize>,
    #[serde(default)]
    session: Option<String>,
}

async fn search_models(State(state): State<Arc<AppState>>, Query(q): Query<SearchQuery>) -> ApiResult<Json<Value>> {
    if let Some(sid) = &q.session {
        session_or_404(&state, sid)?;
    }
    let hits = keyword_search(&state.models, &q.q, q.limit.unwrap_or(DEFAULT_LIMIT));
    let results: Vec<Value> = hits
        .iter()
        .map(|h| {
            let meta = state.models.get(&h.model_id).expect("hit from model db");
            json!({
                "modelId": h.model_id,
                "category": h.category,
                "name": meta.name,
                "score": h.score,
                "thumbnailUrl": thumbnail_url(&h.model_id),
            })
        })
        .collect();
    let ids: Vec<&str> = hits.iter().map(|h| h.model_id.as_str()).collect();
    state.log.record(q.session.as_deref().unwrap_or(""), "search", json!({ "q": q.q, "results": ids }));
    Ok(Json(json!({ "results": results })))
}

async fn export_scene(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let s = state.snapshot(&id).ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], s.scene.to_json()).into_response())
}

async fn thumbnail(State(state): State<Arc<AppState>>, UrlPath(file): UrlPath<String>) -> ApiResult<Response> {
    let model_id = file
        .strip_suffix(".png")
        .filter(|m| state.models.get(m).is_some())
        .ok_or_else(|| ApiError::not_found(format!("no thumbnail {file}")))?;
    log::debug!("placeholder thumbnail for {model_id}");
    Ok(([(header::CONTENT_TYPE, "image/png")], PLACEHOLDER_PNG).into_response())
}
