use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::multipart::{MultipartError, MultipartRejection};
use axum::extract::{Multipart, Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use chrono::{DateTime, Utc};
use uuid::Uuid;

use super::api::{ApiError, ProcessMetadata, ProcessResponse, SaveSessionRequest, SaveSessionResponse};
use super::{AppState, PendingResult};
use crate::formats::{read_trace, AnnotationSidecar};
use crate::pipeline::{analyze_trace, analyze_video, Analysis, PipelineConfig, DEFAULT_FRAME_SIZE};
use crate::storage::SessionRecord;
use crate::{Error, Result};

pub(super) async fn health() -> &'static str {
    "ok"
}

#[derive(Default)]
struct Upload {
    trace: Option<Bytes>,
    video: Option<(Bytes, String)>,
    annotations: Option<Bytes>,
    metadata: Option<Bytes>,
}

enum Payload {
    Trace(Bytes),
    Video { bytes: Bytes, extension: String, sidecar: AnnotationSidecar },
}

fn multipart_error(e: MultipartError) -> ApiError {
    let status = e.status();
    let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "payload_too_large" } else { "bad_request" };
    ApiError::new(status, code, e.body_text())
}

fn once<T>(slot: &mut Option<T>, value: T, name: &str) -> Result<(), ApiError> {
    if slot.replace(value).is_some() {
        return Err(ApiError::bad_request(format!("field `{name}` given twice")));
    }
    Ok(())
}

/// Keeps only a short alphanumeric extension from the client's file name.
fn video_extension(file_name: Option<&str>) -> String {
    file_name
        .and_then(|n| std::path::Path::new(n).extension())
        .and_then(|e| e.to_str())
        .filter(|e| !e.is_empty() && e.len() <= 8 && e.chars().all(|c| c.is_ascii_alphanumeric()))
        .map_or_else(|| "video".to_owned(), str::to_ascii_lowercase)
}

async fn read_upload(mut multipart: Multipart) -> Result<Upload, ApiError> {
    let mut upload = Upload::default();
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        let name = field.name().unwrap_or_default().to_owned();
        let extension = video_extension(field.file_name());
        let data = field.bytes().await.map_err(multipart_error)?;
        match name.as_str() {
            "trace" => once(&mut upload.trace, data, &name)?,
            "video" => once(&mut upload.video, (data, extension), &name)?,
            "annotations" => once(&mut upload.annotations, data, &name)?,
            "metadata" => once(&mut upload.metadata, data, &name)?,
            other => return Err(ApiError::bad_request(format!("unexpected field `{other}`"))),
        }
    }
    Ok(upload)
}

fn classify(upload: Upload) -> Result<(Payload, ProcessMetadata), ApiError> {
    let metadata = match &upload.metadata {
        Some(bytes) => serde_json::from_slice::<ProcessMetadata>(bytes)
            .map_err(|e| ApiError::bad_request(format!("metadata: {e}")))?,
        None => ProcessMetadata::default(),
    };
    let payload = match (upload.trace, upload.video, upload.annotations) {
        (Some(_), Some(_), _) => return Err(ApiError::bad_request("send either `trace` or `video`, not both")),
        (Some(_), None, Some(_)) => return Err(ApiError::bad_request("`annotations` only accompany a `video`")),
        (Some(bytes), None, None) => Payload::Trace(bytes),
        (None, Some(_), None) => return Err(ApiError::bad_request("a `video` needs its `annotations` sidecar")),
        (None, Some((bytes, extension)), Some(ann)) => {
            let sidecar = AnnotationSidecar::from_json(&ann).map_err(ApiError::from)?;
            Payload::Video { bytes, extension, sidecar }
        }
        (None, None, _) => return Err(ApiError::bad_request("missing `trace` or `video` field")),
    };
    if metadata.frame_width.is_some() != metadata.frame_height.is_some() {
        return Err(ApiError::bad_request("give both frame_width and frame_height or neither"));
    }
    Ok((payload, metadata))
}

/// Stores the payload under the upload directory and runs the pipeline.
fn run(state: &AppState, id: &str, payload: Payload, metadata: &ProcessMetadata) -> Result<(String, Analysis)> {
    let mut config: PipelineConfig = (*state.pipeline).clone();
    if let Some(mode) = metadata.roi_mode {
        config.roi_mode = mode;
    }
    if let Some(channel) = metadata.channel {
        config.vitals.channel_mode = channel;
    }
    let dir = state.config.upload_dir();
    let write = |path: &PathBuf, bytes: &[u8]| std::fs::write(path, bytes).map_err(|e| Error::io(path, e));
    match payload {
        Payload::Trace(bytes) => {
            let filename = format!("{id}.csv");
            write(&dir.join(&filename), &bytes)?;
            let trace = read_trace(&bytes[..])?;
            let size = match (metadata.frame_width, metadata.frame_height) {
                (Some(w), Some(h)) => (w, h),
                _ => DEFAULT_FRAME_SIZE,
            };
            Ok((filename, analyze_trace(&trace, size, &config)?))
        }
        Payload::Video { bytes, extension, sidecar } => {
            let filename = format!("{id}.{extension}");
            let path = dir.join(&filename);
            write(&path, &bytes)?;
            let sidecar_json = serde_json::to_vec(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
            write(&dir.join(format!("{id}.annotations.json")), &sidecar_json)?;
            Ok((filename, analyze_video(&path, &sidecar, state.decoder.as_ref(), &config)?))
        }
    }
}

pub(super) async fn process(
    State(state): State<AppState>,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<Json<ProcessResponse>, ApiError> {
    let started = Instant::now();
    let multipart = multipart.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let (payload, metadata) = classify(read_upload(multipart).await?)?;
    let id = Uuid::new_v4().to_string();

    let permit = state.workers.clone().acquire_owned().await.map_err(|e| ApiError::internal(e.to_string()))?;
    let (job_state, job_id, job_meta) = (state.clone(), id.clone(), metadata.clone());
    let (filename, analysis) = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        run(&job_state, &job_id, payload, &job_meta)
    })
    .await
    .map_err(|e| ApiError::internal(format!("pipeline task failed: {e}")))??;
    let bp_time_s = started.elapsed().as_secs_f64();

    let Some(report) = analysis.report else {
        return Err(ApiError::rejected(&id, &analysis.quality, bp_time_s));
    };
    let pending = PendingResult {
        timestamp: Utc::now(),
        filename,
        report,
        environment: metadata.environment,
        profile: metadata.profile.clone(),
        ground_truth: metadata.ground_truth,
    };
    let session_id = if metadata.save { Some(save(&state, pending.clone()).await?) } else { None };
    state.results.lock().expect("result cache poisoned").insert(id.clone(), pending);
    Ok(Json(ProcessResponse {
        process_id: id,
        report,
        quality: analysis.quality,
        bp_time_s,
        session_id,
        client_timings: metadata.client_timings,
    }))
}

async fn save(state: &AppState, p: PendingResult) -> Result<i64, ApiError> {
    let record = SessionRecord {
        id: None,
        timestamp: p.timestamp,
        filename: p.filename,
        computed: p.report,
        ground_truth: p.ground_truth,
        environment: p.environment,
        profile: p.profile,
    };
    record.validate()?;
    let store = state.store.clone();
    let id = tokio::task::spawn_blocking(move || store.save_session(&record))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(id)
}

pub(super) async fn save_session(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: SaveSessionRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("session body: {e}")))?;
    let pending = state
        .results
        .lock()
        .expect("result cache poisoned")
        .get(&req.process_id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no processed result `{}`", req.process_id)))?;
    let merged = PendingResult {
        environment: req.environment.or(pending.environment),
        profile: req.profile.or(pending.profile.clone()),
        ground_truth: req.ground_truth.or(pending.ground_truth),
        ..pending
    };
    let session_id = save(&state, merged).await?;
    Ok((StatusCode::CREATED, Json(SaveSessionResponse { session_id })))
}

fn parse_bound(query: &HashMap<String, String>, key: &str) -> Result<Option<DateTime<Utc>>, ApiError> {
    query
        .get(key)
        .map(|v| {
            DateTime::parse_from_rfc3339(v)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|e| ApiError::bad_request(format!("`{key}` is not an RFC 3339 time: {e}")))
        })
        .transpose()
}

pub(super) async fn list_sessions(
    State(state): State<AppState>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<Vec<SessionRecord>>, ApiError> {
    let (from, to) = (parse_bound(&query, "from")?, parse_bound(&query, "to")?);
    if let (Some(f), Some(t)) = (from, to) {
        if f > t {
            return Err(ApiError::bad_request("`from` is after `to`"));
        }
    }
    let store = state.store.clone();
    let sessions = tokio::task::spawn_blocking(move || store.list_sessions(from, to))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(sessions))
}

pub(super) async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionRecord>, ApiError> {
    let id: i64 = id.parse().map_err(|_| ApiError::bad_request(format!("`{id}` is not a session id")))?;
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || store.load_session(id))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extensions_are_sanitized() {
        assert_eq!(video_extension(Some("clip.MP4")), "mp4");
        assert_eq!(video_extension(Some("../../etc/passwd")), "video");
        assert_eq!(video_extension(Some("a.tar.g$z")), "video");
        assert_eq!(video_extension(None), "video");
    }

    #[test]
    fn trace_and_video_together_are_rejected() {
        let upload = Upload {
            trace: Some(Bytes::from_static(b"x")),
            video: Some((Bytes::from_static(b"y"), "raw".into())),
            ..Upload::default()
        };
        let err = classify(upload).err().unwrap();
        assert_eq!(err.status, StatusCode::BAD_REQUEST);
    }

    #[test]
    fn half_a_frame_size_is_rejected() {
        let upload = Upload {
            trace: Some(Bytes::from_static(b"x")),
            metadata: Some(Bytes::from_static(br#"{"frame_width": 64}"#)),
            ..Upload::default()
        };
        assert_eq!(classify(upload).err().unwrap().status, StatusCode::BAD_REQUEST);
    }
}
