//! JSON bodies of the HTTP API.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use vitalcam_core::roi::{QualityAssessment, RoiMode};
use vitalcam_core::vitals::{ChannelMode, VitalsReport};

use crate::storage::{Environment, Profile, ReferenceVitals};
use crate::Error;

/// Optional `metadata` part of a process upload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessMetadata {
    /// Needed for the face-area gate of trace uploads; 640x480 when absent.
    pub frame_width: Option<usize>,
    pub frame_height: Option<usize>,
    pub roi_mode: Option<RoiMode>,
    pub channel: Option<ChannelMode>,
    pub environment: Option<Environment>,
    pub profile: Option<Profile>,
    pub ground_truth: Option<ReferenceVitals>,
    /// Echoed back unchanged so the client can compute its response time.
    pub client_timings: Option<Value>,
    /// Persist a session right away.
    pub save: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessResponse {
    pub process_id: String,
    pub report: VitalsReport,
    pub quality: QualityAssessment,
    /// Server-side wall-clock time from the start of the upload to the
    /// finished report.
    pub bp_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_timings: Option<Value>,
}

/// Body of `POST /api/v1/sessions`. Fields given here replace those sent with
/// the upload metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaveSessionRequest {
    pub process_id: String,
    #[serde(default)]
    pub ground_truth: Option<ReferenceVitals>,
    #[serde(default)]
    pub environment: Option<Environment>,
    #[serde(default)]
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaveSessionResponse {
    pub session_id: i64,
}

/// Error response: `{"error": <code>, "message": <text>, ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: json!({ "error": code, "message": message.into() }) }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "pipeline_fault", message)
    }

    /// 422 carrying the guidance for a rejected recording instead of vitals.
    pub fn rejected(process_id: &str, quality: &QualityAssessment, bp_time_s: f64) -> Self {
        let primary = quality.primary_message();
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({
                "error": "quality_rejected",
                "process_id": process_id,
                "verdict": quality.verdict,
                "message_code": primary.map(|m| m.as_str()),
                "message_codes": quality.message_codes,
                "message": primary.map(|m| m.message()),
                "quality": quality,
                "bp_time_s": bp_time_s,
            }),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        if e.is_bad_input() {
            ApiError::bad_request(e.to_string())
        } else {
            tracing::error!(error = %e, "request failed");
            ApiError::internal(e.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
