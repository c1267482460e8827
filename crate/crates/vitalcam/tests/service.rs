mod common;

use std::path::Path;
use std::sync::Arc;

use reqwest::blocking::multipart::{Form, Part};
use reqwest::blocking::{Client, Response};
use serde_json::{json, Value};
use vitalcam::service::{BackgroundServer, ProcessResponse};
use vitalcam::video::{FrameStream, VideoDecoder};
use vitalcam::Error;
use vitalcam_core::sim::{MotionScript, SimSpec};

use common::*;

fn post_form(server: &BackgroundServer, form: Form) -> Response {
    Client::new().post(format!("{}/api/v1/process", server.url())).multipart(form).send().unwrap()
}

fn trace_form(spec: &SimSpec, metadata: Option<Value>) -> Form {
    let (csv, _) = trace_csv(spec);
    let form = Form::new().part("trace", Part::bytes(csv).file_name("trace.csv"));
    match metadata {
        Some(m) => form.text("metadata", m.to_string()),
        None => form,
    }
}

fn json_body(r: Response) -> (u16, Value) {
    let status = r.status().as_u16();
    (status, r.json().unwrap())
}

#[test]
fn trace_upload_returns_report_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    let meta = json!({ "client_timings": { "capture_started": 12.5 } });
    let (status, body) = json_body(post_form(&server, trace_form(&SimSpec::default(), Some(meta))));
    assert_eq!(status, 200, "{body}");
    let r: ProcessResponse = serde_json::from_value(body.clone()).unwrap();
    assert!((r.report.hr_bpm.value.unwrap() - 72.0).abs() <= 2.0);
    assert!(r.bp_time_s > 0.0);
    assert!(r.session_id.is_none());
    assert_eq!(body["client_timings"]["capture_started"], 12.5);
    assert_eq!(body["quality"]["verdict"], "ok");
    assert_eq!(body["report"]["sbp_mmhg"]["validity"], "uncalibrated");
    let stored = dir.path().join("uploads").join(format!("{}.csv", r.process_id));
    assert!(stored.is_file());
}

#[test]
fn processed_result_can_be_saved_and_queried() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    let (_, body) = json_body(post_form(&server, trace_form(&SimSpec::default(), None)));
    let process_id = body["process_id"].as_str().unwrap().to_owned();

    let save = json!({
        "process_id": process_id,
        "ground_truth": { "hr_bpm": 71.0, "spo2_percent": 98.0, "sbp_mmhg": 118.0, "dbp_mmhg": 76.0 },
        "environment": { "brightness": "bright", "light_type": "daylight", "activity": "relaxed" },
        "profile": { "name": "A", "age": 30, "skin_tone": "brown" }
    });
    let client = Client::new();
    let resp = client.post(format!("{}/api/v1/sessions", server.url())).json(&save).send().unwrap();
    let (status, saved) = json_body(resp);
    assert_eq!(status, 201, "{saved}");
    let id = saved["session_id"].as_i64().unwrap();

    let (status, session) = json_body(client.get(format!("{}/api/v1/sessions/{id}", server.url())).send().unwrap());
    assert_eq!(status, 200);
    assert_eq!(session["ground_truth"]["hr_bpm"], 71.0);
    assert_eq!(session["environment"]["light_type"], "daylight");
    assert_eq!(session["profile"]["skin_tone"], "brown");
    assert_eq!(session["computed"], body["report"]);

    let list = |q: &str| json_body(client.get(format!("{}/api/v1/sessions{q}", server.url())).send().unwrap());
    let (status, all) = list("");
    assert_eq!((status, all.as_array().unwrap().len()), (200, 1));
    let (_, none) = list("?to=2000-01-01T00:00:00Z");
    assert!(none.as_array().unwrap().is_empty());
    let (_, some) = list("?from=2000-01-01T00:00:00Z&to=2999-01-01T00:00:00%2B02:00");
    assert_eq!(some.as_array().unwrap().len(), 1);
}

#[test]
fn save_flag_in_metadata_stores_immediately() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    let meta = json!({ "save": true, "environment": { "brightness": "dark", "light_type": "warm_white", "activity": "post_exercise" } });
    let (status, body) = json_body(post_form(&server, trace_form(&SimSpec::default(), Some(meta))));
    assert_eq!(status, 200, "{body}");
    let id = body["session_id"].as_i64().unwrap();
    let (_, session) = json_body(Client::new().get(format!("{}/api/v1/sessions/{id}", server.url())).send().unwrap());
    assert_eq!(session["environment"]["activity"], "post_exercise");
}

#[test]
fn session_requests_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    let (_, body) = json_body(post_form(&server, trace_form(&SimSpec::default(), None)));
    let client = Client::new();
    let sessions = format!("{}/api/v1/sessions", server.url());

    let bad_enum = json!({ "process_id": body["process_id"], "environment": { "brightness": "dim", "light_type": "daylight", "activity": "relaxed" } });
    let (status, err) = json_body(client.post(&sessions).json(&bad_enum).send().unwrap());
    assert_eq!(status, 400);
    assert_eq!(err["error"], "bad_request");

    let unknown = json!({ "process_id": "no-such-id" });
    assert_eq!(client.post(&sessions).json(&unknown).send().unwrap().status(), 404);
    assert_eq!(client.post(&sessions).body("{").send().unwrap().status(), 400);

    let get = |q: &str| client.get(format!("{sessions}{q}")).send().unwrap().status().as_u16();
    assert_eq!(get("?from=yesterday"), 400);
    assert_eq!(get("?from=2030-01-01T00:00:00Z&to=2020-01-01T00:00:00Z"), 400);
    assert_eq!(get("/abc"), 400);
    assert_eq!(get("/999"), 404);
}

#[test]
fn motion_rejection_is_422_with_guidance() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    let mut spec = SimSpec::default();
    spec.geometry.motion = MotionScript::Jump { at_s: 10.0, dx: 20.0, dy: 0.0 };
    let (status, body) = json_body(post_form(&server, trace_form(&spec, None)));
    assert_eq!(status, 422);
    assert_eq!(body["error"], "quality_rejected");
    assert_eq!(body["message_code"], "too_much_motion");
    assert!(body["message"].as_str().unwrap().contains("steady"));
    assert!(body.get("report").is_none());
}

#[test]
fn small_face_area_is_rejected_as_too_far() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    // 200x240 box in a frame 25 times larger: 2% of the area.
    let meta = json!({ "frame_width": 1600, "frame_height": 1500 });
    let (status, body) = json_body(post_form(&server, trace_form(&SimSpec::default(), Some(meta))));
    assert_eq!(status, 422);
    assert_eq!(body["verdict"], "too_far");
}

#[test]
fn malformed_uploads_are_400() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(dir.path())).unwrap();
    let cases = [
        Form::new().text("metadata", "{}"),
        Form::new().part("trace", Part::bytes(b"not,a,trace\n".to_vec())),
        Form::new().part("video", Part::bytes(vec![1, 2, 3]).file_name("a.mp4")),
        Form::new().part("trace", Part::bytes(vec![])).text("metadata", "{\"roi_mode\": \"everything\"}"),
        Form::new().part("blob", Part::bytes(vec![1])),
    ];
    for form in cases {
        let (status, body) = json_body(post_form(&server, form));
        assert_eq!(status, 400, "{body}");
        assert!(body["message"].is_string());
    }
    let plain = Client::new().post(format!("{}/api/v1/process", server.url())).body("x").send().unwrap();
    assert_eq!(plain.status(), 400);
}

// Driven in-process: over a socket the server may reset the connection
// before the client finishes sending and reads the status.
#[tokio::test]
async fn oversized_payload_is_413() {
    use axum::body::Body;
    use axum::http::Request;
    use tower::ServiceExt;

    let dir = tempfile::tempdir().unwrap();
    let config = vitalcam::config::Config { max_payload_bytes: 64 * 1024, ..test_config(dir.path()) };
    let app = vitalcam::service::router(state_with(config, Arc::new(vitalcam::video::DefaultDecoder)));
    let mut body = b"--XX\r\nContent-Disposition: form-data; name=\"trace\"; filename=\"t.csv\"\r\n\r\n".to_vec();
    body.extend(std::iter::repeat_n(b'0', 256 * 1024));
    body.extend_from_slice(b"\r\n--XX--\r\n");
    let request = Request::post("/api/v1/process")
        .header("content-type", "multipart/form-data; boundary=XX")
        .body(Body::from(body))
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(response.status(), 413);
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    let json: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(json["error"], "payload_too_large");
}

#[test]
fn raw_video_upload_is_processed() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state(&dir.path().join("data"))).unwrap();
    let (video, sidecar, truth) = write_video(dir.path(), &small_video_spec(20.0, 3));
    let form = Form::new()
        .part("video", Part::bytes(std::fs::read(&video).unwrap()).file_name("clip.raw"))
        .part("annotations", Part::bytes(std::fs::read(&sidecar).unwrap()))
        .text("metadata", json!({ "roi_mode": "full_box" }).to_string());
    let (status, body) = json_body(post_form(&server, form));
    assert_eq!(status, 200, "{body}");
    let hr = body["report"]["hr_bpm"]["value"].as_f64().unwrap();
    assert!((hr - truth.hr_bpm).abs() <= 2.0, "{hr}");
    let id = body["process_id"].as_str().unwrap();
    assert!(dir.path().join(format!("data/uploads/{id}.annotations.json")).is_file());
}

struct FailingDecoder;

impl VideoDecoder for FailingDecoder {
    fn decode(&self, _: &Path) -> vitalcam::Result<FrameStream> {
        Err(Error::Decode("codec exploded".into()))
    }
}

#[test]
fn decoder_fault_is_500() {
    let dir = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(state_with(test_config(dir.path()), Arc::new(FailingDecoder))).unwrap();
    let form = Form::new()
        .part("video", Part::bytes(vec![0; 16]).file_name("v.mp4"))
        .part("annotations", Part::bytes(br#"{"frames": []}"#.to_vec()));
    let (status, body) = json_body(post_form(&server, form));
    assert_eq!(status, 500);
    assert!(body["message"].as_str().unwrap().contains("codec exploded"));
}

#[test]
fn concurrent_uploads_all_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let config = vitalcam::config::Config { workers: 2, ..test_config(dir.path()) };
    let server = BackgroundServer::start(state_with(config, Arc::new(vitalcam::video::DefaultDecoder))).unwrap();
    let statuses: Vec<(u16, f64, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = [60.0, 72.0, 90.0, 110.0, 60.0, 72.0, 90.0, 110.0]
            .into_iter()
            .enumerate()
            .map(|(i, hr)| {
                let server = &server;
                s.spawn(move || {
                    let spec = SimSpec { hr_bpm: hr, seed: i as u64, ..SimSpec::default() };
                    let (status, body) = json_body(post_form(server, trace_form(&spec, Some(json!({ "save": true })))));
                    (status, hr, body["report"]["hr_bpm"]["value"].as_f64().unwrap_or(f64::NAN))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (status, hr, got) in statuses {
        assert_eq!(status, 200);
        assert!((got - hr).abs() <= 2.0, "{hr} -> {got}");
    }
    let all: Value = Client::new().get(format!("{}/api/v1/sessions", server.url())).send().unwrap().json().unwrap();
    let ids: std::collections::BTreeSet<i64> =
        all.as_array().unwrap().iter().map(|s| s["id"].as_i64().unwrap()).collect();
    assert_eq!(ids.len(), 8);
}

#[test]
fn health_and_static_assets() {
    let dir = tempfile::tempdir().unwrap();
    let assets = dir.path().join("dist");
    std::fs::create_dir_all(&assets).unwrap();
    std::fs::write(assets.join("index.html"), "<h1>vitals</h1>").unwrap();
    let config = vitalcam::config::Config { static_dir: Some(assets), ..test_config(&dir.path().join("data")) };
    let server = BackgroundServer::start(state_with(config, Arc::new(vitalcam::video::DefaultDecoder))).unwrap();
    let get = |p: &str| Client::new().get(format!("{}{p}", server.url())).send().unwrap();
    assert_eq!(get("/health").text().unwrap(), "ok");
    assert_eq!(get("/").text().unwrap(), "<h1>vitals</h1>");
    assert_eq!(get("/missing.js").status(), 404);
}
