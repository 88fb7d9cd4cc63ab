#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use gddforge::api::{router, AppState};
use gddforge_core::config::{Config, Resources};
use gddforge_core::generate::{generate_all, MockBackend};
use gddforge_core::ingest::{load_document, DocFormat, DocumentInput};

const BOUNDARY: &str = "gddforge-test-boundary";

pub fn core_fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

pub fn platformer() -> Vec<u8> {
    std::fs::read(core_fixture("gdd/platformer.md")).unwrap()
}

pub struct Harness {
    pub data_dir: PathBuf,
    pub state: Arc<AppState>,
    app: Router,
}

impl Harness {
    pub fn open(data_dir: &Path, token: Option<&str>) -> Self {
        let config = Config {
            data_dir: data_dir.to_path_buf(),
            ..Config::default()
        };
        let mut state = AppState::new(config).unwrap();
        state.token = token.map(str::to_string);
        let state = Arc::new(state);
        let app = router(state.clone());
        Self {
            data_dir: data_dir.to_path_buf(),
            state,
            app,
        }
    }

    pub async fn send(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, bytes)
    }

    pub async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(v) => {
                req = req.header(header::CONTENT_TYPE, "application/json");
                Body::from(v.to_string())
            }
            None => Body::empty(),
        };
        let (status, bytes) = self.send(req.body(body).unwrap()).await;
        let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, value)
    }

    pub async fn upload(&self, name: &str, bytes: &[u8]) -> (StatusCode, Value) {
        let mut body = format!(
            "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"document\"; filename=\"{name}\"\r\n\
             Content-Type: application/octet-stream\r\n\r\n"
        )
        .into_bytes();
        body.extend_from_slice(bytes);
        body.extend_from_slice(format!("\r\n--{BOUNDARY}--\r\n").as_bytes());
        let req = Request::post("/jobs?wait=true")
            .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={BOUNDARY}"))
            .body(Body::from(body))
            .unwrap();
        let (status, bytes) = self.send(req).await;
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    pub async fn spec_ready_job(&self) -> String {
        let (status, job) = self.upload("platformer.md", &platformer()).await;
        assert_eq!(status, StatusCode::CREATED, "{job}");
        assert_eq!(job["state"], "spec_ready");
        job["job_id"].as_str().unwrap().to_string()
    }

    pub async fn job(&self, id: &str) -> Value {
        self.call(Method::GET, &format!("/jobs/{id}"), None).await.1
    }

    pub async fn state_of(&self, id: &str) -> String {
        self.job(id).await["state"].as_str().unwrap().to_string()
    }
}

pub const STATES: &[&str] = &[
    "ingested",
    "spec_ready",
    "plan_ready",
    "generating",
    "validated",
    "packaged",
    "failed",
];

/// Drives a fresh job to `target` through the store.
pub fn job_in(state: &AppState, target: &str) -> String {
    let res = Resources::default();
    let store = &state.store;
    let doc = load_document(DocumentInput::upload(&platformer(), Some("p.md".into())), DocFormat::Md, None).unwrap();
    let id = store.create(&doc).unwrap().job_id;
    if target == "ingested" {
        return id;
    }
    store.extract(&id, &res, None).unwrap();
    if target == "spec_ready" {
        return id;
    }
    store.plan(&id, &res).unwrap();
    if target == "plan_ready" {
        return id;
    }
    let (spec, plan) = store.begin_generation(&id).unwrap();
    if target == "generating" {
        return id;
    }
    if target == "failed" {
        let report = generate_all(&spec, &plan, &MockBackend::new().failing(&["GameManager"]), 2);
        assert!(store.finish_generation(&id, report, "mock", &res).is_err());
        return id;
    }
    let report = generate_all(&spec, &plan, &MockBackend::new(), 2);
    store.finish_generation(&id, report, "mock", &res).unwrap();
    if target == "validated" {
        return id;
    }
    store.package(&id, "first").unwrap();
    id
}

pub struct Probe {
    pub method: Method,
    pub path: &'static str,
    pub allowed: &'static [&'static str],
}

pub const PROBES: &[Probe] = &[
    Probe {
        method: Method::GET,
        path: "spec",
        allowed: &["spec_ready", "plan_ready", "generating", "validated", "packaged", "failed"],
    },
    Probe {
        method: Method::PUT,
        path: "spec",
        allowed: &["spec_ready", "plan_ready", "validated", "packaged", "failed"],
    },
    Probe {
        method: Method::POST,
        path: "plan",
        allowed: &["spec_ready", "plan_ready"],
    },
    Probe {
        method: Method::GET,
        path: "plan",
        allowed: &["plan_ready", "generating", "validated", "packaged", "failed"],
    },
    Probe {
        method: Method::PATCH,
        path: "plan/selection",
        allowed: &["plan_ready"],
    },
    Probe {
        method: Method::POST,
        path: "generate",
        allowed: &["plan_ready", "failed"],
    },
    Probe {
        method: Method::GET,
        path: "scripts",
        allowed: &["validated", "packaged"],
    },
    Probe {
        method: Method::GET,
        path: "reports",
        allowed: &["validated", "packaged"],
    },
    Probe {
        method: Method::POST,
        path: "package",
        allowed: &["validated", "packaged"],
    },
    Probe {
        method: Method::GET,
        path: "package",
        allowed: &["packaged"],
    },
];

/// Calls every probed endpoint on a fresh job in every state. Returns the
/// number of out-of-order calls that were rejected.
pub async fn probe_all_states(h: &Harness) -> Result<usize, String> {
    let reference = job_in(&h.state, "spec_ready");
    let spec = serde_json::to_value(h.state.store.spec(&reference).unwrap()).unwrap();
    let mut rejected = 0;
    for state in STATES {
        for probe in PROBES {
            let st = h.state.clone();
            let target = state.to_string();
            let id = tokio::task::spawn_blocking(move || job_in(&st, &target)).await.unwrap();
            if h.state_of(&id).await != *state {
                return Err(format!("could not reach {state}"));
            }
            let body = match probe.path {
                "spec" if probe.method == Method::PUT => Some(spec.clone()),
                "plan/selection" => Some(json!({ "script_id": "game_manager", "selected": false })),
                "generate" => Some(json!({ "wait": true })),
                "package" if probe.method == Method::POST => Some(json!({ "out_name": "second" })),
                _ => None,
            };
            let uri = format!("/jobs/{id}/{}", probe.path);
            let (status, resp) = h.call(probe.method.clone(), &uri, body).await;
            let label = format!("{} {} in {state}", probe.method, probe.path);
            if probe.allowed.contains(state) {
                if !status.is_success() {
                    return Err(format!("{label}: {status} {resp}"));
                }
            } else {
                if status != StatusCode::CONFLICT || resp["error"]["code"] != "WrongState" {
                    return Err(format!("{label}: expected 409, got {status} {resp}"));
                }
                if h.state_of(&id).await != *state {
                    return Err(format!("{label} changed state"));
                }
                rejected += 1;
            }
        }
    }
    Ok(rejected)
}

/// Leaves a job in `generating`, reopens the store as after a crash and
/// checks that the job comes back failed and resumable and can be finished.
pub async fn crash_recovery(data_dir: &Path) -> Result<(), String> {
    let id = {
        let h = Harness::open(data_dir, None);
        let id = job_in(&h.state, "generating");
        if h.state_of(&id).await != "generating" {
            return Err("job did not reach generating".into());
        }
        id
    };
    let h = Harness::open(data_dir, None);
    let job = h.job(&id).await;
    if job["state"] != "failed" || job["resumable"] != true || job["failed_from"] != "generating" {
        return Err(format!("after restart: {job}"));
    }
    let (status, body) = h.call(Method::GET, &format!("/jobs/{id}/scripts"), None).await;
    if status != StatusCode::CONFLICT {
        return Err(format!("scripts readable after crash: {status} {body}"));
    }
    let (status, body) = h
        .call(Method::POST, &format!("/jobs/{id}/generate"), Some(json!({ "wait": true })))
        .await;
    if status != StatusCode::OK || body["state"] != "validated" {
        return Err(format!("resume failed: {status} {body}"));
    }
    Ok(())
}
