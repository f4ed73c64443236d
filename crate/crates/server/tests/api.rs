use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use hrgame::exec::{Engine, EngineConfig};
use hrgame::scenarios::Scenario;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(static_dir: Option<std::path::PathBuf>) -> Router {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let engine = Engine::new(Scenario::load_dir(&dir).unwrap(), EngineConfig::default());
    hrgame_server::router(Arc::new(engine), static_dir)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn session(app: &Router, scenario: &str, seed: u64) -> String {
    let (status, v) = call(app, Method::POST, "/api/v1/sessions", Some(json!({ "scenario": scenario, "seed": seed }))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn lists_scenarios() {
    let app = app(None);
    let (status, v) = call(&app, Method::GET, "/api/v1/scenarios", None).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["arch", "cleaning", "tictactoe"]);
}

#[tokio::test]
async fn plays_a_full_tictactoe_game() {
    let app = app(None);
    let id = session(&app, "tictactoe", 11).await;
    let (_, view) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}"), None).await;
    assert_eq!(view["controller"], "robot");
    assert_eq!(view["state"], 0);
    for _ in 0..20 {
        let (_, view) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}"), None).await;
        if view["terminal"] == true {
            let labels = view["labels"].as_array().unwrap();
            assert_eq!(labels.len(), 1, "{view}");
            return;
        }
        if view["controller"] == "robot" {
            let chosen = view["robot_actions"].as_array().unwrap().iter().find(|a| a["chosen"] == true).unwrap()["action"].clone();
            let (status, step) = call(&app, Method::POST, &format!("/api/v1/sessions/{id}/robot"), None).await;
            assert_eq!(status, StatusCode::OK, "{step}");
            assert_eq!(step["action"], chosen);
        } else {
            let (status, moves) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}/moves"), None).await;
            assert_eq!(status, StatusCode::OK);
            let first = &moves["moves"][0];
            let total: f64 = first["outcomes"].as_array().unwrap().iter().map(|o| o["probability"].as_f64().unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-9);
            let (status, step) =
                call(&app, Method::POST, &format!("/api/v1/sessions/{id}/human"), Some(json!({ "action": first["action"] }))).await;
            assert_eq!(status, StatusCode::OK, "{step}");
        }
    }
    panic!("game did not finish");
}

#[tokio::test]
async fn errors_are_documents() {
    let app = app(None);
    let (status, v) = call(&app, Method::POST, "/api/v1/sessions", Some(json!({ "scenario": "nope" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown_scenario");
    assert!(v["message"].is_string());

    let (status, v) =
        call(&app, Method::POST, "/api/v1/sessions", Some(json!({ "scenario": "tictactoe", "formula": "U p" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "synthesis_error");
    assert_eq!(v["detail"]["offset"], 0);

    let (status, v) = call(&app, Method::POST, "/api/v1/sessions", Some(json!({ "scene": "x" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "bad_request");

    let id = session(&app, "tictactoe", 1).await;
    let (status, v) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}/moves"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["code"], "not_your_turn");

    let (status, v) = call(&app, Method::GET, "/api/v1/sessions/missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown_session");

    let (status, v) = call(&app, Method::GET, "/api/v1/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "not_found");
}

#[tokio::test]
async fn same_seed_same_outcomes() {
    let app = app(None);
    let mut runs = Vec::new();
    for _ in 0..2 {
        let id = session(&app, "tictactoe", 99).await;
        let (_, step) = call(&app, Method::POST, &format!("/api/v1/sessions/{id}/robot"), None).await;
        runs.push(step["outcome"]["state"].clone());
    }
    assert_eq!(runs[0], runs[1]);
}

#[tokio::test]
async fn serves_static_files_or_placeholder() {
    let (status, body) = call(&app(None), Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("/api/v1"));

    let dir = std::env::temp_dir().join(format!("hrgame-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<h1>board</h1>").unwrap();
    let (status, body) = call(&app(Some(dir.clone())), Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "<h1>board</h1>");
    std::fs::remove_dir_all(dir).unwrap();
}
