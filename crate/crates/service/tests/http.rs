use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use concierge_core::session::Engine;
use concierge_core::EngineConfig;
use concierge_service::{router, AppState, ADMIN_TOKEN_HEADER};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const TOKEN: &str = "test-token";

fn app_with(config: EngineConfig) -> (Router, Arc<AppState>) {
    let state = AppState::new(Engine::from_config(config).unwrap()).unwrap();
    (router(state.clone()), state)
}

fn app() -> Router {
    let mut cfg = EngineConfig::default();
    cfg.server.admin_token = Some(TOKEN.into());
    app_with(cfg).0
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>, token: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(ADMIN_TOKEN_HEADER, t);
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn new_session(app: &Router, body: Option<Value>) -> String {
    let (st, v) = call(app, Method::POST, "/sessions", body, None).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

async fn say(app: &Router, id: &str, frame: &str, context: Value) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/sessions/{id}/utterances"), Some(json!({"frame": frame, "context": context})), None).await
}

#[tokio::test]
async fn fresh_session_is_quiet() {
    let app = app();
    let (st, v) = call(&app, Method::POST, "/sessions", None, None).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(v["state"], "quiet");
    assert_eq!(v["turns"], 0);
    let id = v["session_id"].as_str().unwrap();
    let (st, v) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None, None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["state"], "quiet");
    assert_eq!(v["affect"]["current"]["happy"], 0.0);
}

#[tokio::test]
async fn joyful_utterance_reports_happy() {
    let app = app();
    let id = new_session(&app, None).await;
    let (st, v) = say(&app, &id, "V(S:I, O:okonomiyaki, P:eat)", json!({})).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["previous_state"], "quiet");
    assert_eq!(v["new_state"], "happy");
    assert_eq!(v["egc"]["valence"], "pleasure");
    assert_eq!(v["emotions"][0]["emotion"], "joy");
    assert_eq!(v["groups"].as_array().unwrap().len(), 9);
    assert_eq!(v["recommendations"].as_array().unwrap().len(), 3);
    let (_, s) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None, None).await;
    assert_eq!(s["state"], "happy");
    assert_eq!(s["turns"], 1);
}

#[tokio::test]
async fn pipeline_errors_carry_codes_and_leave_state_alone() {
    let app = app();
    let id = new_session(&app, None).await;
    say(&app, &id, "V(S:I, O:okonomiyaki, P:eat)", json!({})).await;

    let (st, v) = say(&app, &id, "V(S:I, X:thing, P:go)", json!({})).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "unknown_signature");

    let (st, v) = say(&app, &id, "V(S:I, O:cake P:eat", json!({})).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "bad_case_frame");

    let (st, v) = say(&app, &id, "V(S:I, O:cake, P:eat)", json!({"prospect": "confirmed"})).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "context_error");

    let (st, v) = say(&app, &id, "V(S:I, O:cake, P:eat)", json!({"mood": "odd"})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "bad_json");

    let (_, s) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None, None).await;
    assert_eq!(s["state"], "happy");
    assert_eq!(s["turns"], 1);
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/sessions/nope/state", None, None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_session");
    let (st, v) = say(&app, "nope", "V(S:I, P:go)", json!({})).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_session");
    let (st, v) = call(&app, Method::GET, "/no/such/path", None, None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "not_found");
}

#[tokio::test]
async fn recommendations_before_any_turn_and_with_geo_filter() {
    let app = app();
    let id = new_session(&app, None).await;
    let (st, all) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None, None).await;
    assert_eq!(st, StatusCode::OK);
    let all = all.as_array().unwrap();
    assert_eq!(all.len(), 10);
    let d: Vec<f64> = all.iter().map(|r| r["emotion_distance"].as_f64().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[0] <= w[1]));

    // Within 5 km of the Dome the island shrine (about 16 km away) drops out.
    let uri = format!("/sessions/{id}/recommendations?lat=34.3955&lon=132.4536&radius_km=5");
    let (st, near) = call(&app, Method::GET, &uri, None, None).await;
    assert_eq!(st, StatusCode::OK);
    let names: Vec<&str> = near.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(!names.contains(&"Miyajima"));
    assert!(names.contains(&"Atomic Bomb Dome"));
    assert!(near.as_array().unwrap().iter().all(|r| r["distance_km"].as_f64().unwrap() <= 5.0));

    let (st, v) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?radius_km=5"), None, None).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "missing_location");
    let (st, v) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?lat=91&lon=0"), None, None).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    let (st, v) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?lat=abc"), None, None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "bad_query");
}

#[tokio::test]
async fn spots_lists_catalog() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/spots", None, None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 10);
    assert_eq!(v[0]["name"], "Miyajima");
    assert!((v[0]["profile"]["happy"].as_f64().unwrap() - 0.789).abs() < 1e-12);
}

#[tokio::test]
async fn admin_fv_requires_token_and_updates_appraisal() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/admin/fv/cake", None, None).await;
    assert_eq!(st, StatusCode::UNAUTHORIZED);
    assert_eq!(v["error"]["code"], "unauthorized");
    let (st, _) = call(&app, Method::GET, "/admin/fv/cake", None, Some("wrong")).await;
    assert_eq!(st, StatusCode::UNAUTHORIZED);

    let (st, v) = call(&app, Method::GET, "/admin/fv/cake", None, Some(TOKEN)).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["value"], 0.7);
    assert_eq!(v["provenance"], "default");

    let (st, v) = call(&app, Method::PUT, "/admin/fv/cake", Some(json!({"value": -0.9, "persona": "aya"})), Some(TOKEN)).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["provenance"], "personal");
    let (_, v) = call(&app, Method::GET, "/admin/fv/cake?persona=aya", None, Some(TOKEN)).await;
    assert_eq!(v["value"], -0.9);

    let (st, v) = call(&app, Method::PUT, "/admin/fv/cake", Some(json!({"value": 2.0})), Some(TOKEN)).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "out_of_range");

    // The persona's dislike now drives a different appraisal than the default.
    let aya = new_session(&app, Some(json!({"persona": "aya"}))).await;
    let anon = new_session(&app, None).await;
    let (_, a) = say(&app, &aya, "V(S:I, O:cake, P:eat)", json!({})).await;
    let (_, b) = say(&app, &anon, "V(S:I, O:cake, P:eat)", json!({})).await;
    assert_eq!(a["egc"]["valence"], "displeasure");
    assert_eq!(b["egc"]["valence"], "pleasure");
}

#[tokio::test]
async fn admin_disabled_without_token() {
    let (app, _) = app_with(EngineConfig::default());
    let (st, v) = call(&app, Method::GET, "/admin/fv/cake", None, Some("anything")).await;
    assert_eq!(st, StatusCode::FORBIDDEN);
    assert_eq!(v["error"]["code"], "admin_disabled");
}

#[tokio::test]
async fn interleaved_sessions_are_isolated() {
    let app = app();
    let a = new_session(&app, None).await;
    let b = new_session(&app, None).await;
    let solo = new_session(&app, None).await;
    let script_b = [
        ("V(S:I, O:okonomiyaki, P:eat)", json!({})),
        ("A(S:scenery, C:beautiful)", json!({})),
        ("V(S:I, O:souvenir, P:buy)", json!({})),
    ];
    let noise = ("V(S:I, O:wallet, P:lose)", json!({"agent": "other", "approval": "disapprove"}));
    let mut interleaved = Vec::new();
    for (f, c) in &script_b {
        say(&app, &a, noise.0, noise.1.clone()).await;
        interleaved.push(say(&app, &b, f, c.clone()).await.1);
    }
    for (i, (f, c)) in script_b.iter().enumerate() {
        let mut alone = say(&app, &solo, f, c.clone()).await.1;
        alone["session_id"] = interleaved[i]["session_id"].clone();
        assert_eq!(alone, interleaved[i], "turn {i}");
    }
    let (_, sa) = call(&app, Method::GET, &format!("/sessions/{a}/state"), None, None).await;
    let (_, sb) = call(&app, Method::GET, &format!("/sessions/{b}/state"), None, None).await;
    assert_ne!(sa["state"], sb["state"]);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_to_one_session_are_serialized() {
    let app = app();
    let id = new_session(&app, None).await;
    let mut handles = Vec::new();
    for _ in 0..16 {
        let app = app.clone();
        let id = id.clone();
        handles.push(tokio::spawn(async move { say(&app, &id, "V(S:I, O:okonomiyaki, P:eat)", json!({})).await }));
    }
    let mut turns = Vec::new();
    for h in handles {
        let (st, v) = h.await.unwrap();
        assert_eq!(st, StatusCode::OK);
        turns.push(v["turn"].as_u64().unwrap());
    }
    turns.sort();
    assert_eq!(turns, (1..=16).collect::<Vec<_>>());
}

#[tokio::test]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = EngineConfig { data_dir: Some(dir.path().to_path_buf()), ..EngineConfig::default() };
    let (app, _) = app_with(cfg.clone());
    let id = new_session(&app, None).await;
    say(&app, &id, "V(S:I, O:okonomiyaki, P:eat)", json!({})).await;
    say(&app, &id, "V(S:I, O:wallet, P:lose)", json!({"prospect": "prospective"})).await;
    let (_, before) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None, None).await;
    drop(app);

    let (app, state) = app_with(cfg);
    assert_eq!(state.session_count(), 1);
    let (st, after) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None, None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(before, after);
    // The pending fear survives too, so a confirmation resolves against it.
    let (st, v) = say(&app, &id, "V(S:I, O:wallet, P:lose)", json!({"prospect": "confirmed"})).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["emotions"][0]["emotion"], "fears-confirmed");
}
