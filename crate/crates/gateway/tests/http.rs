use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use fairq_core::{build_panel, Bundle, Instance, QuerySource};
use fairq_gateway::{router, SessionService};
use fairq_protocols::{run_protocol, ProtocolId, ProtocolOptions};
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

struct Client {
    app: axum::Router,
}

impl Client {
    fn new() -> Self {
        Client { app: router(Arc::new(SessionService::in_memory())) }
    }

    fn over(svc: SessionService) -> Self {
        Client { app: router(Arc::new(svc)) }
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Json>) -> (StatusCode, Json) {
        let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
        let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let json = if bytes.is_empty() { Json::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, json)
    }

    async fn create(&self, body: Json) -> (StatusCode, Json) {
        self.call("POST", "/sessions", Some(body)).await
    }

    async fn answer(&self, id: &str, agent: usize, value: Json) -> (StatusCode, Json) {
        self.call("POST", &format!("/sessions/{id}/answers"), Some(json!({ "agent": agent, "value": value }))).await
    }
}

fn six_labels() -> Vec<&'static str> {
    vec!["apple", "book", "cup", "desk", "ear", "fan"]
}

fn pending(state: &Json) -> Option<(usize, Bundle)> {
    let p = &state["pending"];
    if p.is_null() {
        return None;
    }
    let goods: Vec<usize> = serde_json::from_value(p["goods"].clone()).unwrap();
    Some((p["agent"].as_u64().unwrap() as usize, Bundle::from_indices(&goods).unwrap()))
}

/// Answers every pending query from `inst`, through HTTP.
async fn drive(c: &Client, id: &str, inst: &Instance) -> usize {
    let mut panel = build_panel(inst).unwrap();
    let mut answered = 0;
    loop {
        let (_, state) = c.call("GET", &format!("/sessions/{id}"), None).await;
        let Some((agent, bundle)) = pending(&state) else { return answered };
        let v = panel.query(agent, &bundle).unwrap();
        let (status, _) = c.answer(id, agent, json!(v.to_string())).await;
        assert_eq!(status, StatusCode::OK);
        answered += 1;
    }
}

#[tokio::test]
async fn two_agent_session_matches_in_memory_run() {
    let c = Client::new();
    let (status, created) = c.create(json!({ "n": 2, "m": 6, "labels": six_labels(), "protocol": "two_agent_ef1" })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["agent_links"].as_array().unwrap().len(), 2);
    let id = created["id"].as_str().unwrap().to_string();
    let (agent, first) = pending(&created).unwrap();
    assert_eq!(agent, 0);
    let idx = first.to_indices();
    assert!(!idx.is_empty() && idx == (0..idx.len()).collect::<Vec<_>>(), "first query is a prefix: {idx:?}");
    assert!(created["pending"]["prompt"].as_str().unwrap().contains("apple"));

    let inst = Instance::additive(&[vec![1; 6], vec![1; 6]]).unwrap();
    let answered = drive(&c, &id, &inst).await;
    assert!(answered <= 10);

    let direct = run_protocol(ProtocolId::TwoAgentEf1, &mut build_panel(&inst).unwrap(), &ProtocolOptions::default()).unwrap();
    let (status, result) = c.call("GET", &format!("/sessions/{id}/result"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(result["allocation"], serde_json::to_value(&direct).unwrap());
    assert_eq!(result["queries"].as_u64().unwrap() as usize, answered);
    let per: Vec<usize> = serde_json::from_value(result["per_agent"].clone()).unwrap();
    assert_eq!(per.iter().sum::<usize>(), answered);
    let mut all: Vec<u64> = result["allocation"]["bundles"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|b| b.as_array().unwrap().iter().map(|g| g.as_u64().unwrap()))
        .collect();
    all.sort();
    assert_eq!(all, (0..6).collect::<Vec<_>>());
    assert_eq!(result["bundle_labels"].as_array().unwrap().len(), 2);

    let (status, body) = c.answer(&id, 0, json!("1")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "session_completed");
}

#[tokio::test]
async fn zero_goods_complete_immediately() {
    let c = Client::new();
    let (status, created) = c.create(json!({ "n": 3, "m": 0, "protocol": "three_additive_ef1" })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["status"], "completed");
    let id = created["id"].as_str().unwrap();
    let (_, result) = c.call("GET", &format!("/sessions/{id}/result"), None).await;
    assert_eq!(result["allocation"]["bundles"], json!([[], [], []]));
    assert_eq!(result["queries"], 0);
}

#[tokio::test]
async fn contract_violations_are_400() {
    let c = Client::new();
    let (status, body) = c.create(json!({ "n": 2, "m": 5, "protocol": "three_additive_ef1" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "unsupported");
    let (status, _) = c.create(json!({ "n": 2, "m": 3, "labels": ["a"], "protocol": "two_agent_ef1" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c.create(json!({ "n": 2, "m": 3, "protocol": "nope" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c.create(json!({ "n": 3, "m": 5, "protocol": "separate_designated_goods" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c.call("POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn bad_answers_leave_the_session_alone() {
    let c = Client::new();
    let (_, created) = c.create(json!({ "n": 2, "m": 6, "protocol": "two_agent_ef1" })).await;
    let id = created["id"].as_str().unwrap().to_string();
    let before = c.call("GET", &format!("/sessions/{id}"), None).await.1;

    let (status, body) = c.answer(&id, 1, json!("1")).await;
    assert_eq!((status, body["error"].as_str().unwrap()), (StatusCode::CONFLICT, "not_your_turn"));
    let (status, body) = c.answer(&id, 0, json!("-1")).await;
    assert_eq!((status, body["error"].as_str().unwrap()), (StatusCode::BAD_REQUEST, "invalid_value"));
    let (status, _) = c.answer(&id, 0, json!(-3)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c.answer(&id, 0, json!("1/0")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c.answer(&id, 7, json!("1")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(c.call("GET", &format!("/sessions/{id}"), None).await.1, before);
}

#[tokio::test]
async fn superset_worth_less_is_rejected() {
    let c = Client::new();
    let (_, created) = c.create(json!({ "n": 2, "m": 6, "protocol": "two_agent_ef1" })).await;
    let id = created["id"].as_str().unwrap().to_string();
    let mut seen: Vec<(Bundle, u64)> = Vec::new();
    // walk the run with values = 10 * |S| until agent 0 is asked about a
    // set comparable with one it already valued
    for _ in 0..20 {
        let (_, state) = c.call("GET", &format!("/sessions/{id}"), None).await;
        let Some((agent, bundle)) = pending(&state) else { break };
        if agent == 0 {
            if let Some((prior, v)) = seen.iter().find(|(p, _)| p.is_subset(&bundle) && *p != bundle) {
                let (status, body) = c.answer(&id, 0, json!((v - 1).to_string())).await;
                assert_eq!(status, StatusCode::BAD_REQUEST, "{prior:?}");
                assert_eq!(body["error"], "inconsistent_answer");
                assert!(body["message"].as_str().unwrap().contains("subset"));
                let after = c.call("GET", &format!("/sessions/{id}"), None).await.1;
                assert_eq!(after, state);
                return;
            }
            if let Some((prior, v)) = seen.iter().find(|(p, _)| bundle.is_subset(p) && *p != bundle) {
                let (status, body) = c.answer(&id, 0, json!((v + 1).to_string())).await;
                assert_eq!(status, StatusCode::BAD_REQUEST, "{prior:?}");
                assert_eq!(body["error"], "inconsistent_answer");
                return;
            }
        }
        let v = 10 * bundle.len() as u64;
        if agent == 0 {
            seen.push((bundle, v));
        }
        assert_eq!(c.answer(&id, agent, json!(v)).await.0, StatusCode::OK);
    }
    panic!("agent 0 was never asked two comparable sets");
}

#[tokio::test]
async fn agent_views_are_private() {
    let c = Client::new();
    let (_, created) = c.create(json!({ "n": 2, "m": 6, "protocol": "two_agent_ef1" })).await;
    let id = created["id"].as_str().unwrap().to_string();
    let secret = "12345/7";
    let (_, v0) = c.call("GET", &format!("/sessions/{id}/agents/0"), None).await;
    assert_eq!(v0["status"], "your_turn");
    let (_, v1) = c.call("GET", &format!("/sessions/{id}/agents/1"), None).await;
    assert_eq!(v1["status"], "waiting");
    assert!(v1["pending"].is_null());
    assert_eq!(c.answer(&id, 0, json!(secret)).await.0, StatusCode::OK);
    let (_, v0) = c.call("GET", &format!("/sessions/{id}/agents/0"), None).await;
    assert_eq!(v0["history"][0]["value"], secret);
    for path in [format!("/sessions/{id}/agents/1"), format!("/sessions/{id}")] {
        let (_, body) = c.call("GET", &path, None).await;
        assert!(!body.to_string().contains(secret), "{path} leaks {body}");
    }
}

#[tokio::test]
async fn unknown_things_are_404() {
    let c = Client::new();
    assert_eq!(c.call("GET", "/sessions/nope", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.call("GET", "/sessions/nope/result", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.answer("nope", 0, json!("1")).await.0, StatusCode::NOT_FOUND);
    let (_, created) = c.create(json!({ "n": 2, "m": 6, "protocol": "two_agent_ef1" })).await;
    let id = created["id"].as_str().unwrap();
    assert_eq!(c.call("GET", &format!("/sessions/{id}/agents/2"), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.call("GET", &format!("/sessions/{id}/agents/x"), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.call("GET", &format!("/sessions/{id}/result"), None).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let inst = Instance::additive(&[vec![3, 1, 4, 1, 5, 9, 2], vec![2, 7, 1, 8, 2, 8, 1]]).unwrap();
    let (id, half_state) = {
        let c = Client::over(SessionService::open(&path).unwrap());
        let (_, created) = c.create(json!({ "n": 2, "m": 7, "protocol": "two_agent_ef1" })).await;
        let id = created["id"].as_str().unwrap().to_string();
        let mut panel = build_panel(&inst).unwrap();
        for _ in 0..2 {
            let (_, state) = c.call("GET", &format!("/sessions/{id}"), None).await;
            let (agent, bundle) = pending(&state).unwrap();
            c.answer(&id, agent, json!(panel.query(agent, &bundle).unwrap().to_string())).await;
        }
        let state = c.call("GET", &format!("/sessions/{id}"), None).await.1;
        (id, state)
    };
    let c = Client::over(SessionService::open(&path).unwrap());
    assert_eq!(c.call("GET", &format!("/sessions/{id}"), None).await.1, half_state);
    drive(&c, &id, &inst).await;
    let (_, result) = c.call("GET", &format!("/sessions/{id}/result"), None).await;
    let direct = run_protocol(ProtocolId::TwoAgentEf1, &mut build_panel(&inst).unwrap(), &ProtocolOptions::default()).unwrap();
    assert_eq!(result["allocation"], serde_json::to_value(&direct).unwrap());
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let c = Arc::new(Client::new());
    let mut handles = Vec::new();
    for k in 0..16u64 {
        let c = c.clone();
        handles.push(tokio::spawn(async move {
            let m = 4 + k as usize;
            let rows = vec![(0..m as u64).map(|g| (g * 7 + k) % 11).collect(), (0..m as u64).map(|g| (g * 3 + k) % 5).collect()];
            let inst = Instance::additive(&rows).unwrap();
            let (_, created) = c.create(json!({ "n": 2, "m": m, "protocol": "envy_cycle_elimination" })).await;
            let id = created["id"].as_str().unwrap().to_string();
            let answered = drive(&c, &id, &inst).await;
            let direct = run_protocol(ProtocolId::EnvyCycleElimination, &mut build_panel(&inst).unwrap(), &ProtocolOptions::default()).unwrap();
            let (_, result) = c.call("GET", &format!("/sessions/{id}/result"), None).await;
            assert_eq!(result["allocation"], serde_json::to_value(&direct).unwrap());
            assert_eq!(result["queries"].as_u64().unwrap() as usize, answered);
        }));
    }
    for h in handles {
        h.await.unwrap();
    }
}
