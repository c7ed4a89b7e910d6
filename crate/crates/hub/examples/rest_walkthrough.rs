//! Drive the REST API in process: store a document, read it back, diff two
//! versions, annotate a policy and store the exported document.
//!
//!     cargo run -p transparency-hub --example rest_walkthrough

use std::fs;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use transparency_hub::{router, Store};

async fn call(app: &Router, method: Method, uri: &str, body: String) -> Value {
    let req = Request::builder().method(method.clone()).uri(uri).header(header::CONTENT_TYPE, "application/json").body(Body::from(body)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    println!("{method} {uri} -> {status}");
    value
}

fn fixture(path: &str) -> String {
    fs::read_to_string(format!("{}/../../fixtures/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[tokio::main]
async fn main() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(Store::open(dir.path()).unwrap()), None);

    let v1: Value = serde_json::from_str(&fixture("tilt/minimal.tilt")).unwrap();
    call(&app, Method::PUT, "/documents/acme-shop", v1.to_string()).await;
    let mut v2 = v1.clone();
    v2["meta"]["version"] = json!(2);
    v2["meta"]["hash"] = json!("");
    v2["controller"]["name"] = json!("ACME Handels GmbH");
    call(&app, Method::PUT, "/documents/acme-shop", v2.to_string()).await;
    let conflict = call(&app, Method::PUT, "/documents/acme-shop", v2.to_string()).await;
    println!("  {}", conflict["message"]);

    let diff = call(&app, Method::GET, "/documents/acme-shop/diff?from=1&to=2", String::new()).await;
    println!("  {diff}");
    let report = call(&app, Method::GET, "/documents/acme-shop/completeness", String::new()).await;
    println!("  {} checklist items", report["items"].as_array().map_or(0, Vec::len));
    let hits = call(&app, Method::GET, "/documents?filter=controller%2Fcountry%20eq%20%22DE%22", String::new()).await;
    println!("  {hits}");

    let text = fixture("policies/acme_de.txt");
    let identity = "ACME GmbH\nHauptstraße 1\n10115 Berlin, Deutschland";
    let start = text[..text.find(identity).unwrap()].chars().count();
    let policy = json!({"id": "acme-policy", "body": text});
    call(&app, Method::POST, "/policies", policy.to_string()).await;
    let task = call(&app, Method::POST, "/tasks", json!({"policyId": "acme-policy"}).to_string()).await;
    let task_id = task["id"].as_str().unwrap().to_string();
    loop {
        let next = call(&app, Method::GET, &format!("/tasks/{task_id}/next"), String::new()).await;
        if next["state"] != "question" {
            break;
        }
        let submission = if next["field"] == "controller.identity" {
            json!({"field": next["field"], "present": true, "spans": [[start, start + identity.chars().count()]]})
        } else {
            json!({"field": next["field"], "present": false})
        };
        call(&app, Method::POST, &format!("/tasks/{task_id}/submissions"), submission.to_string()).await;
    }
    let exported = call(&app, Method::GET, &format!("/tasks/{task_id}/export?id=acme&name=ACME&language=de&country=DE"), String::new()).await;
    call(&app, Method::PUT, "/documents/acme", exported.to_string()).await;
    let answer = call(&app, Method::POST, "/documents/acme/answers", json!({"kind": "CONTROLLER_IDENTITY"}).to_string()).await;
    println!("  {}", answer["answerText"]);
}
