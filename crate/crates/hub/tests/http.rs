use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use transparency_hub::{router, Store};

fn repo_file(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

struct Hub {
    _dir: tempfile::TempDir,
    app: Router,
}

fn hub() -> Hub {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    Hub { app: router(store, None), _dir: dir }
}

impl Hub {
    async fn call(&self, method: Method, uri: &str, body: impl Into<String>) -> (StatusCode, HeaderMap, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(body.into()))
            .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into())) };
        (status, headers, value)
    }

    async fn get(&self, uri: &str) -> (StatusCode, HeaderMap, Value) {
        self.call(Method::GET, uri, "").await
    }
}

fn encode(s: &str) -> String {
    s.bytes()
        .map(|b| if b.is_ascii_alphanumeric() || b"-_./".contains(&b) { (b as char).to_string() } else { format!("%{b:02X}") })
        .collect()
}

#[tokio::test]
async fn document_lifecycle() {
    let hub = hub();
    assert_eq!(hub.get("/health").await.0, StatusCode::OK);

    let minimal = repo_file("fixtures/tilt/minimal.tilt");
    let (status, headers, body) = hub.call(Method::PUT, "/documents/acme-shop", minimal.clone()).await;
    assert_eq!(status, StatusCode::CREATED);
    let etag = body["etag"].as_str().unwrap().to_string();
    assert_eq!(headers[header::ETAG], format!("\"{etag}\""));
    assert_eq!(etag, repo_file("fixtures/tilt/minimal.tilt.sha256").trim());

    let (status, _, body) = hub.call(Method::PUT, "/documents/acme-shop", minimal.clone()).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "VersionConflictError");

    let (status, headers, doc) = hub.get("/documents/acme-shop").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::ETAG], format!("\"{etag}\""));
    assert_eq!(doc["controller"]["name"], "ACME GmbH");

    let mut v2 = doc.clone();
    v2["meta"]["version"] = json!(2);
    v2["meta"]["hash"] = json!("");
    v2["controller"]["name"] = json!("ACME Holding GmbH");
    assert_eq!(hub.call(Method::PUT, "/documents/acme-shop", v2.to_string()).await.0, StatusCode::CREATED);
    assert_eq!(hub.get("/documents/acme-shop?version=1").await.2["controller"]["name"], "ACME GmbH");
    assert_eq!(hub.get("/documents/acme-shop/versions").await.2, json!([1, 2]));

    let (_, _, diff) = hub.get("/documents/acme-shop/diff?from=1&to=2").await;
    let paths: Vec<&str> = diff["entries"].as_array().unwrap().iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert_eq!(paths, ["controller/name", "meta/version"]);
    assert_eq!(hub.get("/documents/acme-shop/diff").await.2, diff);

    let (status, _, report) = hub.get("/documents/acme-shop/completeness").await;
    assert_eq!(status, StatusCode::OK);
    let missing: Vec<&str> = report["items"].as_array().unwrap().iter().filter(|i| i["status"] == "missing").map(|i| i["key"].as_str().unwrap()).collect();
    assert_eq!(missing, ["C04", "C05", "C07", "C09", "C10", "C12"]);

    let (status, _, body) = hub.get("/documents/nobody").await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::NOT_FOUND, Some("NotFoundError")));

    let (status, _, body) = hub.call(Method::PUT, "/documents/other-id", minimal).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("ValidationError")));
    let (status, _, body) = hub.call(Method::PUT, "/documents/x", "{not json").await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("SyntaxError")));

    assert_eq!(hub.call(Method::DELETE, "/documents/acme-shop", "").await.0, StatusCode::NO_CONTENT);
    assert_eq!(hub.get("/documents/acme-shop").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn filters_and_answers() {
    let hub = hub();
    for (id, f) in [("streamly", "streamly.tilt"), ("green-mail", "complete.tilt"), ("kiez-baeckerei", "bakery.tilt")] {
        let (status, _, _) = hub.call(Method::PUT, &format!("/documents/{id}"), repo_file(&format!("fixtures/tilt/{f}"))).await;
        assert_eq!(status, StatusCode::CREATED);
    }
    let (status, _, hits) = hub.get(&format!("/documents?filter={}", encode("automatedDecisionMaking/inUse eq true"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(hits, json!([{"id": "streamly", "version": 1, "matchedPaths": ["automatedDecisionMaking/inUse"]}]));

    let (_, _, all) = hub.get("/documents").await;
    let ids: Vec<&str> = all.as_array().unwrap().iter().map(|h| h["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["green-mail", "kiez-baeckerei", "streamly"]);

    let (status, _, body) = hub.get(&format!("/documents?filter={}", encode(r#"controller/country gte "DE""#))).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("BadFilterError")));

    let (status, _, answer) = hub.call(Method::POST, "/documents/streamly/answers", r#"{"kind": "THIRD_COUNTRY_TRANSFERS"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(answer["answerText"], "Number of third-country transfers: 2 (US, IN).");

    let (status, _, body) = hub
        .call(Method::POST, "/documents/streamly/answers", r#"{"kind": "PURPOSES_FOR_CATEGORY", "params": {"category": "nonexistent"}}"#)
        .await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("UnknownCategoryError")));
    let (status, _, body) = hub.call(Method::POST, "/documents/streamly/answers", r#"{"kind": "WEATHER"}"#).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("InvalidIntentError")));
}

/// Character span of the first occurrence of `needle`.
fn span_of(body: &str, needle: &str) -> [usize; 2] {
    let byte = body.find(needle).unwrap_or_else(|| panic!("{needle:?} not in policy"));
    let start = body[..byte].chars().count();
    [start, start + needle.chars().count()]
}

#[tokio::test]
async fn annotation_workflow_to_stored_document() {
    let hub = hub();
    let text = repo_file("fixtures/policies/acme_de.txt");
    let (status, _, policy) = hub.call(Method::POST, "/policies", json!({"id": "acme-policy", "body": text}).to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(policy["length"], text.chars().count());
    let (status, _, body) = hub.call(Method::POST, "/policies", json!({"id": "acme-policy", "body": "other"}).to_string()).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::CONFLICT, Some("ConflictError")));

    let (status, _, task) = hub.call(Method::POST, "/tasks", json!({"policyId": "acme-policy"}).to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    let task_id = task["id"].as_str().unwrap().to_string();
    assert_eq!(task_id, "acme-policy-task-1");

    let (status, _, next) = hub.get(&format!("/tasks/{task_id}/next")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((next["state"].as_str(), next["field"].as_str(), next["progress"].as_f64()), (Some("question"), Some("controller.identity"), Some(0.0)));

    let (status, _, suggestions) = hub.get(&format!("/tasks/{task_id}/suggestions?field=data.categories")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(suggestions.is_array());
    let (status, _, body) = hub.get(&format!("/tasks/{task_id}/suggestions?field=nope")).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("UnknownFieldError")));

    let seed = "id=acme&name=ACME%20Shop&language=de&country=DE";
    let (status, _, body) = hub.get(&format!("/tasks/{task_id}/export?{seed}")).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::CONFLICT, Some("TaskNotDoneError")));

    let (status, _, body) = hub
        .call(Method::POST, &format!("/tasks/{task_id}/submissions"), json!({"field": "adm", "present": false}).to_string())
        .await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("OutOfOrderError")));
    let (status, _, body) = hub
        .call(Method::POST, &format!("/tasks/{task_id}/submissions"), json!({"field": "controller.identity", "present": true, "spans": [[0, 100000]]}).to_string())
        .await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("SpanBoundsError")));

    let answers = [
        ("controller.identity", "Verantwortlicher:\nACME GmbH\nHauptstraße 1\n10115 Berlin, Deutschland"),
        ("data.categories", "E-Mail-Adresse"),
        ("data.purposes", "Den Versand des Newsletters stützen wir auf Ihre Einwilligung nach Art. 6 Abs. 1 lit. a DSGVO."),
        ("adm", "Eine automatisierte Entscheidungsfindung findet nicht statt."),
    ];
    loop {
        let (_, _, next) = hub.get(&format!("/tasks/{task_id}/next")).await;
        if next["state"] == "done" {
            assert_eq!(next["progress"], 1.0);
            break;
        }
        let field = next["field"].as_str().unwrap();
        let sub = match answers.iter().find(|(f, _)| *f == field) {
            Some((_, needle)) => json!({"field": field, "present": true, "spans": [span_of(&text, needle)], "at": "2023-05-04T10:00:00Z"}),
            None => json!({"field": field, "present": false}),
        };
        let (status, _, body) = hub.call(Method::POST, &format!("/tasks/{task_id}/submissions"), sub.to_string()).await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }

    let (status, _, doc) = hub.get(&format!("/tasks/{task_id}/export?{seed}")).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["controller"]["name"], "ACME GmbH");
    assert_eq!(doc["meta"]["created"], "2023-05-04T10:00:00Z");
    let (status, _, _) = hub.call(Method::PUT, "/documents/acme", doc.to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    let (_, _, answer) = hub.call(Method::POST, "/documents/acme/answers", r#"{"kind": "ADM_IN_USE"}"#).await;
    assert_eq!(answer["answerText"], "Automatisierte Entscheidungsfindung im Einsatz: nein.");

    assert_eq!(hub.get("/tasks").await.2, json!([task_id]));
    assert_eq!(hub.get("/policies/acme-policy").await.2["id"], "acme-policy");
    assert_eq!(hub.get("/ui/index.html").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn ui_assets_are_served_when_configured() {
    let data = tempfile::tempdir().unwrap();
    let ui = tempfile::tempdir().unwrap();
    fs::write(ui.path().join("index.html"), "<!doctype html><title>annotate</title>").unwrap();
    let app = router(Arc::new(Store::open(data.path()).unwrap()), Some(ui.path().to_path_buf()));
    let resp = app.oneshot(Request::get("/ui/index.html").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    assert!(String::from_utf8_lossy(&bytes).contains("annotate"));
}
