use std::path::Path;
use std::sync::OnceLock;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

use storygem::embeddings::{load_all_vectors, EmbeddingTable};
use storygem::service::{router, AppState, ServiceConfig};

fn sample(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/sample").join(name);
    p.to_str().unwrap().to_string()
}

fn table() -> EmbeddingTable {
    static T: OnceLock<EmbeddingTable> = OnceLock::new();
    T.get_or_init(|| load_all_vectors(Path::new(&sample("toy.vec"))).unwrap())
        .clone()
}

fn ready() -> AppState {
    AppState::ready(table(), ServiceConfig::default())
}

async fn call(state: AppState, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let resp = router(state).oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

fn post(uri: &str, body: serde_json::Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn json(body: &[u8]) -> serde_json::Value {
    serde_json::from_slice(body).unwrap()
}

fn beer() -> String {
    std::fs::read_to_string(sample("beer.txt")).unwrap()
}

#[tokio::test]
async fn health_reports_loading_then_ready() {
    let state = AppState::loading(ServiceConfig::default());
    let (s, _, b) = call(state.clone(), Request::get("/api/health").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(json(&b)["embedding-loaded"], false);

    let (s, _, b) = call(state.clone(), post("/api/layout", serde_json::json!({"text": "beer"}))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(json(&b)["stage"], "embeddings");

    state.finish_loading(Ok(table()));
    let (_, _, b) = call(state, Request::get("/api/health").body(Body::empty()).unwrap()).await;
    let h = json(&b);
    assert_eq!(h["embedding-loaded"], true);
    assert_eq!(h["dimension"], 64);
}

#[tokio::test]
async fn layout_returns_document() {
    let req = serde_json::json!({"text": beer(), "params": {"max-words": 20, "seed": 3}});
    let (s, h, b) = call(ready(), post("/api/layout", req)).await;
    assert_eq!(s, StatusCode::OK, "{}", String::from_utf8_lossy(&b));
    assert_eq!(h["content-type"], "application/json");
    assert!(h.contains_key("server-timing"));
    assert!(h.contains_key("access-control-allow-origin") || h.contains_key("vary"));
    let doc = json(&b);
    assert_eq!(doc["words"].as_array().unwrap().len(), 20);
    let cells = doc["cells"].as_array().unwrap();
    let leaves: usize = cells
        .iter()
        .map(|c| c["children"].as_array().map_or(1, |ch| ch.len().max(1)))
        .sum();
    assert_eq!(leaves, 20);
}

#[tokio::test]
async fn requests_are_stateless() {
    let req = serde_json::json!({"text": beer(), "params": {"max-words": 15}});
    let (_, _, a) = call(ready(), post("/api/layout", req.clone())).await;
    let state = ready();
    let (_, _, _) = call(state.clone(), post("/api/layout", serde_json::json!({"text": "plum tree fruit"}))).await;
    let (_, _, b) = call(state, post("/api/layout", req)).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn bad_requests_are_rejected() {
    let cases = [
        serde_json::json!({"text": "   "}),
        serde_json::json!({"text": "beer", "params": {"k": 0}}),
        serde_json::json!({"text": "beer", "params": {"container": "/etc/passwd"}}),
        serde_json::json!({"text": "beer", "params": {"font": "/tmp/font.json"}}),
        serde_json::json!({"text": "beer", "params": {"colour": "red"}}),
        serde_json::json!({"words": ["beer"]}),
        serde_json::json!({"text": "a".repeat((1 << 20) + 1)}),
    ];
    for c in cases {
        let (s, _, b) = call(ready(), post("/api/layout", c.clone())).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{c:.80}");
        assert_eq!(json(&b)["stage"], "config");
    }
}

#[tokio::test]
async fn all_oov_is_unprocessable() {
    let (s, _, b) = call(ready(), post("/api/layout", serde_json::json!({"text": "zzqv qqzx"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let e = json(&b);
    assert_eq!(e["stage"], "embeddings");
    assert!(e["error"].is_string() && e["detail"].is_string());
}

#[tokio::test]
async fn render_post_returns_svg() {
    let req = serde_json::json!({"text": beer(), "params": {"max-words": 10}});
    let (s, h, b) = call(ready(), post("/api/render", req)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h["content-type"], "image/svg+xml");
    let svg = String::from_utf8(b).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let texts = doc.descendants().filter(|n| n.has_tag_name("text")).count();
    assert!(texts >= 10);
}

#[tokio::test]
async fn render_get_matches_post() {
    let text = "beer hops beer malt brewery beer ale yeast";
    let uri = format!("/api/render?format=svg&text={}&max-words=5&seed=9", text.replace(' ', "%20"));
    let (s, _, g) = call(ready(), Request::get(uri).body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK, "{}", String::from_utf8_lossy(&g));
    let req = serde_json::json!({"text": text, "params": {"max-words": 5, "seed": 9}});
    let (_, _, p) = call(ready(), post("/api/render", req)).await;
    assert_eq!(g, p);

    let (s, _, _) = call(ready(), Request::get("/api/render?format=png&text=beer").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn timeout_maps_to_504() {
    let state = ready().with_timeout(Duration::from_nanos(1));
    let (s, _, b) = call(state, post("/api/layout", serde_json::json!({"text": beer()}))).await;
    assert_eq!(s, StatusCode::GATEWAY_TIMEOUT);
    assert_eq!(json(&b)["error"], "Timeout");
}

#[tokio::test]
async fn root_serves_index_or_ui_dir() {
    let (s, _, b) = call(ready(), Request::get("/").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert!(String::from_utf8_lossy(&b).contains("/api/layout"));

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    let state = AppState::ready(
        table(),
        ServiceConfig {
            ui_dir: Some(dir.path().to_path_buf()),
            ..ServiceConfig::default()
        },
    );
    let (s, _, b) = call(state, Request::get("/").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(b, b"<html>ui</html>");
}
