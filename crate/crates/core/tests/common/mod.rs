#![allow(dead_code)]

use std::io::Cursor;

use avatar_dm::ontology::Decision;
use avatar_dm::{Assets, EngineConfig, Session};

pub const REPLAY_SEED: u64 = 7;

/// `(utterance, printed compound)` for the 26 scripted user turns.
pub fn transcript() -> Vec<(&'static str, f64)> {
    include_str!("../fixtures/transcript.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (u, c) = l.split_once('\t').expect("tab-separated");
            (u, c.trim().parse().expect("numeric compound"))
        })
        .collect()
}

/// Feature ids and whether the scripted user ends up with them.
pub const EXPECTED_FEATURES: [(&str, bool); 10] = [
    ("get-detailed-info", true),
    ("keyword-search", true),
    ("sort-books", true),
    ("advanced-search", true),
    ("broad-match", false),
    ("exact-match", true),
    ("manage-cart", true),
    ("payment-gateway", true),
    ("get-summary", true),
    ("set-delivery-address", true),
];

pub fn replay(seed: u64) -> Session {
    let mut s = Session::new(Assets::shipped(), EngineConfig::default(), seed).unwrap();
    for (u, _) in transcript() {
        s.step(u).unwrap();
    }
    s
}

pub fn decision(s: &Session, id: &str) -> Decision {
    let o = &s.assets().ontology;
    s.walker().decision(o.index_of(id).unwrap_or_else(|| panic!("{id} missing")))
}

/// Mismatched features as `id: got X`, empty when all match.
pub fn feature_mismatches(s: &Session) -> Vec<String> {
    EXPECTED_FEATURES
        .iter()
        .filter_map(|&(id, want)| {
            let got = decision(s, id);
            let ok = if want { got == Decision::Accepted } else { matches!(got, Decision::Rejected | Decision::Excluded) };
            (!ok).then(|| format!("{id}: got {got:?}"))
        })
        .collect()
}

/// Runs the REPL over `lines` and returns the JSON-lines turn log.
pub fn repl_log(seed: u64, lines: &[&str]) -> String {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("turns.jsonl");
    let mut input = Cursor::new(lines.join("\n").into_bytes());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["avatar-dm", "repl", "--seed", &seed.to_string(), "--log", log.to_str().unwrap()];
    let code = avatar_dm::gateway::run(args, &mut input, &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    std::fs::read_to_string(log).unwrap()
}

/// Same conversation over the HTTP API; returns the raw transcript body.
pub fn http_log(seed: u64, lines: &[&str]) -> String {
    use avatar_dm::gateway::{router, AppState};
    use axum::body::Body;
    use axum::http::{Request, StatusCode};
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    rt.block_on(async {
        let app = router(AppState::new(Assets::shipped(), EngineConfig::default()), None);
        let call = |method: &str, uri: String, body: String| {
            let app = app.clone();
            let req = Request::builder()
                .method(method)
                .uri(uri)
                .header("content-type", "application/json")
                .body(Body::from(body))
                .unwrap();
            async move {
                let resp = app.oneshot(req).await.unwrap();
                assert_eq!(resp.status(), StatusCode::OK);
                let bytes = resp.into_body().collect().await.unwrap().to_bytes();
                String::from_utf8(bytes.to_vec()).unwrap()
            }
        };
        let created = call("POST", "/api/session".into(), format!(r#"{{"seed": {seed}}}"#)).await;
        let created: serde_json::Value = serde_json::from_str(&created).unwrap();
        let id = created["session_id"].as_str().unwrap().to_string();
        for line in lines {
            let body = serde_json::json!({ "text": line }).to_string();
            call("POST", format!("/api/session/{id}/message"), body).await;
        }
        call("GET", format!("/api/session/{id}/transcript"), String::new()).await
    })
}

/// JSON-lines log as the equivalent JSON array text.
pub fn log_as_array(jsonl: &str) -> String {
    format!("[{}]", jsonl.lines().collect::<Vec<_>>().join(","))
}
