//! HTTP round trips against the survey router, driven in-process.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use moraltopics::service::{parse_responses, router, AppState, BankFile, Store, StoreSettings};
use moraltopics_core::naming::{aggregate_posterior, merge_topics, resolve_names, Decision, DecisionRecord, MetaCategory};
use moraltopics_core::survey::{
    collect_responses, post_level_agreement, validation_bank, AgreementRow, BankMode, Screening, ScoredPost,
    NONE_OF_THE_ABOVE,
};
use serde_json::{json, Value};
use tower::ServiceExt;

const SETTINGS: StoreSettings = StoreSettings {
    answers_per_question: 3,
    questions_per_session: 6,
    idle_timeout_secs: 3600,
};

fn bank() -> BankFile {
    let records: Vec<DecisionRecord> = (0..8)
        .map(|c| DecisionRecord {
            cluster_id: c,
            name: if c == 7 { "other".into() } else { format!("topic{}", c % 6) },
            decision: if c == 7 { Decision::Other } else { Decision::Wording },
        })
        .collect();
    let map = resolve_names(&BTreeMap::new(), &records, 8).unwrap();
    let meta = (0..6).map(|t| (format!("topic{t}"), MetaCategory::Things)).collect();
    let named = merge_topics(&map, &meta).unwrap().topics;
    let posts: Vec<ScoredPost> = (0..13)
        .map(|i| {
            let mut theta: Vec<f64> = (0..8).map(|c| 1.0 + ((i * 3 + c * 5) % 11) as f64).collect();
            let s: f64 = theta.iter().sum();
            theta.iter_mut().for_each(|x| *x /= s);
            ScoredPost {
                post_id: format!("p{i:02}"),
                title: format!("AITA for thing {i}"),
                body: "body".into(),
                named_posterior: aggregate_posterior(&theta, &named).unwrap(),
            }
        })
        .collect();
    let (screen, rest) = posts.split_first().unwrap();
    let questions = validation_bank(rest, &named, BankMode::Top4, 5, 9).unwrap().questions;
    let mut screening = Screening::new(screen, &named, 1).unwrap();
    screening.question.question_id = format!("screening-{}", screen.post_id);
    BankFile::Validation {
        bank_id: "val".into(),
        screening: Some(screening),
        questions,
    }
}

fn app(dir: &Path) -> (Router, AppState) {
    let store = Store::open(dir, vec![bank()], SETTINGS).unwrap();
    let state = AppState::new(store, Arc::new(|| 1_700_000_000));
    (router(state.clone(), None), state)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value, String) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::Null), text)
}

/// Runs one participant through screening and every assigned question,
/// choosing the first option (or NONE on every third question).
async fn complete_session(app: &Router, participant: &str) -> usize {
    let (status, s, _) = call(app, Method::POST, "/api/sessions", Some(json!({"participant_id": participant, "bank_id": "val"}))).await;
    assert_eq!(status, StatusCode::CREATED, "{s}");
    let sid = s["session_id"].as_str().unwrap().to_string();
    let BankFile::Validation { screening: Some(screening), .. } = bank() else { unreachable!() };
    let mut answered = 0;
    loop {
        let (status, next, _) = call(app, Method::GET, &format!("/api/sessions/{sid}/next"), None).await;
        assert_eq!(status, StatusCode::OK);
        if next["status"] == "done" {
            return answered;
        }
        assert_eq!(next["status"], "question", "{next}");
        let q = &next["question"];
        let selections: Vec<String> = if next["kind"] == "screening" {
            screening.correct.iter().cloned().collect()
        } else if answered % 3 == 2 {
            vec![NONE_OF_THE_ABOVE.into()]
        } else {
            vec![q["options"][0].as_str().unwrap().to_string()]
        };
        let body = json!({"question_id": q["question_id"], "selections": selections});
        let (status, ack, _) = call(app, Method::POST, &format!("/api/sessions/{sid}/answers"), Some(body)).await;
        assert_eq!(status, StatusCode::OK, "{ack}");
        assert_eq!(ack["accepted"], true);
        if next["kind"] == "validation" {
            answered += 1;
        }
    }
}

#[tokio::test]
async fn round_trip_and_export_match_live_counters() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());

    let (status, banks, _) = call(&app, Method::GET, "/api/banks", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(banks[0]["bank_id"], "val");
    assert_eq!(banks[0]["screening"], true);

    let mut total = 0;
    for p in ["ann", "bo", "cy", "di"] {
        total += complete_session(&app, p).await;
    }
    assert_eq!(total, 4 * SETTINGS.questions_per_session);

    let (_, progress, _) = call(&app, Method::GET, "/api/banks/val/progress", None).await;
    assert_eq!(progress["total_answers"], total);
    let live: Vec<AgreementRow> = serde_json::from_value(progress["agreement"].clone()).unwrap();

    let (status, _, csv) = call(&app, Method::GET, "/api/banks/val/export", None).await;
    assert_eq!(status, StatusCode::OK);
    let (responses, bad) = parse_responses(&csv);
    assert!(bad.is_empty(), "{bad:?}");
    assert_eq!(responses.len(), total);
    let BankFile::Validation { questions, .. } = bank() else { unreachable!() };
    let collected = collect_responses(responses, &questions, SETTINGS.answers_per_question);
    assert!(collected.rejected.is_empty());
    assert_eq!(post_level_agreement(&collected.accepted, &questions).unwrap(), live);
}

#[tokio::test]
async fn rejections_carry_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let open = json!({"participant_id": "eve", "bank_id": "val"});
    let (status, s, _) = call(&app, Method::POST, "/api/sessions", Some(open.clone())).await;
    assert_eq!(status, StatusCode::CREATED);
    let (status, err, _) = call(&app, Method::POST, "/api/sessions", Some(open)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "duplicate_participant");

    let sid = s["session_id"].as_str().unwrap();
    let (_, next, _) = call(&app, Method::GET, &format!("/api/sessions/{sid}/next"), None).await;
    assert_eq!(next["kind"], "screening");
    let q = &next["question"];
    let body = json!({"question_id": q["question_id"], "selections": [q["options"][0], NONE_OF_THE_ABOVE]});
    let (status, err, _) = call(&app, Method::POST, &format!("/api/sessions/{sid}/answers"), Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["error"], "invalid_answer");

    let (status, _, _) = call(&app, Method::GET, "/api/banks/nope/progress", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, _) = call(&app, Method::GET, "/api/sessions/missing/next", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn answers_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let before = {
        let (app, _) = app(dir.path());
        complete_session(&app, "fay").await;
        complete_session(&app, "gus").await;
        call(&app, Method::GET, "/api/banks/val/export", None).await.2
    };
    let (app, _) = app(dir.path());
    let after = call(&app, Method::GET, "/api/banks/val/export", None).await.2;
    assert_eq!(before, after);
    assert_eq!(parse_responses(&after).0.len(), 2 * SETTINGS.questions_per_session);
    // The same participant cannot start over after the restart.
    let (status, _, _) = call(&app, Method::POST, "/api/sessions", Some(json!({"participant_id": "fay", "bank_id": "val"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}
