use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use nemesis_core::graph::serialize_instance;
use nemesis_core::instances;
use nemesis_core::reductions::grid_instance;
use nemesis_core::rules::replay;
use nemesis_core::{GameState, Instance, Move, MultiGraph, Status, VertexKind, Variant};
use nemesis_service::{router, Config, HintView, MoveResponse, StateView};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn instance_json(inst: &Instance) -> Value {
    serde_json::from_str(&serialize_instance(inst)).unwrap()
}

async fn create(app: &Router, inst: &Instance, role: &str, budget: Option<u64>) -> MoveResponse {
    let (code, body) = call(app, "POST", "/games", Some(json!({"instance": instance_json(inst), "role": role, "budget": budget}))).await;
    assert_eq!(code, StatusCode::CREATED, "{body}");
    serde_json::from_value(body).unwrap()
}

async fn post_move(app: &Router, id: &str, m: &Move) -> (StatusCode, Value) {
    call(app, "POST", &format!("/games/{id}/moves"), Some(serde_json::to_value(m).unwrap())).await
}

fn step(to: &str) -> Move {
    Move::Step { to: to.into() }
}

/// The view's legal moves and status agree with the referee replaying the moves.
fn assert_parity(inst: &Instance, view: &StateView) {
    let state = replay(inst, &view.moves).unwrap();
    assert_eq!(view.legal_moves, state.legal_moves(false));
    assert_eq!(view.status, state.status());
    assert_eq!(&view.position, state.position_id());
}

#[tokio::test]
async fn i1_forced_line() {
    let app = router(Config::default());
    let inst = instances::i1();
    let created = create(&app, &inst, "fugitive", None).await;
    assert_eq!(created.state.legal_moves, vec![step("a")]);
    assert!(created.engine_move.is_none());
    let id = created.state.id.clone();
    let (code, body) = post_move(&app, &id, &step("a")).await;
    assert_eq!(code, StatusCode::OK);
    let r: MoveResponse = serde_json::from_value(body).unwrap();
    let Some(Move::Delete { u, v }) = &r.engine_move else {
        panic!("engine should delete, got {:?}", r.engine_move);
    };
    assert_eq!(u.as_str(), "a");
    let survivor = if v.as_str() == "t1" { "t2" } else { "t1" };
    assert_parity(&inst, &r.state);
    let (code, body) = post_move(&app, &id, &step(survivor)).await;
    assert_eq!(code, StatusCode::OK);
    let r: MoveResponse = serde_json::from_value(body).unwrap();
    assert!(matches!(r.state.status, Status::FugitiveWon { .. }));
    assert!(r.engine_move.is_none());
    assert_parity(&inst, &r.state);

    // Moves after the end are refused with the state echoed.
    let (code, body) = post_move(&app, &id, &step("a")).await;
    assert_eq!(code, StatusCode::CONFLICT);
    assert_eq!(body["state"]["status"], "fugitiveWon");
}

#[tokio::test]
async fn illegal_moves_leave_state_unchanged() {
    let app = router(Config::default());
    let created = create(&app, &instances::i4(), "fugitive", None).await;
    let id = created.state.id.clone();
    for bad in [step("b"), step("nowhere"), Move::Pass, Move::Delete { u: "s".into(), v: "a".into() }] {
        let (code, body) = post_move(&app, &id, &bad).await;
        assert_eq!(code, StatusCode::CONFLICT, "{bad}");
        assert!(body["error"].as_str().unwrap().contains("illegal"));
        let echoed: StateView = serde_json::from_value(body["state"].clone()).unwrap();
        assert_eq!(echoed, created.state);
    }
    let (code, _) = call(&app, "POST", &format!("/games/{id}/moves"), Some(json!({"t": "jump"}))).await;
    assert!(code.is_client_error());
    let (_, now) = call(&app, "GET", &format!("/games/{id}"), None).await;
    assert_eq!(serde_json::from_value::<StateView>(now).unwrap(), created.state);
}

#[tokio::test]
async fn adversary_role_on_i2() {
    let app = router(Config::default());
    let inst = instances::i2();
    let created = create(&app, &inst, "adversary", None).await;
    assert_eq!(created.engine_move, Some(step("a")));
    assert_parity(&inst, &created.state);
    let (code, body) = post_move(&app, &created.state.id, &Move::Delete { u: "a".into(), v: "t".into() }).await;
    assert_eq!(code, StatusCode::OK);
    let r: MoveResponse = serde_json::from_value(body).unwrap();
    assert!(matches!(r.state.status, Status::AdversaryWon { .. }), "{:?}", r.state.status);
}

#[tokio::test]
async fn hints() {
    let app = router(Config::default());
    let id = create(&app, &instances::i1(), "fugitive", None).await.state.id;
    let (code, body) = call(&app, "GET", &format!("/games/{id}/hint"), None).await;
    assert_eq!(code, StatusCode::OK);
    let h: HintView = serde_json::from_value(body).unwrap();
    assert_eq!(serde_json::to_value(h.winner_from_here).unwrap(), "fugitive");
    assert_eq!(h.suggested_move, Some(step("a")));

    let id = create(&app, &instances::i2(), "fugitive", None).await.state.id;
    let (_, body) = call(&app, "GET", &format!("/games/{id}/hint"), None).await;
    assert_eq!(body["winner_from_here"], "adversary");

    let grid = grid_instance(13, 13, None).unwrap();
    let id = create(&app, &grid, "fugitive", Some(1_000)).await.state.id;
    let (_, body) = call(&app, "GET", &format!("/games/{id}/hint"), None).await;
    assert_eq!(body["winner_from_here"], "unknown");
    assert_eq!(body["suggested_move"]["t"], "step");
}

#[tokio::test]
async fn bad_requests_and_missing_games() {
    let app = router(Config::default());
    let (code, _) = call(&app, "GET", "/games/nope", None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    let (code, _) = post_move(&app, "nope", &step("a")).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    let (code, _) = call(&app, "GET", "/games/nope/hint", None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);

    let req = Request::builder()
        .method("POST")
        .uri("/games")
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);

    let mut broken = instance_json(&instances::i1());
    broken["start"] = json!("missing");
    let (code, body) = call(&app, "POST", "/games", Some(json!({"instance": broken, "role": "fugitive"}))).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("invalid instance"));
}

#[tokio::test]
async fn catherding_session() {
    let app = router(Config::default());
    let mut g = MultiGraph::new();
    for v in ["a", "b", "c"] {
        g.add_vertex(v, VertexKind::Regular).unwrap();
    }
    for (u, v) in [("a", "b"), ("b", "c"), ("a", "c")] {
        g.add_edge(u, v, 1).unwrap();
    }
    let inst = Instance::new(g, "a", Variant::CatHerding);
    let created = create(&app, &inst, "fugitive", None).await;
    assert!(created.state.vertices.iter().all(|v| v.kind == VertexKind::Regular));
    assert_eq!(created.state.variant, Variant::CatHerding);
    assert_parity(&inst, &created.state);
}

#[tokio::test]
async fn delete_and_transcript_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("games.jsonl");
    let app = router(Config { transcripts: Some(log.clone()), ..Config::default() });
    let inst = instances::i2();
    let finished = create(&app, &inst, "fugitive", None).await.state.id;
    let (_, body) = post_move(&app, &finished, &step("a")).await;
    assert_eq!(body["state"]["status"], "adversaryWon");
    let open = create(&app, &instances::i4(), "fugitive", None).await.state.id;
    let (code, _) = call(&app, "DELETE", &format!("/games/{open}"), None).await;
    assert_eq!(code, StatusCode::NO_CONTENT);
    let (code, _) = call(&app, "GET", &format!("/games/{open}"), None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    let (code, _) = call(&app, "DELETE", &format!("/games/{open}"), None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);

    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2, "{text}");
    for line in &lines {
        let inst = nemesis_core::graph::parse_instance(&line["instance"].to_string()).unwrap();
        let moves: Vec<Move> = serde_json::from_value(line["moves"].clone()).unwrap();
        let status = replay(&inst, &moves).unwrap().status();
        assert_eq!(serde_json::to_value(status).unwrap()["status"], line["status"]);
    }
    assert_eq!(lines[0]["id"], finished.as_str());
    assert_eq!(lines[1]["id"], open.as_str());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_posts_serialize() {
    let app = router(Config::default());
    let inst = instances::i1();
    for _ in 0..5 {
        let id = create(&app, &inst, "fugitive", None).await.state.id;
        let tasks: Vec<_> = (0..16)
            .map(|_| {
                let app = app.clone();
                let id = id.clone();
                tokio::spawn(async move { post_move(&app, &id, &step("a")).await })
            })
            .collect();
        let mut ok = 0;
        for t in tasks {
            let (code, _) = t.await.unwrap();
            match code {
                StatusCode::OK => ok += 1,
                StatusCode::CONFLICT => {}
                other => panic!("unexpected {other}"),
            }
        }
        assert_eq!(ok, 1);
        let (_, body) = call(&app, "GET", &format!("/games/{id}"), None).await;
        let view: StateView = serde_json::from_value(body).unwrap();
        assert_eq!(view.moves.len(), 2);
        assert_parity(&inst, &view);
    }
}

#[tokio::test]
async fn random_play_parity() {
    let app = router(Config { default_budget: 5_000, ..Config::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpus = [instances::i1(), instances::i3(), instances::i4(), instances::i5(), grid_instance(3, 4, None).unwrap()];
    for inst in &corpus {
        for role in ["fugitive", "adversary"] {
            let mut view = create(&app, inst, role, None).await.state;
            assert_parity(inst, &view);
            while matches!(view.status, Status::Ongoing) {
                let m = view.legal_moves.choose(&mut rng).unwrap().clone();
                let (code, body) = post_move(&app, &view.id, &m).await;
                assert_eq!(code, StatusCode::OK, "{body}");
                view = serde_json::from_value::<MoveResponse>(body).unwrap().state;
                assert_parity(inst, &view);
            }
            let referee = GameState::from_instance(inst);
            assert!(replay(inst, &view.moves).is_ok());
            assert_eq!(referee.board.digest, replay(inst, &view.moves).unwrap().board.digest);
        }
    }
}
