//! End-to-end service behavior: schema golden files, idempotence, error
//! semantics, crash recovery, timeouts, auth, and the HTTP layer.

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use hunl_core::protocol::{
    ActionRequest, CreateSessionRequest, ErrorBody, GameStateMessage, SessionTransport,
    TransportError,
};
use hunl_service::{http, LocalTransport, ServiceConfig, Store};

fn request(agent: &str, opponent: &str, num_hands: u64, seed: u64) -> CreateSessionRequest {
    CreateSessionRequest {
        agent_name: agent.to_string(),
        opponent: opponent.to_string(),
        num_hands,
        seed: Some(seed),
    }
}

/// Pick the fixture's next action: call when possible, else check, else fold.
fn passive_action(msg: &GameStateMessage) -> ActionRequest {
    let letters = msg.viewer().legal_actions.clone().unwrap_or_default();
    for candidate in ["c", "k", "f"] {
        if letters.iter().any(|l| l == candidate) {
            return ActionRequest {
                action: candidate.to_string(),
                amount: None,
            };
        }
    }
    panic!("no passive action available in {letters:?}");
}

/// Drive a session to completion with the passive policy; returns the final
/// terminal message.
fn drive_to_completion(store: &Store, session_id: &str, num_hands: u64) -> GameStateMessage {
    let mut msg = store.get_state(session_id).unwrap();
    loop {
        if msg.viewer_to_act() {
            msg = store
                .submit_action(session_id, &passive_action(&msg))
                .unwrap();
        } else if msg.game_state.is_hand_over && msg.hand_id == num_hands - 1 {
            return msg;
        } else {
            msg = store.get_state(session_id).unwrap();
        }
    }
}

fn golden_compare(path: &Path, actual: &str) {
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("missing golden file {} ({e}); run with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(
        actual,
        expected,
        "serialized form drifted from the golden file {}",
        path.display()
    );
}

#[test]
fn first_state_matches_the_golden_schema() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let resp = store
        .create_session(&request("golden", "check-call", 5000, 1234))
        .unwrap();
    assert_eq!(resp.seed, 1234);
    assert_eq!(resp.state.game.blinds, [50, 100]);
    assert_eq!(resp.state.game.starting_stack, 20_000);
    let rendered = serde_json::to_string_pretty(&resp.state).unwrap();
    golden_compare(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/first_state.json").as_path(),
        &rendered,
    );
}

#[test]
fn create_validates_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let err = store
        .create_session(&request("a", "check-call", 0, 1))
        .unwrap_err();
    assert_eq!(err.status(), 400);
    let err = store
        .create_session(&request("", "check-call", 5, 1))
        .unwrap_err();
    assert_eq!(err.status(), 400);
    let err = store
        .create_session(&request("a", "no-such-bot", 5, 1))
        .unwrap_err();
    assert_eq!(err.status(), 404);
    assert_eq!(err.code(), "unknown_opponent");
}

#[test]
fn omitted_seed_is_chosen_by_the_server_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let resp = store
        .create_session(&CreateSessionRequest {
            agent_name: "a".into(),
            opponent: "check-call".into(),
            num_hands: 3,
            seed: None,
        })
        .unwrap();
    // The reported seed reproduces the session deal-for-deal.
    let dir2 = tempfile::tempdir().unwrap();
    let store2 = Store::open(ServiceConfig::local(dir2.path())).unwrap();
    let resp2 = store2
        .create_session(&request("a", "check-call", 3, resp.seed))
        .unwrap();
    assert_eq!(resp.state, resp2.state);
}

#[test]
fn get_state_is_idempotent_and_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let resp = store
        .create_session(&request("idem", "uniform-random", 4, 99))
        .unwrap();
    let id = &resp.session_id;
    let a = serde_json::to_vec(&store.get_state(id).unwrap()).unwrap();
    let b = serde_json::to_vec(&store.get_state(id).unwrap()).unwrap();
    assert_eq!(a, b);
    // The create response carries the same pending state.
    assert_eq!(serde_json::to_vec(&resp.state).unwrap(), a);
}

#[test]
fn illegal_actions_are_rejected_with_echo_and_no_state_change() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let resp = store
        .create_session(&request("strict", "check-call", 2, 5))
        .unwrap();
    let id = &resp.session_id;
    let before = store.get_state(id).unwrap();
    // Hand 0: the agent is the small blind facing the big blind, so a naked
    // check is illegal, as is a bet below the minimum raise.
    let err = store
        .submit_action(id, &ActionRequest { action: "k".into(), amount: None })
        .unwrap_err();
    assert_eq!(err.status(), 400);
    assert_eq!(err.code(), "illegal_action");
    let body = err.body();
    assert_eq!(
        body.legal_actions.as_deref(),
        Some(&["f".to_string(), "c".to_string(), "b".to_string()][..])
    );
    let range = body.raise_range.unwrap();
    assert_eq!((range.min, range.max), (200, 20_000));
    let err = store
        .submit_action(id, &ActionRequest { action: "b".into(), amount: Some(150) })
        .unwrap_err();
    assert_eq!(err.code(), "illegal_action");
    // Malformed vocabulary is a validation error, not an engine error.
    let err = store
        .submit_action(id, &ActionRequest { action: "x".into(), amount: None })
        .unwrap_err();
    assert_eq!(err.code(), "invalid_request");
    assert_eq!(
        store.get_state(id).unwrap(),
        before,
        "rejected submissions must not move the session"
    );
}

#[test]
fn appendix_example_history_replays_to_a_4800_chip_pot() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    // The agent is the small blind of hand 0; the opponent plays the big
    // blind side of the fixture history.
    let resp = store
        .create_session(&request(
            "fixture",
            "scripted:BB=b800,k,c,k,k",
            1,
            42,
        ))
        .unwrap();
    let id = &resp.session_id;
    let mut msg = resp.state;
    for (action, amount) in [
        ("b", Some(200)),
        ("c", None),
        ("b", Some(1600)),
        ("k", None),
        ("k", None),
    ] {
        assert!(msg.viewer_to_act(), "fixture expects the agent to act");
        msg = store
            .submit_action(
                id,
                &ActionRequest { action: action.into(), amount },
            )
            .unwrap();
    }
    assert!(msg.game_state.is_hand_over);
    assert!(!msg.game_state.has_opponent_folded);
    assert_eq!(msg.game_state.total_pot, 4800);
    assert_eq!(
        msg.game_state.action_history.join(""),
        "b200b800c_kb1600c_kk_kk"
    );
    assert_eq!(msg.game_state.street, "river");
    // Zero-sum ledger: the agent's winnings are ±2400.
    assert_eq!(msg.game_state.winnings.abs(), 2400);
    // Session complete: further submissions hit the terminal-state error.
    let err = store
        .submit_action(id, &ActionRequest { action: "f".into(), amount: None })
        .unwrap_err();
    assert_eq!(err.code(), "session_complete");
    assert_eq!(err.status(), 409);
    let report = store.metrics(id).unwrap();
    assert_eq!(report.hands_played, 1);
}

#[test]
fn concurrent_submissions_conflict_instead_of_queueing() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(ServiceConfig::local(dir.path())).unwrap());
    let resp = store
        .create_session(&request("racer", "uniform-random", 120, 7))
        .unwrap();
    let id = resp.session_id.clone();
    drive_to_completion(&store, &id, 120);

    // Metrics hold the session lock while they evaluate; a submission racing
    // that window must be rejected as busy, not queued.
    let running = Arc::new(AtomicBool::new(true));
    let prober = {
        let store = store.clone();
        let id = id.clone();
        let running = running.clone();
        std::thread::spawn(move || {
            let mut saw_busy = false;
            while running.load(Ordering::Relaxed) {
                match store.submit_action(&id, &ActionRequest { action: "x".into(), amount: None }) {
                    Err(e) if e.code() == "busy" => saw_busy = true,
                    Err(_) => {}
                    Ok(_) => panic!("malformed probe action must never succeed"),
                }
            }
            saw_busy
        })
    };
    let report = store.metrics(&id).unwrap();
    running.store(false, Ordering::Relaxed);
    assert!(report.hands_played == 120);
    assert!(
        prober.join().unwrap(),
        "no submission observed the busy window while metrics held the lock"
    );
}

#[test]
fn kill_and_resume_reproduces_the_uninterrupted_report_bytes() {
    let num_hands = 9;
    let seed = 2024;

    // Uninterrupted reference run.
    let ref_dir = tempfile::tempdir().unwrap();
    let reference = {
        let store = Store::open(ServiceConfig::local(ref_dir.path())).unwrap();
        let resp = store
            .create_session(&request("resume-bot", "check-call", num_hands, seed))
            .unwrap();
        drive_to_completion(&store, &resp.session_id, num_hands);
        serde_json::to_vec(&store.metrics(&resp.session_id).unwrap()).unwrap()
    };

    // Interrupted run: play part of the match, drop the store mid-session
    // (fresh decision point — mid-hand progress is rebuilt on resume), then
    // reopen from disk and finish.
    let dir = tempfile::tempdir().unwrap();
    let (id, state_before) = {
        let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
        let resp = store
            .create_session(&request("resume-bot", "check-call", num_hands, seed))
            .unwrap();
        let id = resp.session_id.clone();
        let mut msg = resp.state;
        // Complete exactly 4 hands, stopping at the next decision point.
        while msg.hand_id < 4 || !msg.viewer_to_act() {
            if msg.viewer_to_act() {
                msg = store.submit_action(&id, &passive_action(&msg)).unwrap();
            } else {
                msg = store.get_state(&id).unwrap();
            }
        }
        let snapshot = serde_json::to_vec(&store.get_state(&id).unwrap()).unwrap();
        (id, snapshot)
    };

    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let state_after = serde_json::to_vec(&store.get_state(&id).unwrap()).unwrap();
    assert_eq!(
        state_before, state_after,
        "restart must resume at the exact decision point"
    );
    drive_to_completion(&store, &id, num_hands);
    let resumed = serde_json::to_vec(&store.metrics(&id).unwrap()).unwrap();
    assert_eq!(resumed, reference, "resumed report must be byte-identical");

    // The leaderboard sees the finished session.
    let board = store.leaderboard().unwrap();
    assert_eq!(board.len(), 1);
    assert_eq!(board[0].agent_name, "resume-bot");
}

#[test]
fn local_transport_speaks_the_session_trait() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(ServiceConfig::local(dir.path())).unwrap());
    let mut transport = LocalTransport::new(store);
    let resp = transport
        .create_session(&request("local", "always-fold", 2, 3))
        .unwrap();
    // Always-fold opponent: every hand it acts in ends immediately; the
    // session may already be over from the agent's perspective.
    let state = transport.get_state(&resp.session_id).unwrap();
    if state.viewer_to_act() {
        let msg = transport
            .submit_action(&resp.session_id, &passive_action(&state))
            .unwrap();
        assert!(msg.game_state.is_hand_over || msg.viewer_to_act());
    }
    let err = transport.get_state("nope").unwrap_err();
    match err {
        TransportError::Service { status, body } => {
            assert_eq!(status, 404);
            assert_eq!(body.error, "unknown_session");
        }
        other => panic!("expected a service error, got {other:?}"),
    }
}

#[test]
fn timeout_fallback_completes_abandoned_sessions_and_flags_them() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ServiceConfig::local(dir.path());
    config.decision_timeout = Some(Duration::from_millis(40));
    let store = Store::open(config).unwrap();
    let resp = store
        .create_session(&request("sleeper", "check-call", 2, 11))
        .unwrap();
    let id = &resp.session_id;
    assert_eq!(store.sweep_timeouts(), 0, "fresh decisions are inside budget");
    for _ in 0..60 {
        let msg = store.get_state(id).unwrap();
        if msg.game_state.is_hand_over && msg.hand_id == 1 {
            break;
        }
        std::thread::sleep(Duration::from_millis(45));
        store.sweep_timeouts();
    }
    let final_msg = store.get_state(id).unwrap();
    assert!(final_msg.game_state.is_hand_over);
    assert_eq!(final_msg.hand_id, 1);
    let flags = store.flags(id).unwrap();
    assert_eq!(flags, vec![0, 1], "both hands finished on the fallback path");
    assert_eq!(store.metrics(id).unwrap().hands_played, 2);
}

#[test]
fn messages_never_leak_the_opponents_cards() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(ServiceConfig::local(dir.path())).unwrap();
    let num_hands = 30;
    let resp = store
        .create_session(&request("fuzz", "uniform-random", num_hands, 77))
        .unwrap();
    let id = resp.session_id.clone();

    // Record every body seen, tagged by hand id.
    let mut bodies: Vec<(u64, String)> = Vec::new();
    let mut msg = resp.state;
    loop {
        bodies.push((msg.hand_id, serde_json::to_string(&msg).unwrap()));
        if msg.viewer_to_act() {
            msg = store.submit_action(&id, &passive_action(&msg)).unwrap();
        } else if msg.game_state.is_hand_over && msg.hand_id == num_hands - 1 {
            break;
        } else {
            msg = store.get_state(&id).unwrap();
        }
    }

    // The hand log knows the opponent's cards; no body of the same hand may
    // contain them (cards are unique per deal, so a two-character card string
    // can only denote that card).
    let records = hunl_core::record::load_records(&dir.path().join(&id).join("hands.jsonl")).unwrap();
    assert_eq!(records.len() as u64, num_hands);
    let mut checked = 0;
    for record in &records {
        let hidden: Vec<String> = record.deal.hole[1].iter().map(|c| c.to_string()).collect();
        for (hand_id, body) in bodies.iter().filter(|(h, _)| *h == record.hand_id) {
            for card in &hidden {
                assert!(
                    !body.contains(card.as_str()),
                    "hand {hand_id}: opponent card {card} leaked into {body}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "fuzz walked too few messages ({checked})");
}

// ---------------------------------------------------------------------------
// HTTP layer.
// ---------------------------------------------------------------------------

fn spawn_server(config: ServiceConfig) -> (String, Arc<Store>) {
    let store = Arc::new(Store::open(config).unwrap());
    let serve_store = store.clone();
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            http::serve(serve_store, listener).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    (format!("http://{addr}"), store)
}

#[test]
fn http_round_trip_matches_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let (base, store) = spawn_server(ServiceConfig::local(dir.path()));
    let client = reqwest::blocking::Client::new();

    assert_eq!(
        client.get(format!("{base}/healthz")).send().unwrap().text().unwrap(),
        "ok"
    );

    let resp: hunl_core::protocol::CreateSessionResponse = client
        .post(format!("{base}/sessions"))
        .json(&request("wire", "check-call", 3, 55))
        .send()
        .unwrap()
        .error_for_status()
        .unwrap()
        .json()
        .unwrap();
    let id = &resp.session_id;

    // Wire state equals the store's view bit for bit.
    let wire: GameStateMessage = client
        .get(format!("{base}/sessions/{id}/state"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(wire, store.get_state(id).unwrap());

    // Walk the session over HTTP.
    let mut msg = resp.state;
    loop {
        if msg.viewer_to_act() {
            let reply = client
                .post(format!("{base}/sessions/{id}/action"))
                .json(&passive_action(&msg))
                .send()
                .unwrap();
            assert!(reply.status().is_success());
            msg = reply.json().unwrap();
        } else if msg.game_state.is_hand_over && msg.hand_id == 2 {
            break;
        } else {
            msg = client
                .get(format!("{base}/sessions/{id}/state"))
                .send()
                .unwrap()
                .json()
                .unwrap();
        }
    }

    let report: hunl_core::aivat::AivatReport = client
        .get(format!("{base}/sessions/{id}/metrics"))
        .send()
        .unwrap()
        .error_for_status()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(report.hands_played, 3);

    let board: Vec<hunl_core::protocol::LeaderboardEntry> = client
        .get(format!("{base}/leaderboard"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(board.len(), 1);
    assert_eq!(board[0].agent_name, "wire");
}

#[test]
fn http_error_semantics_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let (base, _store) = spawn_server(ServiceConfig::local(dir.path()));
    let client = reqwest::blocking::Client::new();

    // Unknown session.
    let resp = client.get(format!("{base}/sessions/ghost/state")).send().unwrap();
    assert_eq!(resp.status().as_u16(), 404);
    let body: ErrorBody = resp.json().unwrap();
    assert_eq!(body.error, "unknown_session");

    // Unknown opponent.
    let resp = client
        .post(format!("{base}/sessions"))
        .json(&request("a", "martian", 5, 1))
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 404);
    let body: ErrorBody = resp.json().unwrap();
    assert_eq!(body.error, "unknown_opponent");

    // Malformed body.
    let resp = client
        .post(format!("{base}/sessions"))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 400);
    let body: ErrorBody = resp.json().unwrap();
    assert_eq!(body.error, "invalid_request");

    // Zero hands.
    let resp = client
        .post(format!("{base}/sessions"))
        .json(&request("a", "check-call", 0, 1))
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 400);

    // Illegal action echoes the legal set.
    let created: hunl_core::protocol::CreateSessionResponse = client
        .post(format!("{base}/sessions"))
        .json(&request("a", "check-call", 1, 9))
        .send()
        .unwrap()
        .json()
        .unwrap();
    let resp = client
        .post(format!("{base}/sessions/{}/action", created.session_id))
        .json(&ActionRequest { action: "b".into(), amount: Some(1) })
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 400);
    let body: ErrorBody = resp.json().unwrap();
    assert_eq!(body.error, "illegal_action");
    assert!(body.legal_actions.is_some());
    assert!(body.raise_range.is_some());
}

#[test]
fn bearer_auth_guards_every_session_route() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ServiceConfig::local(dir.path());
    config.auth_token = Some("sesame".to_string());
    let (base, _store) = spawn_server(config);
    let client = reqwest::blocking::Client::new();

    // Health stays open; everything else requires the token.
    assert!(client.get(format!("{base}/healthz")).send().unwrap().status().is_success());
    let resp = client.get(format!("{base}/leaderboard")).send().unwrap();
    assert_eq!(resp.status().as_u16(), 401);
    let body: ErrorBody = resp.json().unwrap();
    assert_eq!(body.error, "unauthorized");
    let resp = client
        .get(format!("{base}/leaderboard"))
        .header("authorization", "Bearer wrong")
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 401);
    let resp = client
        .get(format!("{base}/leaderboard"))
        .header("authorization", "Bearer sesame")
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 200);
}
