//! Binary-level tests: artifacts, determinism, exit codes, HTTP serving,
//! and resume. Each test invokes the built `hunl` binary directly.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::sync::Arc;

use hunl_client::{MessageAgent, ObservationAgent};
use hunl_core::agents::CheckCall;
use hunl_core::aivat::AivatReport;
use hunl_core::protocol::{CreateSessionRequest, SessionTransport};
use hunl_service::{LocalTransport, ServiceConfig, Store};

fn hunl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hunl"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = hunl().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "hunl {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn read_report(dir: &Path) -> AivatReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_artifacts_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "run".to_string(),
            "--agent".into(),
            "check-call".into(),
            "--opponent".into(),
            "uniform-random".into(),
            "--hands".into(),
            "8".into(),
            "--seed".into(),
            "21".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    run_ok(&args(a.path()).iter().map(String::as_str).collect::<Vec<_>>());
    run_ok(&args(b.path()).iter().map(String::as_str).collect::<Vec<_>>());

    for dir in [a.path(), b.path()] {
        assert!(dir.join("match.json").exists());
        assert!(dir.join("report.txt").exists());
        assert_eq!(read_report(dir).hands_played, 8);
    }
    // Same config, same seed → byte-identical reports.
    assert_eq!(
        std::fs::read(a.path().join("report.json")).unwrap(),
        std::fs::read(b.path().join("report.json")).unwrap()
    );
    let table = std::fs::read_to_string(a.path().join("report.txt")).unwrap();
    for column in [
        "AIVAT Score",
        "AIVAT Stddev",
        "Chips Won",
        "All Hands Chips",
        "Chance Correction",
        "Action Correction",
    ] {
        assert!(table.contains(column), "missing column {column:?}");
    }
}

#[test]
fn always_fold_into_all_in_loses_exactly_75_bb_per_100() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--agent",
        "always-fold",
        "--opponent",
        "all-in",
        "--hands",
        "6",
        "--seed",
        "3",
        "--out",
        &out.path().display().to_string(),
    ]);
    let report = read_report(out.path());
    // Alternating blinds: −50 as SB, −100 as BB, so −75 bb/100 over even N.
    assert_eq!(report.raw_winrate, -75.0);
    assert_eq!(report.chips, -450);
}

#[test]
fn bad_agent_spec_exits_with_the_validation_code() {
    let out = tempfile::tempdir().unwrap();
    let output = hunl()
        .args(["run", "--agent", "nope", "--hands", "2", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown agent spec"), "stderr: {stderr}");
}

#[test]
fn unreachable_endpoint_exits_with_the_transport_code() {
    let out = tempfile::tempdir().unwrap();
    let output = hunl()
        .args([
            "run",
            "--agent",
            "check-call",
            "--opponent",
            "check-call",
            "--hands",
            "2",
            "--endpoint",
            "http://127.0.0.1:1",
            "--out",
        ])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn serve_then_run_over_http_and_sync_the_leaderboard() {
    let data = tempfile::tempdir().unwrap();
    let mut server = hunl()
        .args(["serve", "--listen", "127.0.0.1:0", "--data-dir"])
        .arg(data.path())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.as_mut().unwrap())
        .read_line(&mut line)
        .unwrap();
    let base = line.trim().strip_prefix("listening on ").unwrap().to_string();

    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--agent",
        "check-call",
        "--opponent",
        "always-fold",
        "--hands",
        "4",
        "--seed",
        "2",
        "--endpoint",
        &base,
        "--out",
        &out.path().display().to_string(),
    ]);
    assert_eq!(read_report(out.path()).hands_played, 4);

    let lb = out.path().join("leaderboard.json");
    let output = run_ok(&[
        "leaderboard-sync",
        "--endpoint",
        &base,
        "--out",
        &lb.display().to_string(),
    ]);
    assert!(String::from_utf8_lossy(&output.stdout).contains("check-call"));
    assert!(lb.exists());

    server.kill().unwrap();
    server.wait().unwrap();
}

#[test]
fn resume_finishes_an_interrupted_match_identically() {
    // Reference: an uninterrupted CLI run.
    let reference = tempfile::tempdir().unwrap();
    run_ok(&[
        "run",
        "--agent",
        "check-call",
        "--opponent",
        "uniform-random",
        "--hands",
        "25",
        "--seed",
        "13",
        "--out",
        &reference.path().display().to_string(),
    ]);

    // Interrupted: create the session through the library, play ~15 protocol
    // steps, and stop mid-match just as a killed process would.
    let out = tempfile::tempdir().unwrap();
    let data_dir = out.path().join("service");
    let store = Arc::new(Store::open(ServiceConfig::local(&data_dir)).unwrap());
    let mut transport = LocalTransport::new(store);
    let created = transport
        .create_session(&CreateSessionRequest {
            agent_name: "check-call".into(),
            opponent: "uniform-random".into(),
            num_hands: 25,
            seed: Some(13),
        })
        .unwrap();
    let mut agent = ObservationAgent::new(CheckCall);
    agent.on_session(created.seed);
    let mut msg = created.state;
    for _ in 0..15 {
        if msg.viewer_to_act() {
            let d = agent.decide(&msg).unwrap();
            msg = transport.submit_action(&created.session_id, &d.request).unwrap();
        } else {
            msg = transport.get_state(&created.session_id).unwrap();
        }
    }
    drop(transport);

    // The snapshot `hunl run` would have written before the crash.
    let snapshot = serde_json::json!({
        "session_id": created.session_id,
        "seed": 13,
        "agent": "check-call",
        "opponent": "uniform-random",
        "num_hands": 25,
        "endpoint": null,
        "data_dir": data_dir,
        "decision_timeout_ms": null,
        "house_checkpoint": null,
    });
    std::fs::write(
        out.path().join("match.json"),
        serde_json::to_string_pretty(&snapshot).unwrap(),
    )
    .unwrap();

    run_ok(&["resume", "--out", &out.path().display().to_string()]);
    assert_eq!(
        std::fs::read(out.path().join("report.json")).unwrap(),
        std::fs::read(reference.path().join("report.json")).unwrap()
    );
}

#[test]
fn range_artifacts_are_deterministic_and_correct_for_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("allin.txt");
    run_ok(&[
        "range",
        "--agent",
        "all-in",
        "--node",
        "sb-open",
        "--format",
        "text",
        "--out",
        &text.display().to_string(),
    ]);
    let rendered = std::fs::read_to_string(&text).unwrap();
    assert_eq!(rendered.matches("R100").count(), 169);

    let png_a = dir.path().join("a.png");
    let png_b = dir.path().join("b.png");
    for out in [&png_a, &png_b] {
        run_ok(&[
            "range",
            "--agent",
            "check-call",
            "--node",
            "bb-defend:300",
            "--format",
            "png",
            "--out",
            &out.display().to_string(),
        ]);
    }
    let bytes = std::fs::read(&png_a).unwrap();
    assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
    assert_eq!(bytes, std::fs::read(&png_b).unwrap());
    assert!(png_a.with_extension("meta.json").exists());

    // bb-defend without a size needs a house checkpoint to derive it from.
    let output = hunl()
        .args(["range", "--agent", "check-call", "--node", "bb-defend", "--out"])
        .arg(dir.path().join("x.png"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn solve_kuhn_approaches_the_game_value() {
    let output = run_ok(&["solve", "kuhn", "--iterations", "20000"]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    let ev: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("player-0 expected value: "))
        .unwrap()
        .parse()
        .unwrap();
    let exploitability: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("exploitability: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((ev - (-1.0 / 18.0)).abs() < 0.01, "ev {ev}");
    assert!(exploitability < 0.01, "exploitability {exploitability}");
}
