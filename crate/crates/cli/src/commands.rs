//! The seven subcommands.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use hunl_client::{resume_session, MatchOutcome};
use hunl_core::engine::GameConfig;
use hunl_core::protocol::CreateSessionRequest;
use hunl_core::rangeviz::{
    extract_range, most_frequent_open, render_png, render_text, RangeNode,
};
use hunl_core::solver::cfr::VanillaCfr;
use hunl_core::solver::hunl::{HouseAgent, HouseModel, HouseTrainConfig};
use hunl_core::solver::kuhn::Kuhn;
use hunl_core::solver::leduc::Leduc;
use hunl_core::solver::{best_response::exploitability, expected_value, GameTree};
use hunl_service::{ServiceConfig, Store};

use crate::config::{self, MatchSnapshot};
use crate::{
    agentspec, table, Failure, LeaderboardSyncArgs, RangeArgs, ReportArgs, ResumeArgs, RunArgs,
    ServeArgs, SolveArgs, SolveCommand,
};

pub fn serve(args: ServeArgs) -> Result<(), Failure> {
    let game = GameConfig::new(args.sb, args.bb, args.stack)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let mut config = ServiceConfig::local(&args.data_dir);
    config.game = game;
    config.house_model_path = args.house_checkpoint;
    config.decision_timeout = args.decision_timeout_ms.map(Duration::from_millis);
    config.auth_token = config::auth_or_env(args.auth_token);
    let store = Arc::new(Store::open(config)?);

    let runtime = tokio::runtime::Runtime::new()?;
    runtime
        .block_on(async move {
            let listener = tokio::net::TcpListener::bind(&args.listen)
                .await
                .map_err(|e| Failure::Validation(format!("binding {}: {e}", args.listen)))?;
            let addr = listener
                .local_addr()
                .map_err(|e| Failure::Internal(e.to_string()))?;
            println!("listening on http://{addr}");
            hunl_service::http::serve(store, listener)
                .await
                .map_err(|e| Failure::Internal(e.to_string()))
        })
}

pub fn run(args: RunArgs) -> Result<(), Failure> {
    let m = config::resolve(args)?;
    std::fs::create_dir_all(&m.out)?;
    let mut agent = agentspec::build_message_agent(&m.agent, &m.out)?;
    let mut transport = agentspec::make_transport(
        m.endpoint.as_deref(),
        m.auth_token.clone(),
        Some(&m.data_dir),
        m.house_checkpoint.as_deref(),
        m.decision_timeout_ms,
    )?;

    let request = CreateSessionRequest {
        agent_name: agent.name().to_string(),
        opponent: m.opponent.clone(),
        num_hands: m.num_hands,
        seed: m.seed,
    };
    let created = transport.create_session(&request)?;
    println!("session {} (seed {})", created.session_id, created.seed);
    let snapshot = MatchSnapshot {
        session_id: created.session_id.clone(),
        seed: created.seed,
        agent: m.agent.clone(),
        opponent: m.opponent.clone(),
        num_hands: m.num_hands,
        endpoint: m.endpoint.clone(),
        data_dir: m.endpoint.is_none().then(|| m.data_dir.clone()),
        decision_timeout_ms: m.decision_timeout_ms,
        house_checkpoint: m.house_checkpoint.clone(),
    };
    snapshot.save(&m.out)?;

    let label = agent.name().to_string();
    let outcome = resume_session(
        &mut *transport,
        &mut *agent,
        &created.session_id,
        created.seed,
        m.num_hands,
    )?;
    finish(&m.out, &label, &outcome)
}

pub fn resume(args: ResumeArgs) -> Result<(), Failure> {
    let snapshot = MatchSnapshot::load(&args.out)?;
    let mut agent = agentspec::build_message_agent(&snapshot.agent, &args.out)?;
    let mut transport = agentspec::make_transport(
        snapshot.endpoint.as_deref(),
        config::auth_or_env(args.auth_token),
        snapshot.data_dir.as_deref(),
        snapshot.house_checkpoint.as_deref(),
        snapshot.decision_timeout_ms,
    )?;
    println!("resuming session {} (seed {})", snapshot.session_id, snapshot.seed);
    let label = agent.name().to_string();
    let outcome = resume_session(
        &mut *transport,
        &mut *agent,
        &snapshot.session_id,
        snapshot.seed,
        snapshot.num_hands,
    )?;
    finish(&args.out, &label, &outcome)
}

/// Write `report.json`/`report.txt` under `out` and print the table.
fn finish(out: &Path, label: &str, outcome: &MatchOutcome) -> Result<(), Failure> {
    let table = table::report_table(&[(label, &outcome.report)]);
    let json = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| Failure::Internal(format!("serializing report: {e}")))?;
    std::fs::write(out.join("report.json"), json)?;
    std::fs::write(out.join("report.txt"), &table)?;
    print!("{table}");
    println!(
        "hands: {}  decisions: {}  fallbacks: {}  elapsed: {:.1}s",
        outcome.report.hands_played,
        outcome.decisions,
        outcome.fallbacks,
        outcome.elapsed_ms as f64 / 1000.0,
    );
    println!("artifacts: {}", out.display());
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<(), Failure> {
    let mut transport = agentspec::make_transport(
        args.endpoint.as_deref(),
        config::auth_or_env(args.auth_token),
        args.data_dir.as_deref(),
        args.house_checkpoint.as_deref(),
        None,
    )?;
    let report = transport.get_metrics(&args.session)?;
    if args.json {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Failure::Internal(format!("serializing report: {e}")))?;
        println!("{json}");
    } else {
        let label = args.label.as_deref().unwrap_or(&args.session);
        print!("{}", table::report_table(&[(label, &report)]));
    }
    Ok(())
}

pub fn leaderboard_sync(args: LeaderboardSyncArgs) -> Result<(), Failure> {
    let mut transport = agentspec::make_transport(
        args.endpoint.as_deref(),
        config::auth_or_env(args.auth_token),
        args.data_dir.as_deref(),
        args.house_checkpoint.as_deref(),
        None,
    )?;
    let entries = transport.get_leaderboard()?;
    print!("{}", table::leaderboard_table(&entries));
    if let Some(path) = args.out {
        let json = serde_json::to_string_pretty(&entries)
            .map_err(|e| Failure::Internal(format!("serializing leaderboard: {e}")))?;
        std::fs::write(&path, json)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn solve(args: SolveArgs) -> Result<(), Failure> {
    match args.game {
        SolveCommand::Kuhn { iterations, print_strategy } => {
            small_game("kuhn", &Kuhn, iterations, print_strategy)
        }
        SolveCommand::Leduc { iterations, print_strategy } => {
            small_game("leduc", &Leduc, iterations, print_strategy)
        }
        SolveCommand::House { out, iterations, scenarios, seed, eval_scenarios } => {
            let mut train = HouseTrainConfig::default();
            if let Some(i) = iterations {
                train.iterations = i;
            }
            if let Some(s) = scenarios {
                train.scenarios = s;
            }
            if let Some(s) = seed {
                train.seed = s;
            }
            println!(
                "training house model: {} iterations over {} scenarios (seed {})",
                train.iterations, train.scenarios, train.seed
            );
            let model = HouseModel::train(GameConfig::default(), train);
            model.save(&out)?;
            let exploitability = model.abstract_exploitability(eval_scenarios, 7);
            println!("abstract exploitability estimate: {exploitability:.2} chips/hand");
            println!("checkpoint: {}", out.display());
            Ok(())
        }
    }
}

fn small_game<G: GameTree>(
    name: &str,
    game: &G,
    iterations: u64,
    print_strategy: bool,
) -> Result<(), Failure> {
    let mut cfr = VanillaCfr::new(game);
    cfr.run(iterations);
    let profile = cfr.average_profile();
    println!("game: {name}");
    println!("iterations: {iterations}");
    println!("infosets: {}", profile.len());
    println!("player-0 expected value: {:.6}", expected_value(game, &profile, 0));
    println!("exploitability: {:.6}", exploitability(game, &profile));
    if print_strategy {
        let json = serde_json::to_string_pretty(&profile)
            .map_err(|e| Failure::Internal(format!("serializing strategy: {e}")))?;
        println!("{json}");
    }
    Ok(())
}

pub fn range(args: RangeArgs) -> Result<(), Failure> {
    let config = GameConfig::default();
    let agent = agentspec::build_core_agent(&args.agent)?;
    let node = parse_node(&args.node, args.house_checkpoint.as_deref(), config)?;
    let matrix = extract_range(&*agent, config, &node)?;

    match args.format.as_str() {
        "png" => {
            std::fs::write(&args.out, render_png(&matrix))?;
            let meta = serde_json::json!({
                "agent": matrix.agent,
                "node": matrix.node,
            });
            let meta_path = args.out.with_extension("meta.json");
            std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).unwrap())?;
            println!("wrote {} ({}) + {}", args.out.display(), matrix.node, meta_path.display());
        }
        "text" => {
            std::fs::write(&args.out, render_text(&matrix))?;
            println!("wrote {} ({})", args.out.display(), matrix.node);
        }
        other => {
            return Err(Failure::Validation(format!(
                "unknown format {other:?}: expected png or text"
            )))
        }
    }
    Ok(())
}

fn parse_node(
    spec: &str,
    house_checkpoint: Option<&Path>,
    config: GameConfig,
) -> Result<RangeNode, Failure> {
    if spec == "sb-open" {
        return Ok(RangeNode::SbOpen);
    }
    let Some(rest) = spec.strip_prefix("bb-defend") else {
        return Err(Failure::Validation(format!(
            "unknown node {spec:?}: expected sb-open or bb-defend[:<open-to-chips>]"
        )));
    };
    if let Some(size) = rest.strip_prefix(':') {
        let open_to = size.parse().map_err(|_| {
            Failure::Validation(format!("bad open size {size:?} in node {spec:?}"))
        })?;
        return Ok(RangeNode::BbDefend { open_to });
    }
    if !rest.is_empty() {
        return Err(Failure::Validation(format!(
            "unknown node {spec:?}: expected sb-open or bb-defend[:<open-to-chips>]"
        )));
    }
    // Size omitted: the documented default is the house's most frequent open.
    let Some(path) = house_checkpoint else {
        return Err(Failure::Validation(
            "bb-defend needs a size (bb-defend:<chips>) or --house-checkpoint to derive \
             the house's most frequent open"
                .into(),
        ));
    };
    let model = HouseModel::load(path)
        .map_err(|e| Failure::Validation(format!("loading house checkpoint {}: {e}", path.display())))?;
    let house = HouseAgent::new(Arc::new(model));
    let open_to = most_frequent_open(&house, config)?.ok_or_else(|| {
        Failure::Validation("the house model never opens; declare bb-defend:<chips>".into())
    })?;
    Ok(RangeNode::BbDefend { open_to })
}
