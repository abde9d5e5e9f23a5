//! Match configuration: a TOML file plus flag overrides, and the snapshot
//! persisted next to a running match so it can be resumed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Failure, RunArgs};

/// The match config file. Every field is optional; flags override.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    pub agent: Option<String>,
    pub opponent: Option<String>,
    pub num_hands: Option<u64>,
    pub seed: Option<u64>,
    pub endpoint: Option<String>,
    pub auth_token: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub decision_timeout_ms: Option<u64>,
    pub house_checkpoint: Option<PathBuf>,
}

impl MatchConfig {
    pub fn load(path: &Path) -> Result<MatchConfig, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::Validation(format!("parsing {}: {e}", path.display())))
    }
}

/// A fully resolved match: file values overridden by flags, defaults filled.
#[derive(Debug, Clone)]
pub struct ResolvedMatch {
    pub agent: String,
    pub opponent: String,
    pub num_hands: u64,
    pub seed: Option<u64>,
    pub endpoint: Option<String>,
    pub auth_token: Option<String>,
    pub data_dir: PathBuf,
    pub out: PathBuf,
    pub decision_timeout_ms: Option<u64>,
    pub house_checkpoint: Option<PathBuf>,
}

pub fn resolve(args: RunArgs) -> Result<ResolvedMatch, Failure> {
    let file = match &args.config {
        Some(path) => MatchConfig::load(path)?,
        None => MatchConfig::default(),
    };
    let agent = args.agent.or(file.agent).ok_or_else(|| {
        Failure::Validation("no agent: pass --agent or set `agent` in the config file".into())
    })?;
    let opponent = args.opponent.or(file.opponent).unwrap_or_else(|| "house".to_string());
    let num_hands = args.hands.or(file.num_hands).unwrap_or(5_000);
    if num_hands == 0 {
        return Err(Failure::Validation("num_hands must be at least 1".into()));
    }
    let out = args
        .out
        .or(file.out_dir)
        .unwrap_or_else(|| PathBuf::from("hunl-out"));
    let data_dir = args
        .data_dir
        .or(file.data_dir)
        .unwrap_or_else(|| out.join("service"));
    Ok(ResolvedMatch {
        agent,
        opponent,
        num_hands,
        seed: args.seed.or(file.seed),
        endpoint: args.endpoint.or(file.endpoint),
        auth_token: auth_or_env(args.auth_token.or(file.auth_token)),
        data_dir,
        out,
        decision_timeout_ms: args.decision_timeout_ms.or(file.decision_timeout_ms),
        house_checkpoint: args.house_checkpoint.or(file.house_checkpoint),
    })
}

/// Explicit token, else `$HUNL_AUTH_TOKEN`.
pub fn auth_or_env(token: Option<String>) -> Option<String> {
    token.or_else(|| std::env::var("HUNL_AUTH_TOKEN").ok())
}

/// Everything needed to resume a match, written to `<out>/match.json` the
/// moment the session exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchSnapshot {
    pub session_id: String,
    pub seed: u64,
    pub agent: String,
    pub opponent: String,
    pub num_hands: u64,
    /// Remote service endpoint; `None` means the in-process service over
    /// `data_dir`.
    pub endpoint: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub decision_timeout_ms: Option<u64>,
    pub house_checkpoint: Option<PathBuf>,
}

impl MatchSnapshot {
    pub fn path(out: &Path) -> PathBuf {
        out.join("match.json")
    }

    pub fn save(&self, out: &Path) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Failure::Internal(format!("serializing match snapshot: {e}")))?;
        std::fs::write(Self::path(out), text)?;
        Ok(())
    }

    pub fn load(out: &Path) -> Result<MatchSnapshot, Failure> {
        let path = Self::path(out);
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Failure::Validation(format!(
                "no resumable match at {} ({e}); `hunl run` writes it",
                path.display()
            ))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Validation(format!("parsing {}: {e}", path.display())))
    }
}
