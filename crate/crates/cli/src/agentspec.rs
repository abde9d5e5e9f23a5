//! Agent-spec parsing shared by `run`/`resume` (wire agents) and `range`
//! (strategy-queryable engine agents), plus transport construction.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use hunl_client::{
    CostLog, HttpChatCompleter, HttpTransport, LlmAgent, MessageAgent, ObservationAgent,
};
use hunl_core::agents::{baseline_by_name, Agent, Scripted};
use hunl_core::protocol::SessionTransport;
use hunl_core::solver::hunl::{HouseAgent, HouseModel};
use hunl_service::{LocalTransport, ServiceConfig, Store};

use crate::Failure;

/// Build an engine agent: a baseline name, `scripted:SB=..;BB=..`, or
/// `house:<checkpoint>`. These are exactly the specs that can also answer
/// strategy queries (scripted agents cannot, and `range` will say so).
pub fn build_core_agent(spec: &str) -> Result<Box<dyn Agent + Sync>, Failure> {
    if let Some(agent) = baseline_by_name(spec) {
        return Ok(agent);
    }
    if let Some(scripts) = spec.strip_prefix("scripted:") {
        let scripted = Scripted::from_spec(scripts).map_err(Failure::Validation)?;
        return Ok(Box::new(scripted));
    }
    if let Some(path) = spec.strip_prefix("house:") {
        let model = HouseModel::load(Path::new(path)).map_err(|e| {
            Failure::Validation(format!("loading house checkpoint {path:?}: {e}"))
        })?;
        return Ok(Box::new(HouseAgent::new(Arc::new(model))));
    }
    if spec == "house" {
        return Err(Failure::Validation(
            "the house agent needs a checkpoint: train one with `hunl solve house` \
             and use house:<path>"
                .into(),
        ));
    }
    Err(Failure::Validation(format!(
        "unknown agent spec {spec:?}: expected a baseline name (check-call, always-fold, \
         all-in, uniform-random), scripted:SB=..;BB=.., house:<checkpoint>, or llm[:<name>]"
    )))
}

/// Build a wire agent for `run`/`resume`. LLM specs become the adapter with
/// a cost log under `out`; everything else is an engine agent lifted onto
/// the wire.
pub fn build_message_agent(spec: &str, out: &Path) -> Result<Box<dyn MessageAgent>, Failure> {
    if spec == "llm" || spec.starts_with("llm:") {
        let name = match spec.strip_prefix("llm:") {
            Some(name) if !name.is_empty() => name.to_string(),
            _ => std::env::var("LLM_MODEL").unwrap_or_else(|_| "llm".to_string()),
        };
        let completer = HttpChatCompleter::from_env().map_err(|e| match e {
            hunl_client::ClientError::Completion(m) => Failure::Validation(m),
            other => other.into(),
        })?;
        let log = CostLog::open(out.join("costs.jsonl"))?;
        return Ok(Box::new(LlmAgent::new(name, completer).with_cost_log(log)));
    }
    Ok(Box::new(ObservationAgent::new(build_core_agent(spec)?)))
}

/// A transport for the given target: a remote endpoint, or the in-process
/// service over a local state directory.
pub fn make_transport(
    endpoint: Option<&str>,
    auth_token: Option<String>,
    data_dir: Option<&Path>,
    house_checkpoint: Option<&Path>,
    decision_timeout_ms: Option<u64>,
) -> Result<Box<dyn SessionTransport>, Failure> {
    if let Some(endpoint) = endpoint {
        let mut transport = HttpTransport::new(endpoint);
        if let Some(token) = auth_token {
            transport = transport.with_auth(token);
        }
        return Ok(Box::new(transport));
    }
    let Some(data_dir) = data_dir else {
        return Err(Failure::Validation(
            "pass --endpoint for a remote service or --data-dir for the in-process one".into(),
        ));
    };
    let mut config = ServiceConfig::local(data_dir);
    config.house_model_path = house_checkpoint.map(Path::to_path_buf);
    config.decision_timeout = decision_timeout_ms.map(Duration::from_millis);
    let store = Arc::new(Store::open(config)?);
    Ok(Box::new(LocalTransport::new(store)))
}
