//! Driving an agent through a full session over any transport.

use std::time::Instant;

use hunl_core::agents::{decision_rng, Agent};
use hunl_core::aivat::AivatReport;
use hunl_core::protocol::{
    observation_from_message, ActionRequest, CreateSessionRequest, GameStateMessage,
    SessionTransport,
};

use crate::ClientError;

/// A player operating directly on wire messages. The LLM adapter implements
/// this natively; engine [`Agent`]s are lifted via [`ObservationAgent`].
pub trait MessageAgent {
    fn name(&self) -> &str;

    /// Called once per session with the server-confirmed seed, before any
    /// decision.
    fn on_session(&mut self, _seed: u64) {}

    /// Decide at the viewer's decision point.
    fn decide(&mut self, msg: &GameStateMessage) -> Result<Decision, ClientError>;
}

/// A submission plus whether it came from the check-else-fold fallback
/// rather than the agent's own (validated) choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub request: ActionRequest,
    pub fallback: bool,
}

/// Lift an engine agent onto the wire. The observation is reconstructed
/// from each message, and the per-decision RNG is derived exactly as the
/// service derives it for its own agents, so a lifted baseline plays the
/// same moves in-process and over HTTP.
pub struct ObservationAgent<A: Agent> {
    agent: A,
    seed: u64,
}

impl<A: Agent> ObservationAgent<A> {
    pub fn new(agent: A) -> Self {
        ObservationAgent { agent, seed: 0 }
    }
}

impl<A: Agent> MessageAgent for ObservationAgent<A> {
    fn name(&self) -> &str {
        self.agent.name()
    }

    fn on_session(&mut self, seed: u64) {
        self.seed = seed;
    }

    fn decide(&mut self, msg: &GameStateMessage) -> Result<Decision, ClientError> {
        let obs = observation_from_message(msg)?;
        let mut rng = decision_rng(self.seed, msg.hand_id, 0, obs.history.len());
        let action = self.agent.act(&obs, &mut rng);
        Ok(Decision {
            request: ActionRequest::from_action(action),
            fallback: false,
        })
    }
}

/// What a completed session amounted to.
#[derive(Debug, Clone)]
pub struct MatchOutcome {
    pub session_id: String,
    pub seed: u64,
    pub report: AivatReport,
    /// Decision points the agent answered.
    pub decisions: u64,
    /// How many of those fell back to check-else-fold.
    pub fallbacks: u64,
    pub elapsed_ms: u64,
}

/// Create a session and play it to completion: submit at every decision
/// point, poll past terminal states, and fetch the final report. A stall
/// guard bounds the protocol steps (no legal session needs anywhere near
/// 200 steps per hand).
pub fn run_session(
    transport: &mut dyn SessionTransport,
    agent: &mut dyn MessageAgent,
    request: &CreateSessionRequest,
) -> Result<MatchOutcome, ClientError> {
    let created = transport.create_session(request)?;
    drive(
        transport,
        agent,
        created.session_id,
        created.seed,
        Some(created.state),
        request.num_hands,
    )
}

/// Reconnect to an existing session and play the remainder — the recovery
/// path after a client crash or transport failure. Completed sessions just
/// return their report. `seed` and `num_hands` come from the original
/// creation (the caller persisted them).
pub fn resume_session(
    transport: &mut dyn SessionTransport,
    agent: &mut dyn MessageAgent,
    session_id: &str,
    seed: u64,
    num_hands: u64,
) -> Result<MatchOutcome, ClientError> {
    drive(transport, agent, session_id.to_string(), seed, None, num_hands)
}

fn drive(
    transport: &mut dyn SessionTransport,
    agent: &mut dyn MessageAgent,
    session_id: String,
    seed: u64,
    first_state: Option<GameStateMessage>,
    num_hands: u64,
) -> Result<MatchOutcome, ClientError> {
    let started = Instant::now();
    agent.on_session(seed);
    let mut msg = match first_state {
        Some(state) => state,
        None => transport.get_state(&session_id)?,
    };
    let mut decisions = 0u64;
    let mut fallbacks = 0u64;
    let max_steps = num_hands.saturating_mul(200).saturating_add(1000);
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps > max_steps {
            return Err(ClientError::Stalled(format!(
                "session {session_id} took more than {max_steps} protocol steps \
                 for {num_hands} hands"
            )));
        }
        if msg.viewer_to_act() {
            let decision = agent.decide(&msg)?;
            decisions += 1;
            if decision.fallback {
                fallbacks += 1;
            }
            msg = transport.submit_action(&session_id, &decision.request)?;
        } else if msg.game_state.is_hand_over && msg.hand_id + 1 >= num_hands {
            break;
        } else {
            // Terminal state of an earlier hand (or a hand we never act in):
            // ask for the current decision point.
            msg = transport.get_state(&session_id)?;
        }
    }
    let report = transport.get_metrics(&session_id)?;
    Ok(MatchOutcome {
        session_id,
        seed,
        report,
        decisions,
        fallbacks,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}
