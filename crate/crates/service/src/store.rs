//! The synchronous session store behind both the HTTP layer and
//! [`crate::LocalTransport`].

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, PoisonError, TryLockError};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use hunl_core::agents::{
    baseline_by_name, decision_rng, Agent, DecisionRecord, Observation, PlayedHand, Scripted,
};
use hunl_core::aivat::hunl::{evaluate_records, HunlEvalConfig};
use hunl_core::aivat::{AivatReport, EvalError};
use hunl_core::engine::{deal_hand, Action, GameConfig, HandState, Seat};
use hunl_core::protocol::{
    message_for_seat, sort_leaderboard, ActionRequest, CreateSessionRequest,
    CreateSessionResponse, GameStateMessage, LeaderboardEntry,
};
use hunl_core::record::{append_records, load_records, HandRecord};
use hunl_core::solver::hunl::{HouseAgent, HouseModel, HouseTrainConfig};

use crate::ServiceError;

const SESSION_FILE: &str = "session.json";
const HANDS_FILE: &str = "hands.jsonl";
const TIMEOUTS_FILE: &str = "timeouts.jsonl";
const HOUSE_CACHE_FILE: &str = "house-model.json";

/// Operator configuration; everything has a sensible local-mode default.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Root of all persisted state; one subdirectory per session.
    pub data_dir: PathBuf,
    /// Blinds and stacks served to every session.
    pub game: GameConfig,
    /// Pre-trained house checkpoint. When absent and a session asks for the
    /// house, a model is trained once with `house_train` and cached in
    /// `data_dir/house-model.json`.
    pub house_model_path: Option<PathBuf>,
    pub house_train: HouseTrainConfig,
    /// Evaluation knobs for the metrics endpoint.
    pub eval: HunlEvalConfig,
    /// Per-decision time budget. On expiry the service checks when possible,
    /// folds otherwise, and flags the hand. `None` disables the policy.
    pub decision_timeout: Option<Duration>,
    /// Require `Authorization: Bearer <token>` on every HTTP request.
    pub auth_token: Option<String>,
}

impl ServiceConfig {
    pub fn local(data_dir: impl Into<PathBuf>) -> ServiceConfig {
        ServiceConfig {
            data_dir: data_dir.into(),
            game: GameConfig::default(),
            house_model_path: None,
            house_train: HouseTrainConfig::default(),
            eval: HunlEvalConfig::default(),
            decision_timeout: None,
            auth_token: None,
        }
    }
}

/// The per-session facts that survive a restart. Written once at creation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub session_id: String,
    pub agent_name: String,
    /// Opponent spec string, rebuilt into an agent on resume.
    pub opponent: String,
    pub num_hands: u64,
    pub seed: u64,
    /// The external agent's seat; always 0 (the opponent sits at 1).
    pub agent_seat: Seat,
    pub config: GameConfig,
}

/// The hand currently awaiting the agent, if any.
struct CurrentHand {
    state: HandState,
    decisions: Vec<DecisionRecord>,
    /// The decision timeout fired at least once during this hand.
    timed_out: bool,
}

struct SessionSlot {
    meta: SessionMeta,
    dir: PathBuf,
    opponent: Box<dyn Agent + Sync>,
    current: Option<CurrentHand>,
    /// Terminal state of the most recently completed hand.
    last_terminal: Option<HandState>,
    records: Vec<HandRecord>,
    /// Hand ids completed under the timeout fallback.
    flagged: Vec<u64>,
    /// When the pending decision point was issued (runtime only).
    decision_issued: Option<Instant>,
    /// Metrics cache keyed by the record count it was computed over.
    cached_report: Option<(usize, AivatReport)>,
}

impl SessionSlot {
    fn completed(&self) -> u64 {
        self.records.len() as u64
    }

    fn message_for(&self, state: &HandState) -> GameStateMessage {
        message_for_seat(
            state,
            self.meta.agent_seat,
            [&self.meta.agent_name, self.opponent.name()],
        )
    }

    /// The idempotent current view: the pending decision point, or the final
    /// terminal state once every hand has been played.
    fn state_message(&self) -> Result<GameStateMessage, ServiceError> {
        if let Some(cur) = &self.current {
            return Ok(self.message_for(&cur.state));
        }
        let last = self.last_terminal.as_ref().ok_or_else(|| {
            ServiceError::Internal("session has neither a current hand nor history".into())
        })?;
        Ok(self.message_for(last))
    }

    fn deal_current(&mut self) {
        let hand_id = self.completed();
        let sb_seat = (hand_id % 2) as Seat;
        self.current = Some(CurrentHand {
            state: deal_hand(self.meta.config, self.meta.seed, hand_id, sb_seat),
            decisions: Vec::new(),
            timed_out: false,
        });
    }

    /// Record the finished current hand and append it to the log.
    fn finish_current(&mut self) -> Result<(), ServiceError> {
        let cur = self
            .current
            .take()
            .ok_or_else(|| ServiceError::Internal("no hand to finish".into()))?;
        let sb_seat = cur.state.sb_seat();
        let timed_out = cur.timed_out;
        let played = PlayedHand {
            state: cur.state,
            decisions: cur.decisions,
        };
        // External agents expose no strategy, so all-hands evaluation always
        // uses the opponent's policy as a flagged range proxy.
        let record =
            HandRecord::from_played(&played, self.meta.seed, sb_seat, self.meta.agent_seat, true);
        append_records(&self.dir.join(HANDS_FILE), std::slice::from_ref(&record))
            .map_err(|e| ServiceError::Internal(format!("appending hand log: {e}")))?;
        if timed_out {
            append_line(&self.dir.join(TIMEOUTS_FILE), &record.hand_id.to_string())
                .map_err(|e| ServiceError::Internal(format!("appending timeout log: {e}")))?;
            self.flagged.push(record.hand_id);
        }
        self.records.push(record);
        self.last_terminal = Some(played.state);
        self.decision_issued = None;
        Ok(())
    }

    /// Auto-play the opponent until the agent is to act or the hand ends.
    /// Returns true when the hand ended (and was recorded).
    fn run_until_agent(&mut self) -> Result<bool, ServiceError> {
        loop {
            let cur = self
                .current
                .as_ref()
                .ok_or_else(|| ServiceError::Internal("no current hand".into()))?;
            let seat = match cur.state.to_act() {
                None => {
                    self.finish_current()?;
                    return Ok(true);
                }
                Some(s) if s == self.meta.agent_seat => return Ok(false),
                Some(s) => s,
            };
            let obs = Observation::for_seat(&cur.state, seat)
                .map_err(|e| ServiceError::Internal(e.to_string()))?;
            let at_token = cur.state.history().len();
            let mut rng = decision_rng(self.meta.seed, cur.state.hand_id(), seat, at_token);
            let action = self.opponent.act(&obs, &mut rng);
            let distribution = self.opponent.strategy(&obs);
            let cur = self.current.as_mut().expect("still present");
            cur.decisions.push(DecisionRecord {
                seat,
                street: cur.state.street(),
                at_token,
                action,
                distribution,
            });
            cur.state = cur
                .state
                .apply_action(action)
                .map_err(|e| ServiceError::Internal(format!("opponent played illegally: {e}")))?;
        }
    }

    /// Drive the session to its next agent decision point, dealing and
    /// auto-playing whole hands as needed, or to completion.
    fn roll_forward(&mut self) -> Result<(), ServiceError> {
        loop {
            if self.current.is_none() {
                if self.completed() >= self.meta.num_hands {
                    self.decision_issued = None;
                    return Ok(());
                }
                self.deal_current();
            }
            if !self.run_until_agent()? {
                self.decision_issued = Some(Instant::now());
                return Ok(());
            }
        }
    }

    /// Apply a validated agent action and return the response message: the
    /// next decision point in the same hand, or — when the action closed the
    /// hand — that hand's terminal state (the session still rolls forward
    /// underneath, so the next `get_state` shows the following hand).
    fn apply_agent_action(
        &mut self,
        action: Action,
        via_timeout: bool,
    ) -> Result<GameStateMessage, ServiceError> {
        let cur = self.current.as_mut().ok_or(ServiceError::SessionComplete)?;
        cur.decisions.push(DecisionRecord {
            seat: self.meta.agent_seat,
            street: cur.state.street(),
            at_token: cur.state.history().len(),
            action,
            distribution: None,
        });
        if via_timeout {
            cur.timed_out = true;
        }
        cur.state = cur
            .state
            .apply_action(action)
            .map_err(|e| ServiceError::Internal(format!("validated action failed: {e}")))?;
        if self.run_until_agent()? {
            let ended = self
                .last_terminal
                .clone()
                .expect("finish_current just set it");
            let response = self.message_for(&ended);
            self.roll_forward()?;
            Ok(response)
        } else {
            self.decision_issued = Some(Instant::now());
            self.state_message()
        }
    }

    fn submit(&mut self, req: &ActionRequest) -> Result<GameStateMessage, ServiceError> {
        let action = req
            .to_action()
            .map_err(|e| ServiceError::Validation(e.to_string()))?;
        let cur = self.current.as_ref().ok_or(ServiceError::SessionComplete)?;
        let legal = cur
            .state
            .legal_actions()
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        if !legal.allows(action) {
            return Err(ServiceError::IllegalAction {
                detail: format!("{action} is not legal at this decision point"),
                legal: legal.base_letters().iter().map(|c| c.to_string()).collect(),
                raise: legal.raise.map(Into::into),
            });
        }
        self.apply_agent_action(action, false)
    }
}

/// All live sessions plus the shared house model; every operation is
/// synchronous and thread-safe.
pub struct Store {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionSlot>>>>,
    house: Mutex<Option<Arc<HouseModel>>>,
}

fn relock<'a, T>(
    r: Result<MutexGuard<'a, T>, PoisonError<MutexGuard<'a, T>>>,
) -> MutexGuard<'a, T> {
    r.unwrap_or_else(PoisonError::into_inner)
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

impl Store {
    /// Open (or create) the data directory and resume every persisted
    /// session to its exact decision point.
    pub fn open(config: ServiceConfig) -> Result<Store, ServiceError> {
        std::fs::create_dir_all(&config.data_dir)
            .map_err(|e| internal(format!("creating {}: {e}", config.data_dir.display())))?;
        let store = Store {
            config,
            sessions: Mutex::new(HashMap::new()),
            house: Mutex::new(None),
        };
        store.resume_all()?;
        Ok(store)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn resume_all(&self) -> Result<(), ServiceError> {
        let entries = std::fs::read_dir(&self.config.data_dir)
            .map_err(|e| internal(format!("reading data dir: {e}")))?;
        for entry in entries {
            let entry = entry.map_err(internal)?;
            let dir = entry.path();
            if !dir.join(SESSION_FILE).is_file() {
                continue;
            }
            let slot = self.resume_session(&dir)?;
            let id = slot.meta.session_id.clone();
            relock(self.sessions.lock()).insert(id, Arc::new(Mutex::new(slot)));
        }
        Ok(())
    }

    fn resume_session(&self, dir: &Path) -> Result<SessionSlot, ServiceError> {
        let meta_path = dir.join(SESSION_FILE);
        let meta: SessionMeta = serde_json::from_slice(
            &std::fs::read(&meta_path)
                .map_err(|e| internal(format!("{}: {e}", meta_path.display())))?,
        )
        .map_err(|e| internal(format!("{}: {e}", meta_path.display())))?;
        let hands_path = dir.join(HANDS_FILE);
        let records = if hands_path.is_file() {
            load_records(&hands_path).map_err(|e| internal(format!("loading hand log: {e}")))?
        } else {
            Vec::new()
        };
        if records.len() as u64 > meta.num_hands {
            return Err(internal(format!(
                "session {} has {} recorded hands but only {} were requested",
                meta.session_id,
                records.len(),
                meta.num_hands
            )));
        }
        let flagged = read_flags(&dir.join(TIMEOUTS_FILE)).map_err(internal)?;
        let opponent = self.build_opponent(&meta.opponent)?;
        let last_terminal = records
            .last()
            .map(|r| r.replay().map_err(|e| internal(format!("replaying hand log: {e}"))))
            .transpose()?;
        let mut slot = SessionSlot {
            meta,
            dir: dir.to_path_buf(),
            opponent,
            current: None,
            last_terminal,
            records,
            flagged,
            decision_issued: None,
            cached_report: None,
        };
        slot.roll_forward()?;
        Ok(slot)
    }

    /// The shared house model: the configured checkpoint, the cached
    /// auto-trained model, or a fresh training run (once).
    pub fn house_model(&self) -> Result<Arc<HouseModel>, ServiceError> {
        let mut cache = relock(self.house.lock());
        if let Some(m) = cache.as_ref() {
            return Ok(m.clone());
        }
        let model = if let Some(path) = &self.config.house_model_path {
            HouseModel::load(path)
                .map_err(|e| internal(format!("house checkpoint {}: {e}", path.display())))?
        } else {
            let default_path = self.config.data_dir.join(HOUSE_CACHE_FILE);
            if default_path.is_file() {
                HouseModel::load(&default_path)
                    .map_err(|e| internal(format!("cached house model: {e}")))?
            } else {
                let model = HouseModel::train(self.config.game, self.config.house_train.clone());
                model
                    .save(&default_path)
                    .map_err(|e| internal(format!("caching house model: {e}")))?;
                model
            }
        };
        let arc = Arc::new(model);
        *cache = Some(arc.clone());
        Ok(arc)
    }

    fn build_opponent(&self, spec: &str) -> Result<Box<dyn Agent + Sync>, ServiceError> {
        if let Some(agent) = baseline_by_name(spec) {
            return Ok(agent);
        }
        if spec == "house" {
            return Ok(Box::new(HouseAgent::new(self.house_model()?)));
        }
        if let Some(scripts) = spec.strip_prefix("scripted:") {
            return Ok(Box::new(parse_scripted(scripts)?));
        }
        Err(ServiceError::UnknownOpponent(spec.to_string()))
    }

    fn slot(&self, session_id: &str) -> Result<Arc<Mutex<SessionSlot>>, ServiceError> {
        relock(self.sessions.lock())
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))
    }

    fn fresh_session_id(&self) -> String {
        loop {
            let id = format!("s{:016x}", rand::random::<u64>());
            if !self.config.data_dir.join(&id).exists() {
                return id;
            }
        }
    }

    pub fn create_session(
        &self,
        req: &CreateSessionRequest,
    ) -> Result<CreateSessionResponse, ServiceError> {
        if req.num_hands == 0 {
            return Err(ServiceError::Validation("num_hands must be at least 1".into()));
        }
        if req.agent_name.trim().is_empty() {
            return Err(ServiceError::Validation("agent_name must not be empty".into()));
        }
        let opponent = self.build_opponent(&req.opponent)?;
        let seed = req.seed.unwrap_or_else(rand::random);
        let session_id = self.fresh_session_id();
        let dir = self.config.data_dir.join(&session_id);
        std::fs::create_dir_all(&dir).map_err(|e| internal(format!("creating session dir: {e}")))?;
        let meta = SessionMeta {
            session_id: session_id.clone(),
            agent_name: req.agent_name.clone(),
            opponent: req.opponent.clone(),
            num_hands: req.num_hands,
            seed,
            agent_seat: 0,
            config: self.config.game,
        };
        write_json_atomic(&dir.join(SESSION_FILE), &meta)
            .map_err(|e| internal(format!("persisting session: {e}")))?;
        let mut slot = SessionSlot {
            meta,
            dir,
            opponent,
            current: None,
            last_terminal: None,
            records: Vec::new(),
            flagged: Vec::new(),
            decision_issued: None,
            cached_report: None,
        };
        slot.roll_forward()?;
        let state = slot.state_message()?;
        relock(self.sessions.lock()).insert(session_id.clone(), Arc::new(Mutex::new(slot)));
        Ok(CreateSessionResponse {
            session_id,
            seed,
            state,
        })
    }

    /// Idempotent: returns the pending decision point (or final terminal
    /// state) without changing anything.
    pub fn get_state(&self, session_id: &str) -> Result<GameStateMessage, ServiceError> {
        let slot = self.slot(session_id)?;
        let guard = relock(slot.lock());
        guard.state_message()
    }

    /// Apply one agent action. A second concurrent submission to the same
    /// session is rejected with [`ServiceError::Busy`] rather than queued.
    pub fn submit_action(
        &self,
        session_id: &str,
        req: &ActionRequest,
    ) -> Result<GameStateMessage, ServiceError> {
        let slot = self.slot(session_id)?;
        let mut guard = match slot.try_lock() {
            Ok(g) => g,
            Err(TryLockError::Poisoned(p)) => p.into_inner(),
            Err(TryLockError::WouldBlock) => return Err(ServiceError::Busy),
        };
        guard.submit(req)
    }

    /// The match report over all completed hands, with the opponent standing
    /// in as the agent's range (every service session evaluates an external
    /// agent, which exposes no strategy of its own).
    pub fn metrics(&self, session_id: &str) -> Result<AivatReport, ServiceError> {
        let slot = self.slot(session_id)?;
        let mut guard = relock(slot.lock());
        self.report_locked(&mut guard)
    }

    fn report_locked(&self, slot: &mut SessionSlot) -> Result<AivatReport, ServiceError> {
        if slot.records.is_empty() {
            return Err(ServiceError::NoHands);
        }
        if let Some((n, report)) = &slot.cached_report {
            if *n == slot.records.len() {
                return Ok(*report);
            }
        }
        let report = evaluate_records(&slot.records, Some(&*slot.opponent), &self.config.eval)
            .map_err(|e| match e {
                EvalError::Empty => ServiceError::NoHands,
                other => internal(other),
            })?;
        slot.cached_report = Some((slot.records.len(), report));
        Ok(report)
    }

    /// Hand ids completed by the timeout fallback in this session.
    pub fn flags(&self, session_id: &str) -> Result<Vec<u64>, ServiceError> {
        let slot = self.slot(session_id)?;
        let guard = relock(slot.lock());
        Ok(guard.flagged.clone())
    }

    /// One entry per session with at least one completed hand, ordered by
    /// the rank key (lower bound of the 95% interval on the adjusted score).
    pub fn leaderboard(&self) -> Result<Vec<LeaderboardEntry>, ServiceError> {
        let slots: Vec<Arc<Mutex<SessionSlot>>> =
            relock(self.sessions.lock()).values().cloned().collect();
        let mut entries = Vec::new();
        for slot in slots {
            let mut guard = relock(slot.lock());
            if guard.records.is_empty() {
                continue;
            }
            let report = self.report_locked(&mut guard)?;
            entries.push(LeaderboardEntry {
                agent_name: guard.meta.agent_name.clone(),
                rank_key: report.rank_key(),
                report,
            });
        }
        sort_leaderboard(&mut entries);
        Ok(entries)
    }

    /// Apply the timeout fallback (check when possible, fold otherwise) to
    /// every session whose pending decision has outlived the configured
    /// budget. Returns how many decisions were forced. No-op without a
    /// configured timeout.
    pub fn sweep_timeouts(&self) -> usize {
        let Some(timeout) = self.config.decision_timeout else {
            return 0;
        };
        let slots: Vec<Arc<Mutex<SessionSlot>>> =
            relock(self.sessions.lock()).values().cloned().collect();
        let mut forced = 0;
        for slot in slots {
            // Skip sessions mid-request; their decision clock restarts.
            let Ok(mut guard) = slot.try_lock() else {
                continue;
            };
            let Some(issued) = guard.decision_issued else {
                continue;
            };
            if issued.elapsed() < timeout {
                continue;
            }
            let Some(cur) = guard.current.as_ref() else {
                continue;
            };
            let Ok(legal) = cur.state.legal_actions() else {
                continue;
            };
            let action = if legal.can_check {
                Action::Check
            } else {
                Action::Fold
            };
            if guard.apply_agent_action(action, true).is_ok() {
                forced += 1;
            }
        }
        forced
    }
}

fn parse_scripted(spec: &str) -> Result<Scripted, ServiceError> {
    Scripted::from_spec(spec).map_err(ServiceError::Validation)
}

fn write_json_atomic(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let dir = path.parent().expect("session files live inside a directory");
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, value).map_err(std::io::Error::other)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn append_line(path: &Path, line: &str) -> std::io::Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(file, "{line}")?;
    file.flush()
}

fn read_flags(path: &Path) -> std::io::Result<Vec<u64>> {
    if !path.is_file() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for line in std::fs::read_to_string(path)?.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{path:?}: {e}"))
        })?);
    }
    Ok(out)
}
