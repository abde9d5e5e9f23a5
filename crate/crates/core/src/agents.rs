//! Agent abstraction and scripted baseline opponents.
//!
//! Agents are stateless with respect to randomness: every decision receives
//! its own RNG derived from `(match_seed, hand_index, seat, decision index)`,
//! so a crashed match resumes with bit-identical play. Agents that can state
//! their full mixed strategy at a decision point expose it through
//! [`Agent::strategy`]; the evaluator uses those distributions for its
//! variance corrections and the range extractor renders them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::Card;
use crate::engine::{
    deal_hand, Action, Chips, GameConfig, HandState, HistoryToken, LegalActions, Seat, Street,
};
use crate::error::EngineError;

/// Table position; heads-up, the small blind is also the button.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Position {
    SB,
    BB,
}

impl Position {
    pub fn of(seat: Seat, sb_seat: Seat) -> Position {
        if seat == sb_seat {
            Position::SB
        } else {
            Position::BB
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Position::SB => "SB",
            Position::BB => "BB",
        }
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything an agent may legitimately see at its own decision point.
/// Opponent hole cards never appear here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub config: GameConfig,
    pub hand_id: u64,
    pub position: Position,
    pub street: Street,
    pub board: Vec<Card>,
    pub hole: [Card; 2],
    pub own_stack: Chips,
    pub opp_stack: Chips,
    pub own_round_committed: Chips,
    pub opp_round_committed: Chips,
    pub common_pot: Chips,
    pub total_pot: Chips,
    pub legal: LegalActions,
    pub history: Vec<HistoryToken>,
}

impl Observation {
    /// Build the acting player's view of an in-progress hand.
    pub fn from_state(state: &HandState) -> Result<Observation, EngineError> {
        let seat = state.to_act().ok_or(EngineError::TerminalState)?;
        Ok(Observation::for_seat(state, seat)?)
    }

    /// Build `seat`'s view; `seat` need not be the one to act (the evaluator
    /// queries strategies at substituted states).
    pub fn for_seat(state: &HandState, seat: Seat) -> Result<Observation, EngineError> {
        let legal = state.legal_actions()?;
        Ok(Observation {
            config: *state.config(),
            hand_id: state.hand_id(),
            position: Position::of(seat, state.sb_seat()),
            street: state.street(),
            board: state.board().to_vec(),
            hole: state.hole_cards(seat),
            own_stack: state.stacks()[seat],
            opp_stack: state.stacks()[1 - seat],
            own_round_committed: state.round_committed()[seat],
            opp_round_committed: state.round_committed()[1 - seat],
            common_pot: state.common_pot(),
            total_pot: state.total_pot(),
            legal,
            history: state.history().to_vec(),
        })
    }

    /// Chips owed to continue (zero when checking is legal).
    pub fn call_amount(&self) -> Chips {
        self.opp_round_committed.saturating_sub(self.own_round_committed)
    }

    /// Count of this player's own prior actions in the hand.
    pub fn own_actions_taken(&self) -> usize {
        // Reconstruct turn order: SB first preflop, BB first on later streets.
        let mut is_own_turn = self.position == Position::SB;
        let mut own = 0;
        for tok in &self.history {
            match tok {
                HistoryToken::StreetEnd => {
                    is_own_turn = self.position == Position::BB;
                }
                HistoryToken::Action(_) => {
                    if is_own_turn {
                        own += 1;
                    }
                    is_own_turn = !is_own_turn;
                }
            }
        }
        own
    }
}

/// A support point of a mixed strategy. `BetUniform` is a uniform draw over
/// every legal integer bet-to amount in `[min, max]`, letting agents like the
/// uniform-random baseline state their law exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StrategyAction {
    Fixed(Action),
    BetUniform { min: Chips, max: Chips },
}

/// A mixed strategy over one decision point. Weights sum to 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub entries: Vec<(StrategyAction, f64)>,
}

impl ActionDistribution {
    pub fn pure(action: Action) -> ActionDistribution {
        ActionDistribution {
            entries: vec![(StrategyAction::Fixed(action), 1.0)],
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Probability this strategy plays exactly `action`.
    pub fn probability_of(&self, action: Action) -> f64 {
        let mut p = 0.0;
        for (sa, w) in &self.entries {
            match sa {
                StrategyAction::Fixed(a) if *a == action => p += w,
                StrategyAction::BetUniform { min, max } => {
                    if let Action::BetTo(x) = action {
                        if (*min..=*max).contains(&x) {
                            p += w / (max - min + 1) as f64;
                        }
                    }
                }
                _ => {}
            }
        }
        p
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Action {
        let total = self.total_weight();
        debug_assert!(total > 0.0);
        let mut draw = rng.random_range(0.0..total);
        let mut chosen = self.entries.last().map(|(sa, _)| *sa).unwrap();
        for (sa, w) in &self.entries {
            if draw < *w {
                chosen = *sa;
                break;
            }
            draw -= w;
        }
        match chosen {
            StrategyAction::Fixed(a) => a,
            StrategyAction::BetUniform { min, max } => Action::BetTo(rng.random_range(min..=max)),
        }
    }

    /// Collapse to `(fold, check/call, bet/raise)` mass for range rendering.
    pub fn base_frequencies(&self) -> [f64; 3] {
        let mut f = [0.0; 3];
        for (sa, w) in &self.entries {
            match sa {
                StrategyAction::Fixed(Action::Fold) => f[0] += w,
                StrategyAction::Fixed(Action::Check) | StrategyAction::Fixed(Action::Call) => {
                    f[1] += w
                }
                StrategyAction::Fixed(Action::BetTo(_)) | StrategyAction::BetUniform { .. } => {
                    f[2] += w
                }
            }
        }
        f
    }
}

/// A (possibly stochastic) player. Implementations must be deterministic
/// given the observation and the supplied RNG.
pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Choose a legal action.
    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Action;

    /// The full mixed strategy at this decision, when the agent can state it.
    /// Agents that can are "queryable": the evaluator may ask about decision
    /// points the agent never actually faced, including with substituted hole
    /// cards.
    fn strategy(&self, _obs: &Observation) -> Option<ActionDistribution> {
        None
    }
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Action {
        (**self).act(obs, rng)
    }

    fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
        (**self).strategy(obs)
    }
}

/// Per-decision RNG, derived (not sequential) so that resuming a match
/// replays identical randomness regardless of where the process stopped.
pub fn decision_rng(match_seed: u64, hand_index: u64, seat: Seat, decision: usize) -> ChaCha8Rng {
    let mut x = match_seed ^ 0x517c_c1b7_2722_0a95;
    let mut mix = |v: u64| {
        x ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).rotate_left(23);
        // splitmix64 finalizer keeps the per-field entropy well spread.
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x = z ^ (z >> 31);
    };
    mix(hand_index);
    mix(seat as u64);
    mix(decision as u64);
    ChaCha8Rng::seed_from_u64(x)
}

/// Checks when possible, otherwise calls. Never folds, never raises.
#[derive(Debug, Clone, Default)]
pub struct CheckCall;

impl Agent for CheckCall {
    fn name(&self) -> &str {
        "check-call"
    }

    fn act(&mut self, obs: &Observation, _rng: &mut dyn RngCore) -> Action {
        if obs.legal.can_check {
            Action::Check
        } else {
            Action::Call
        }
    }

    fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
        Some(ActionDistribution::pure(if obs.legal.can_check {
            Action::Check
        } else {
            Action::Call
        }))
    }
}

/// Folds whenever folding is legal; checks when there is nothing to fold to.
#[derive(Debug, Clone, Default)]
pub struct AlwaysFold;

impl Agent for AlwaysFold {
    fn name(&self) -> &str {
        "always-fold"
    }

    fn act(&mut self, obs: &Observation, _rng: &mut dyn RngCore) -> Action {
        if obs.legal.can_fold {
            Action::Fold
        } else {
            Action::Check
        }
    }

    fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
        Some(ActionDistribution::pure(if obs.legal.can_fold {
            Action::Fold
        } else {
            Action::Check
        }))
    }
}

/// Shoves all-in at every opportunity; calls when already facing an all-in.
#[derive(Debug, Clone, Default)]
pub struct AllIn;

impl AllIn {
    fn choose(obs: &Observation) -> Action {
        match obs.legal.raise {
            Some(r) => Action::BetTo(r.max),
            None if obs.legal.can_call => Action::Call,
            None => Action::Check,
        }
    }
}

impl Agent for AllIn {
    fn name(&self) -> &str {
        "all-in"
    }

    fn act(&mut self, obs: &Observation, _rng: &mut dyn RngCore) -> Action {
        AllIn::choose(obs)
    }

    fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
        Some(ActionDistribution::pure(AllIn::choose(obs)))
    }
}

/// Picks uniformly among the available base actions (fold / check / call /
/// bet); a bet's size is then uniform over the legal bet-to range.
#[derive(Debug, Clone, Default)]
pub struct UniformRandom;

impl UniformRandom {
    fn law(obs: &Observation) -> ActionDistribution {
        let mut entries = Vec::new();
        if obs.legal.can_fold {
            entries.push((StrategyAction::Fixed(Action::Fold), 0.0));
        }
        if obs.legal.can_check {
            entries.push((StrategyAction::Fixed(Action::Check), 0.0));
        }
        if obs.legal.can_call {
            entries.push((StrategyAction::Fixed(Action::Call), 0.0));
        }
        if let Some(r) = obs.legal.raise {
            entries.push((StrategyAction::BetUniform { min: r.min, max: r.max }, 0.0));
        }
        let w = 1.0 / entries.len() as f64;
        for e in &mut entries {
            e.1 = w;
        }
        ActionDistribution { entries }
    }
}

impl Agent for UniformRandom {
    fn name(&self) -> &str {
        "uniform-random"
    }

    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Action {
        UniformRandom::law(obs).sample(rng)
    }

    fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
        Some(UniformRandom::law(obs))
    }
}

/// Replays a fixed per-position script, one entry per own decision; falls
/// back to check/call once the script runs out. Used for protocol fixtures.
#[derive(Debug, Clone)]
pub struct Scripted {
    name: String,
    sb_script: Vec<Action>,
    bb_script: Vec<Action>,
}

impl Scripted {
    pub fn new(name: impl Into<String>, sb_script: Vec<Action>, bb_script: Vec<Action>) -> Scripted {
        Scripted {
            name: name.into(),
            sb_script,
            bb_script,
        }
    }

    /// Parse a spec like `"SB=b200,c;BB=k,f"` — per-position action tokens in
    /// the wire vocabulary. Either position may be omitted (empty script).
    pub fn from_spec(spec: &str) -> Result<Scripted, String> {
        let mut sb = Vec::new();
        let mut bb = Vec::new();
        for part in spec.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (position, tokens) = part.split_once('=').ok_or_else(|| {
                format!("scripted parts look like SB=b200,c;BB=k,f — got {part:?}")
            })?;
            let actions = tokens
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(parse_action_token)
                .collect::<Result<Vec<Action>, String>>()?;
            match position.trim() {
                "SB" => sb = actions,
                "BB" => bb = actions,
                other => {
                    return Err(format!("scripted position must be SB or BB, got {other:?}"))
                }
            }
        }
        Ok(Scripted::new("scripted", sb, bb))
    }
}

fn parse_action_token(token: &str) -> Result<Action, String> {
    match token {
        "f" => Ok(Action::Fold),
        "k" => Ok(Action::Check),
        "c" => Ok(Action::Call),
        _ => token
            .strip_prefix('b')
            .and_then(|x| x.parse().ok())
            .map(Action::BetTo)
            .ok_or_else(|| format!("unknown action token {token:?}")),
    }
}

impl Agent for Scripted {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, obs: &Observation, _rng: &mut dyn RngCore) -> Action {
        let script = match obs.position {
            Position::SB => &self.sb_script,
            Position::BB => &self.bb_script,
        };
        match script.get(obs.own_actions_taken()) {
            Some(a) => *a,
            None if obs.legal.can_check => Action::Check,
            None => Action::Call,
        }
    }
}

/// Construct a baseline agent by its CLI name. The box is `Sync` so a
/// baseline can double as the range source of a parallel evaluation.
pub fn baseline_by_name(name: &str) -> Option<Box<dyn Agent + Sync>> {
    match name {
        "check-call" => Some(Box::new(CheckCall)),
        "always-fold" => Some(Box::new(AlwaysFold)),
        "all-in" => Some(Box::new(AllIn)),
        "uniform-random" => Some(Box::new(UniformRandom)),
        _ => None,
    }
}

/// One agent decision inside a played hand, with the mixed strategy it was
/// sampled from when the agent is queryable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub seat: Seat,
    pub street: Street,
    /// History length (token count) when the decision was made; doubles as
    /// the decision index for RNG derivation.
    pub at_token: usize,
    pub action: Action,
    pub distribution: Option<ActionDistribution>,
}

/// A finished hand plus the decision log needed for evaluation.
#[derive(Debug, Clone)]
pub struct PlayedHand {
    pub state: HandState,
    pub decisions: Vec<DecisionRecord>,
}

/// Play one hand to completion. `agents[seat]` acts for that seat; the small
/// blind sits at `sb_seat`. Deterministic in `(seed, hand_index, sb_seat)`.
pub fn play_hand(
    config: GameConfig,
    seed: u64,
    hand_index: u64,
    sb_seat: Seat,
    agents: &mut [&mut dyn Agent; 2],
) -> Result<PlayedHand, EngineError> {
    let mut state = deal_hand(config, seed, hand_index, sb_seat);
    let mut decisions = Vec::new();
    while !state.is_terminal() {
        let seat = state.to_act().unwrap();
        let obs = Observation::from_state(&state)?;
        let at_token = obs.history.len();
        let mut rng = decision_rng(seed, hand_index, seat, at_token);
        let action = agents[seat].act(&obs, &mut rng);
        let distribution = agents[seat].strategy(&obs);
        decisions.push(DecisionRecord {
            seat,
            street: state.street(),
            at_token,
            action,
            distribution,
        });
        state = state.apply_action(action)?;
    }
    Ok(PlayedHand { state, decisions })
}
