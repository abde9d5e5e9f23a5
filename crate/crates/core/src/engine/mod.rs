//! Deterministic heads-up no-limit hold'em rules engine.
//!
//! States are immutable values: [`HandState::apply_action`] returns a new
//! state and never mutates on error, so every operation is safe to call from
//! many threads.
//!
//! Betting rules follow the ACPC no-limit convention: blinds 50/100, stacks
//! reset every hand, the small blind acts first preflop and the big blind
//! acts first on every later street. A raise must increase the bet-to level
//! by at least the largest prior bet/raise increment this street (minimum one
//! big blind); the all-in below that minimum is legal. With equal starting
//! stacks a short all-in can never be re-raised anyway, so no extra
//! "betting reopened" bookkeeping is needed.

pub mod codec;
mod eval;

pub use eval::{evaluate_seven, HandCategory, HandRank};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::Card;
use crate::error::EngineError;

pub type Chips = u32;
pub type Seat = usize;

/// Blinds and stack configuration. Stacks reset to `starting_stack` every hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    small_blind: Chips,
    big_blind: Chips,
    starting_stack: Chips,
}

impl GameConfig {
    pub fn new(
        small_blind: Chips,
        big_blind: Chips,
        starting_stack: Chips,
    ) -> Result<GameConfig, EngineError> {
        if small_blind == 0 || small_blind >= big_blind || big_blind > starting_stack {
            return Err(EngineError::InvalidConfig(format!(
                "need 0 < small_blind < big_blind <= starting_stack, got {small_blind}/{big_blind}/{starting_stack}"
            )));
        }
        Ok(GameConfig {
            small_blind,
            big_blind,
            starting_stack,
        })
    }

    pub fn small_blind(&self) -> Chips {
        self.small_blind
    }

    pub fn big_blind(&self) -> Chips {
        self.big_blind
    }

    pub fn starting_stack(&self) -> Chips {
        self.starting_stack
    }
}

impl Default for GameConfig {
    /// The benchmark configuration: blinds 50/100, 200bb stacks.
    fn default() -> GameConfig {
        GameConfig::new(50, 100, 20_000).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Street {
    Preflop,
    Flop,
    Turn,
    River,
}

impl Street {
    pub fn board_len(self) -> usize {
        match self {
            Street::Preflop => 0,
            Street::Flop => 3,
            Street::Turn => 4,
            Street::River => 5,
        }
    }

    pub fn next(self) -> Option<Street> {
        match self {
            Street::Preflop => Some(Street::Flop),
            Street::Flop => Some(Street::Turn),
            Street::Turn => Some(Street::River),
            Street::River => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Street::Preflop => "preflop",
            Street::Flop => "flop",
            Street::Turn => "turn",
            Street::River => "river",
        }
    }
}

/// A player action. `BetTo` is the total chips committed by the actor in the
/// current betting round, matching the `bX` wire encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Fold,
    Check,
    Call,
    BetTo(Chips),
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::Fold => write!(f, "f"),
            Action::Check => write!(f, "k"),
            Action::Call => write!(f, "c"),
            Action::BetTo(x) => write!(f, "b{x}"),
        }
    }
}

/// One entry of a hand's action history: an action or the `'_'` separator
/// appended whenever a betting round closes (never after the river).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HistoryToken {
    Action(Action),
    StreetEnd,
}

impl std::fmt::Display for HistoryToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HistoryToken::Action(a) => write!(f, "{a}"),
            HistoryToken::StreetEnd => write!(f, "_"),
        }
    }
}

/// Inclusive bet-to bounds when betting/raising is legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaiseRange {
    pub min: Chips,
    pub max: Chips,
}

/// The legal action set at a decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalActions {
    pub can_fold: bool,
    pub can_check: bool,
    pub can_call: bool,
    pub raise: Option<RaiseRange>,
}

impl LegalActions {
    pub fn allows(&self, action: Action) -> bool {
        match action {
            Action::Fold => self.can_fold,
            Action::Check => self.can_check,
            Action::Call => self.can_call,
            Action::BetTo(x) => self
                .raise
                .map(|r| (r.min..=r.max).contains(&x))
                .unwrap_or(false),
        }
    }

    /// Base-action letters in the wire order `f, k, c, b`.
    pub fn base_letters(&self) -> Vec<char> {
        let mut out = Vec::new();
        if self.can_fold {
            out.push('f');
        }
        if self.can_check {
            out.push('k');
        }
        if self.can_call {
            out.push('c');
        }
        if self.raise.is_some() {
            out.push('b');
        }
        out
    }
}

impl std::fmt::Display for LegalActions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self
            .base_letters()
            .iter()
            .map(|c| c.to_string())
            .collect();
        if let Some(r) = self.raise {
            let last = parts.last_mut().unwrap();
            *last = format!("b[{}..{}]", r.min, r.max);
        }
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// The full deal for one hand: both players' hole cards, plus the board in
/// reveal order (cards beyond the current street stay hidden until dealt).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deal {
    pub hole: [[Card; 2]; 2],
    pub board: [Card; 5],
}

impl Deal {
    pub fn all_cards(&self) -> [Card; 9] {
        [
            self.hole[0][0],
            self.hole[0][1],
            self.hole[1][0],
            self.hole[1][1],
            self.board[0],
            self.board[1],
            self.board[2],
            self.board[3],
            self.board[4],
        ]
    }
}

/// How a hand ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Fold { folder: Seat },
    Showdown,
}

/// Complete state of one hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandState {
    config: GameConfig,
    hand_id: u64,
    sb_seat: Seat,
    deal: Deal,
    street: Street,
    board_dealt: usize,
    stacks: [Chips; 2],
    round_committed: [Chips; 2],
    common_pot: Chips,
    to_act: Option<Seat>,
    history: Vec<HistoryToken>,
    level: Chips,
    largest_increment: Chips,
    actions_this_street: u32,
    outcome: Option<Outcome>,
    winnings: Option<[i64; 2]>,
}

/// Deterministic shuffle for a hand.
///
/// The deal RNG is ChaCha8 seeded with `seed_from_u64(match_seed)` and stream
/// set to `hand_index`. The deck starts in [`Card::from_index`] order and is
/// shuffled by a Fisher–Yates pass: for `i` from 51 down to 1, swap index `i`
/// with `next_u64() % (i + 1)`. Cards are then dealt in order: two to seat 0,
/// two to seat 1, then the five board cards.
pub fn shuffled_deck(seed: u64, hand_index: u64) -> Vec<Card> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(hand_index);
    let mut deck: Vec<Card> = crate::cards::full_deck();
    for i in (1..52usize).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        deck.swap(i, j);
    }
    deck
}

/// Deal a fresh hand: blinds posted, small blind to act.
pub fn deal_hand(config: GameConfig, seed: u64, hand_index: u64, sb_seat: Seat) -> HandState {
    let deck = shuffled_deck(seed, hand_index);
    let deal = Deal {
        hole: [[deck[0], deck[1]], [deck[2], deck[3]]],
        board: [deck[4], deck[5], deck[6], deck[7], deck[8]],
    };
    HandState::from_deal(config, hand_index, sb_seat, deal)
}

impl HandState {
    /// Start a hand from an explicit deal (used for replay and tests).
    pub fn from_deal(config: GameConfig, hand_id: u64, sb_seat: Seat, deal: Deal) -> HandState {
        assert!(sb_seat < 2);
        let bb_seat = 1 - sb_seat;
        let mut stacks = [config.starting_stack; 2];
        let mut round_committed = [0; 2];
        stacks[sb_seat] -= config.small_blind;
        round_committed[sb_seat] = config.small_blind;
        stacks[bb_seat] -= config.big_blind;
        round_committed[bb_seat] = config.big_blind;
        HandState {
            config,
            hand_id,
            sb_seat,
            deal,
            street: Street::Preflop,
            board_dealt: 0,
            stacks,
            round_committed,
            common_pot: 0,
            to_act: Some(sb_seat),
            history: Vec::new(),
            level: config.big_blind,
            largest_increment: config.big_blind,
            actions_this_street: 0,
            outcome: None,
            winnings: None,
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn hand_id(&self) -> u64 {
        self.hand_id
    }

    pub fn sb_seat(&self) -> Seat {
        self.sb_seat
    }

    pub fn bb_seat(&self) -> Seat {
        1 - self.sb_seat
    }

    pub fn deal(&self) -> &Deal {
        &self.deal
    }

    pub fn street(&self) -> Street {
        self.street
    }

    /// Board cards revealed so far.
    pub fn board(&self) -> &[Card] {
        &self.deal.board[..self.board_dealt]
    }

    pub fn hole_cards(&self, seat: Seat) -> [Card; 2] {
        self.deal.hole[seat]
    }

    pub fn stacks(&self) -> [Chips; 2] {
        self.stacks
    }

    pub fn round_committed(&self) -> [Chips; 2] {
        self.round_committed
    }

    /// Chips banked from completed betting rounds.
    pub fn common_pot(&self) -> Chips {
        self.common_pot
    }

    pub fn total_pot(&self) -> Chips {
        self.common_pot + self.round_committed[0] + self.round_committed[1]
    }

    pub fn to_act(&self) -> Option<Seat> {
        self.to_act
    }

    pub fn history(&self) -> &[HistoryToken] {
        &self.history
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    /// Net chip result per seat, present once the hand is terminal.
    pub fn winnings(&self) -> Option<[i64; 2]> {
        self.winnings
    }

    /// Lifetime chips this seat has put into the pot this hand.
    pub fn contributed(&self, seat: Seat) -> Chips {
        self.config.starting_stack - self.stacks[seat]
    }

    /// Who acts first on post-flop streets (the big blind in heads-up).
    fn postflop_first(&self) -> Seat {
        self.bb_seat()
    }

    pub fn legal_actions(&self) -> Result<LegalActions, EngineError> {
        let actor = self.to_act.ok_or(EngineError::TerminalState)?;
        let outstanding = self.level - self.round_committed[actor];
        let all_in_total = self.round_committed[actor] + self.stacks[actor];
        let raise = if all_in_total > self.level {
            let full_min = self.level + self.largest_increment;
            Some(RaiseRange {
                min: full_min.min(all_in_total),
                max: all_in_total,
            })
        } else {
            None
        };
        Ok(LegalActions {
            can_fold: outstanding > 0,
            can_check: outstanding == 0,
            can_call: outstanding > 0,
            raise,
        })
    }

    /// Apply a legal action, returning the successor state. The input state is
    /// never mutated; illegal actions are rejected carrying the legal set.
    pub fn apply_action(&self, action: Action) -> Result<HandState, EngineError> {
        let legal = self.legal_actions()?;
        if !legal.allows(action) {
            return Err(EngineError::IllegalAction {
                attempted: action.to_string(),
                legal,
            });
        }
        let actor = self.to_act.unwrap();
        let mut next = self.clone();
        next.history.push(HistoryToken::Action(action));
        next.actions_this_street += 1;
        match action {
            Action::Fold => {
                let winner = 1 - actor;
                let lost = next.contributed(actor) as i64;
                let mut winnings = [0i64; 2];
                winnings[winner] = lost;
                winnings[actor] = -lost;
                next.outcome = Some(Outcome::Fold { folder: actor });
                next.winnings = Some(winnings);
                next.to_act = None;
            }
            Action::Check => {
                if next.round_closed() {
                    next.close_street();
                } else {
                    next.to_act = Some(1 - actor);
                }
            }
            Action::Call => {
                let owed = next.level - next.round_committed[actor];
                debug_assert!(owed <= next.stacks[actor]);
                next.stacks[actor] -= owed;
                next.round_committed[actor] += owed;
                if next.round_closed() {
                    next.close_street();
                } else {
                    next.to_act = Some(1 - actor);
                }
            }
            Action::BetTo(target) => {
                let add = target - next.round_committed[actor];
                debug_assert!(add <= next.stacks[actor]);
                next.stacks[actor] -= add;
                next.round_committed[actor] = target;
                next.largest_increment = next.largest_increment.max(target - next.level);
                next.level = target;
                next.to_act = Some(1 - actor);
            }
        }
        debug_assert_eq!(
            next.stacks[0] + next.stacks[1] + next.total_pot(),
            2 * next.config.starting_stack
        );
        Ok(next)
    }

    /// A betting round closes once both players have acted voluntarily and
    /// their round contributions match. The preflop big-blind option falls out
    /// of the "both acted" half: a small-blind limp equalizes contributions
    /// after one action, so the big blind still gets to act.
    fn round_closed(&self) -> bool {
        self.round_committed[0] == self.round_committed[1] && self.actions_this_street >= 2
    }

    fn close_street(&mut self) {
        self.common_pot += self.round_committed[0] + self.round_committed[1];
        self.round_committed = [0; 2];
        if self.street == Street::River {
            self.finish_showdown();
            return;
        }
        // One separator per street transition; the river has no trailing one.
        self.history.push(HistoryToken::StreetEnd);
        if self.stacks[0] == 0 && self.stacks[1] == 0 {
            // All-in: run the remaining board out.
            while let Some(s) = self.street.next() {
                self.street = s;
                self.board_dealt = s.board_len();
                if s != Street::River {
                    self.history.push(HistoryToken::StreetEnd);
                }
            }
            self.finish_showdown();
            return;
        }
        let s = self.street.next().unwrap();
        self.street = s;
        self.board_dealt = s.board_len();
        self.level = 0;
        self.largest_increment = self.config.big_blind;
        self.actions_this_street = 0;
        self.to_act = Some(self.postflop_first());
    }

    fn finish_showdown(&mut self) {
        self.to_act = None;
        self.outcome = Some(Outcome::Showdown);
        self.winnings = Some(self.settle_showdown().unwrap());
    }

    /// Net winnings at a showdown terminal: the stronger seven-card hand takes
    /// the pot, an exact tie splits it (both contributed equally, so each nets
    /// zero). Winnings are net of own contributions and sum to zero.
    pub fn settle_showdown(&self) -> Result<[i64; 2], EngineError> {
        if self.outcome != Some(Outcome::Showdown) {
            return Err(EngineError::NotShowdown);
        }
        let ranks = [
            self.seven_card_rank(0)?,
            self.seven_card_rank(1)?,
        ];
        let pot = self.total_pot() as i64;
        Ok(match ranks[0].cmp(&ranks[1]) {
            std::cmp::Ordering::Greater => {
                [pot - self.contributed(0) as i64, -(self.contributed(1) as i64)]
            }
            std::cmp::Ordering::Less => {
                [-(self.contributed(0) as i64), pot - self.contributed(1) as i64]
            }
            std::cmp::Ordering::Equal => [
                pot / 2 - self.contributed(0) as i64,
                pot / 2 - self.contributed(1) as i64,
            ],
        })
    }

    fn seven_card_rank(&self, seat: Seat) -> Result<HandRank, EngineError> {
        let h = self.deal.hole[seat];
        let b = self.deal.board;
        evaluate_seven(&[h[0], h[1], b[0], b[1], b[2], b[3], b[4]])
    }
}

/// Re-simulate a hand from its deal and (possibly partial) token history.
///
/// Separator tokens must appear exactly where the engine inserts them; the
/// reconstructed state's history is required to match the input bit-exactly.
pub fn replay_hand(
    config: GameConfig,
    hand_id: u64,
    sb_seat: Seat,
    deal: Deal,
    tokens: &[HistoryToken],
) -> Result<HandState, EngineError> {
    let mut state = HandState::from_deal(config, hand_id, sb_seat, deal);
    for (i, tok) in tokens.iter().enumerate() {
        match tok {
            HistoryToken::StreetEnd => {
                if state.history.len() <= i || state.history[i] != HistoryToken::StreetEnd {
                    return Err(EngineError::ReplayMismatch(format!(
                        "unexpected separator at token {i}"
                    )));
                }
            }
            HistoryToken::Action(a) => {
                if state.history.len() != i {
                    return Err(EngineError::ReplayMismatch(format!(
                        "action {a} at token {i} conflicts with an engine-inserted separator"
                    )));
                }
                state = state.apply_action(*a)?;
            }
        }
    }
    if state.history.len() != tokens.len() {
        return Err(EngineError::ReplayMismatch(format!(
            "history ends mid-separator: engine produced {} tokens for {} inputs",
            state.history.len(),
            tokens.len()
        )));
    }
    Ok(state)
}
