//! Wire schema of the benchmark service.
//!
//! [`GameStateMessage`] is the exact JSON an agent receives at every decision
//! point; golden-file tests in the service crate pin its serialized form.
//! The conversion functions here are the only code that turns engine states
//! into messages and messages back into [`Observation`]s, so both sides of
//! the wire share one definition of the schema.
//!
//! Information hiding happens at construction: [`message_for_seat`] only ever
//! reads the viewer's hole cards. The opponent's entry always carries
//! `hole_cards: null`.

use serde::{Deserialize, Serialize};

use crate::agents::{Observation, Position};
use crate::aivat::AivatReport;
use crate::cards::{board_string, parse_board, Card};
use crate::engine::{
    codec, Action, Chips, GameConfig, HandState, HistoryToken, LegalActions, Outcome, RaiseRange,
    Seat, Street,
};

/// Game format label carried in every message.
pub const FORMAT_HUNL: &str = "HUNL";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameBlock {
    /// `[small_blind, big_blind]`.
    pub blinds: [Chips; 2],
    pub starting_stack: Chips,
    pub format: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaiseRangeView {
    pub min: Chips,
    pub max: Chips,
}

impl From<RaiseRange> for RaiseRangeView {
    fn from(r: RaiseRange) -> RaiseRangeView {
        RaiseRangeView {
            min: r.min,
            max: r.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerView {
    pub name: String,
    /// `"SB"` or `"BB"`.
    pub position: String,
    pub stack: Chips,
    /// Two-card string like `"AhKd"`; always `null` for the opponent.
    pub hole_cards: Option<String>,
    /// Base actions available, wire order `f, k, c, b`; `null` unless this
    /// player is to act.
    pub legal_actions: Option<Vec<String>>,
    /// Inclusive bet-to bounds; present exactly when `"b"` is legal.
    pub raise_range: Option<RaiseRangeView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStateBlock {
    /// `"preflop" | "flop" | "turn" | "river"`.
    pub street: String,
    /// Concatenated card string, empty preflop (e.g. `"AhKd3c"` on the flop).
    pub board_cards: String,
    /// Chips from completed betting rounds.
    pub common_pot: Chips,
    /// `common_pot` plus the current round's bets.
    pub total_pot: Chips,
    /// Viewer first, opponent second.
    pub players: Vec<PlayerView>,
    /// Encoded tokens, e.g. `["b200", "b800", "c", "_", "k"]`.
    pub action_history: Vec<String>,
    pub is_hand_over: bool,
    pub has_opponent_folded: bool,
    /// Legacy alias of `has_opponent_folded`; always equal to it.
    pub has_gto_wizard_folded: bool,
    /// Viewer's chips won (positive) or lost (negative); meaningful once
    /// `is_hand_over` is true, `0` before that.
    pub winnings: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStateMessage {
    pub hand_id: u64,
    pub game: GameBlock,
    pub game_state: GameStateBlock,
}

impl GameStateMessage {
    /// The viewer's entry (the player whose cards are visible, or by
    /// position fallback when the hand never showed the viewer a card).
    pub fn viewer(&self) -> &PlayerView {
        self.game_state
            .players
            .iter()
            .find(|p| p.hole_cards.is_some())
            .unwrap_or(&self.game_state.players[0])
    }

    /// True when the message asks the viewer to act.
    pub fn viewer_to_act(&self) -> bool {
        !self.game_state.is_hand_over && self.viewer().legal_actions.is_some()
    }
}

/// Serialize `seat`'s view of a hand. `names[s]` is seat `s`'s display name.
pub fn message_for_seat(state: &HandState, seat: Seat, names: [&str; 2]) -> GameStateMessage {
    let config = state.config();
    let opp = 1 - seat;
    let to_act = state.to_act();
    let legal = if to_act.is_some() {
        state.legal_actions().ok()
    } else {
        None
    };

    let player_view = |s: Seat| {
        let acting = to_act == Some(s);
        let seat_legal = legal.filter(|_| acting);
        PlayerView {
            name: names[s].to_string(),
            position: Position::of(s, state.sb_seat()).as_str().to_string(),
            stack: state.stacks()[s],
            hole_cards: if s == seat {
                Some(board_string(&state.hole_cards(s)))
            } else {
                None
            },
            legal_actions: seat_legal
                .map(|l| l.base_letters().iter().map(|c| c.to_string()).collect()),
            raise_range: seat_legal.and_then(|l| l.raise.map(RaiseRangeView::from)),
        }
    };

    let folded_by_opp = matches!(state.outcome(), Some(Outcome::Fold { folder }) if folder == opp);
    let winnings = state
        .winnings()
        .map(|w| w[seat])
        .unwrap_or(0);

    GameStateMessage {
        hand_id: state.hand_id(),
        game: GameBlock {
            blinds: [config.small_blind(), config.big_blind()],
            starting_stack: config.starting_stack(),
            format: FORMAT_HUNL.to_string(),
        },
        game_state: GameStateBlock {
            street: state.street().name().to_string(),
            board_cards: board_string(state.board()),
            common_pot: state.common_pot(),
            total_pot: state.total_pot(),
            players: vec![player_view(seat), player_view(opp)],
            action_history: codec::encode_history(state.history()),
            is_hand_over: state.is_terminal(),
            has_opponent_folded: folded_by_opp,
            has_gto_wizard_folded: folded_by_opp,
            winnings,
        },
    }
}

/// Schema-level failures when interpreting a message.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("message is not at the viewer's decision point")]
    NotViewerTurn,
    #[error("malformed message: {0}")]
    Malformed(String),
}

fn bad(msg: impl Into<String>) -> ProtocolError {
    ProtocolError::Malformed(msg.into())
}

fn street_by_name(name: &str) -> Result<Street, ProtocolError> {
    match name {
        "preflop" => Ok(Street::Preflop),
        "flop" => Ok(Street::Flop),
        "turn" => Ok(Street::Turn),
        "river" => Ok(Street::River),
        other => Err(bad(format!("unknown street {other:?}"))),
    }
}

/// Per-position chips committed in the current betting round, reconstructed
/// by walking the action history (the wire schema does not carry committed
/// amounts directly). Returns `[SB, BB]`.
pub fn round_committed_by_position(
    config: &GameConfig,
    tokens: &[HistoryToken],
) -> Result<[Chips; 2], ProtocolError> {
    // Index 0 = SB, 1 = BB throughout.
    let mut committed = [config.small_blind(), config.big_blind()];
    let mut to_act = 0usize;
    for tok in tokens {
        match tok {
            HistoryToken::StreetEnd => {
                committed = [0, 0];
                to_act = 1;
            }
            HistoryToken::Action(a) => {
                match a {
                    Action::Fold | Action::Check => {}
                    Action::Call => committed[to_act] = committed[1 - to_act],
                    Action::BetTo(x) => {
                        if *x <= committed[to_act] {
                            return Err(bad(format!(
                                "bet-to {x} does not exceed committed {}",
                                committed[to_act]
                            )));
                        }
                        committed[to_act] = *x;
                    }
                }
                to_act = 1 - to_act;
            }
        }
    }
    Ok(committed)
}

fn parse_hole(s: &str) -> Result<[Card; 2], ProtocolError> {
    let cards = parse_board(s).map_err(|e| bad(e.to_string()))?;
    <[Card; 2]>::try_from(cards).map_err(|_| bad(format!("hole_cards {s:?} is not two cards")))
}

/// Reconstruct the viewer's [`Observation`] from its message, so agents
/// written against the engine's observation type can play over the wire.
/// Fails when the message is not at the viewer's decision point.
pub fn observation_from_message(msg: &GameStateMessage) -> Result<Observation, ProtocolError> {
    let viewer = msg.viewer().clone();
    let opp = msg
        .game_state
        .players
        .iter()
        .find(|p| p.name != viewer.name || p.position != viewer.position)
        .ok_or_else(|| bad("players list needs two entries"))?
        .clone();
    let legal_letters = viewer
        .legal_actions
        .as_ref()
        .ok_or(ProtocolError::NotViewerTurn)?;
    if msg.game_state.is_hand_over {
        return Err(ProtocolError::NotViewerTurn);
    }

    let config = GameConfig::new(
        msg.game.blinds[0],
        msg.game.blinds[1],
        msg.game.starting_stack,
    )
    .map_err(|e| bad(e.to_string()))?;
    let position = match viewer.position.as_str() {
        "SB" => Position::SB,
        "BB" => Position::BB,
        other => return Err(bad(format!("unknown position {other:?}"))),
    };
    let street = street_by_name(&msg.game_state.street)?;
    let board = parse_board(&msg.game_state.board_cards).map_err(|e| bad(e.to_string()))?;
    if board.len() != street.board_len() {
        return Err(bad(format!(
            "board {:?} does not match street {}",
            msg.game_state.board_cards, msg.game_state.street
        )));
    }
    let hole = parse_hole(
        viewer
            .hole_cards
            .as_deref()
            .ok_or_else(|| bad("viewer is missing hole_cards"))?,
    )?;

    let tokens =
        codec::decode_history(&msg.game_state.action_history).map_err(|e| bad(e.to_string()))?;
    let by_pos = round_committed_by_position(&config, &tokens)?;
    let (own_round, opp_round) = match position {
        Position::SB => (by_pos[0], by_pos[1]),
        Position::BB => (by_pos[1], by_pos[0]),
    };
    let expected_total = msg.game_state.common_pot + by_pos[0] + by_pos[1];
    if expected_total != msg.game_state.total_pot {
        return Err(bad(format!(
            "total_pot {} disagrees with common_pot {} plus round bets {}",
            msg.game_state.total_pot,
            msg.game_state.common_pot,
            by_pos[0] + by_pos[1]
        )));
    }

    let mut legal = LegalActions {
        can_fold: false,
        can_check: false,
        can_call: false,
        raise: None,
    };
    for letter in legal_letters {
        match letter.as_str() {
            "f" => legal.can_fold = true,
            "k" => legal.can_check = true,
            "c" => legal.can_call = true,
            "b" => {
                let r = viewer
                    .raise_range
                    .ok_or_else(|| bad("legal action b without raise_range"))?;
                legal.raise = Some(RaiseRange { min: r.min, max: r.max });
            }
            other => return Err(bad(format!("unknown legal action {other:?}"))),
        }
    }

    Ok(Observation {
        config,
        hand_id: msg.hand_id,
        position,
        street,
        board,
        hole,
        own_stack: viewer.stack,
        opp_stack: opp.stack,
        own_round_committed: own_round,
        opp_round_committed: opp_round,
        common_pot: msg.game_state.common_pot,
        total_pot: msg.game_state.total_pot,
        legal,
        history: tokens,
    })
}

// ---------------------------------------------------------------------------
// Request/response bodies.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub agent_name: String,
    /// Opponent spec: `"house"`, a baseline name (`"check-call"`,
    /// `"always-fold"`, `"all-in"`, `"uniform-random"`), or
    /// `"scripted:SB=a,b,..;BB=c,d,.."` with action tokens.
    pub opponent: String,
    pub num_hands: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: String,
    /// The seed actually used (server-chosen when the request omitted one);
    /// replaying the session with it is bit-identical.
    pub seed: u64,
    pub state: GameStateMessage,
}

/// Action submission: base letter plus bet-to amount when `action == "b"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRequest {
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount: Option<Chips>,
}

impl ActionRequest {
    pub fn from_action(action: Action) -> ActionRequest {
        match action {
            Action::Fold => ActionRequest { action: "f".into(), amount: None },
            Action::Check => ActionRequest { action: "k".into(), amount: None },
            Action::Call => ActionRequest { action: "c".into(), amount: None },
            Action::BetTo(x) => ActionRequest { action: "b".into(), amount: Some(x) },
        }
    }

    pub fn to_action(&self) -> Result<Action, ProtocolError> {
        match (self.action.as_str(), self.amount) {
            ("f", None) => Ok(Action::Fold),
            ("k", None) => Ok(Action::Check),
            ("c", None) => Ok(Action::Call),
            ("b", Some(x)) => Ok(Action::BetTo(x)),
            ("b", None) => Err(bad("action b requires an amount")),
            (a, Some(_)) => Err(bad(format!("action {a:?} takes no amount"))),
            (a, None) => Err(bad(format!("unknown action {a:?}"))),
        }
    }
}

/// Machine-readable error body returned by the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Stable error code, e.g. `"illegal_action"`, `"unknown_session"`.
    pub error: String,
    pub detail: String,
    /// Echoed on action rejections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legal_actions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raise_range: Option<RaiseRangeView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub agent_name: String,
    pub report: AivatReport,
    /// Lower bound of the 95% interval on the adjusted score; the sort key.
    pub rank_key: f64,
}

/// Order leaderboard entries: best (highest) rank key first; name breaks
/// exact ties so the ordering is total and stable across runs.
pub fn sort_leaderboard(entries: &mut [LeaderboardEntry]) {
    entries.sort_by(|a, b| {
        b.rank_key
            .partial_cmp(&a.rank_key)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.agent_name.cmp(&b.agent_name))
    });
}

/// Transport-level failures seen by clients.
#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    /// The service answered with a structured error.
    #[error("service error {status}: {body:?}")]
    Service { status: u16, body: ErrorBody },
    /// The transport itself failed (connection refused, timeout, ...).
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(#[from] ProtocolError),
}

/// A session-capable connection to the benchmark service: HTTP in
/// production, in-process for tests and local matches — identical message
/// schemas either way.
pub trait SessionTransport {
    fn create_session(
        &mut self,
        req: &CreateSessionRequest,
    ) -> Result<CreateSessionResponse, TransportError>;
    fn get_state(&mut self, session_id: &str) -> Result<GameStateMessage, TransportError>;
    fn submit_action(
        &mut self,
        session_id: &str,
        req: &ActionRequest,
    ) -> Result<GameStateMessage, TransportError>;
    fn get_metrics(&mut self, session_id: &str) -> Result<AivatReport, TransportError>;
    fn get_leaderboard(&mut self) -> Result<Vec<LeaderboardEntry>, TransportError>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{deal_hand, Deal};

    fn card(s: &str) -> Card {
        s.parse().unwrap()
    }

    fn fixture_state() -> HandState {
        let deal = Deal {
            hole: [[card("As"), card("Ad")], [card("Kh"), card("Qh")]],
            board: [card("Ac"), card("7h"), card("2d"), card("9h"), card("3s")],
        };
        HandState::from_deal(GameConfig::default(), 3, 0, deal)
    }

    #[test]
    fn fresh_preflop_message_shows_blinds_and_ranges() {
        let state = fixture_state();
        let msg = message_for_seat(&state, 0, ["hero", "villain"]);
        assert_eq!(msg.hand_id, 3);
        assert_eq!(msg.game.blinds, [50, 100]);
        assert_eq!(msg.game.starting_stack, 20_000);
        assert_eq!(msg.game_state.street, "preflop");
        assert_eq!(msg.game_state.board_cards, "");
        assert_eq!(msg.game_state.common_pot, 0);
        assert_eq!(msg.game_state.total_pot, 150);
        let hero = &msg.game_state.players[0];
        assert_eq!(hero.position, "SB");
        assert_eq!(hero.hole_cards.as_deref(), Some("AsAd"));
        assert_eq!(
            hero.legal_actions.as_deref(),
            Some(&["f".to_string(), "c".to_string(), "b".to_string()][..])
        );
        assert_eq!(
            hero.raise_range,
            Some(RaiseRangeView { min: 200, max: 20_000 })
        );
        let villain = &msg.game_state.players[1];
        assert_eq!(villain.hole_cards, None);
        assert_eq!(villain.legal_actions, None);
        assert_eq!(villain.raise_range, None);
        assert!(!msg.game_state.is_hand_over);
        assert_eq!(msg.game_state.winnings, 0);
    }

    #[test]
    fn opponent_cards_never_serialize() {
        // Walk a full hand and scan every emitted body for the hidden cards.
        let mut state = fixture_state();
        let hidden = ["Kh", "Qh"];
        let scan = |st: &HandState| {
            let body = serde_json::to_string(&message_for_seat(st, 0, ["a", "b"])).unwrap();
            for c in hidden {
                assert!(
                    !body.contains(c),
                    "opponent card {c} leaked into message {body}"
                );
            }
        };
        scan(&state);
        for action in [Action::Call, Action::Check, Action::Check, Action::Check] {
            state = state.apply_action(action).unwrap();
            scan(&state);
        }
    }

    #[test]
    fn fold_terminal_reports_winnings_and_opponent_fold_flag() {
        let state = fixture_state();
        // Hero (SB) raises, villain folds.
        let state = state.apply_action(Action::BetTo(300)).unwrap();
        let state = state.apply_action(Action::Fold).unwrap();
        let msg = message_for_seat(&state, 0, ["hero", "villain"]);
        assert!(msg.game_state.is_hand_over);
        assert!(msg.game_state.has_opponent_folded);
        assert_eq!(
            msg.game_state.has_opponent_folded,
            msg.game_state.has_gto_wizard_folded
        );
        assert_eq!(msg.game_state.winnings, 100);
        // From the folder's own view, the flag is down.
        let other = message_for_seat(&state, 1, ["villain", "hero"]);
        assert!(!other.game_state.has_opponent_folded);
        assert_eq!(other.game_state.winnings, -100);
    }

    #[test]
    fn observation_round_trips_through_the_message() {
        let mut state = deal_hand(GameConfig::default(), 11, 4, 1);
        // Advance into the hand so committed amounts are non-trivial.
        state = state.apply_action(Action::BetTo(250)).unwrap();
        state = state.apply_action(Action::Call).unwrap();
        state = state.apply_action(Action::Check).unwrap();
        let seat = state.to_act().unwrap();
        let direct = Observation::for_seat(&state, seat).unwrap();
        let msg = message_for_seat(&state, seat, ["x", "y"]);
        let via_wire = observation_from_message(&msg).unwrap();
        assert_eq!(via_wire, direct);
    }

    #[test]
    fn observation_conversion_rejects_terminal_and_foreign_turns() {
        let state = fixture_state();
        let msg = message_for_seat(&state, 1, ["villain", "hero"]);
        // Seat 1 is the BB and not to act preflop.
        assert_eq!(
            observation_from_message(&msg),
            Err(ProtocolError::NotViewerTurn)
        );
        let folded = state.apply_action(Action::Fold).unwrap();
        let msg = message_for_seat(&folded, 0, ["hero", "villain"]);
        assert_eq!(
            observation_from_message(&msg),
            Err(ProtocolError::NotViewerTurn)
        );
    }

    #[test]
    fn action_request_round_trip_and_validation() {
        for action in [Action::Fold, Action::Check, Action::Call, Action::BetTo(777)] {
            let req = ActionRequest::from_action(action);
            assert_eq!(req.to_action().unwrap(), action);
        }
        assert!(ActionRequest { action: "b".into(), amount: None }
            .to_action()
            .is_err());
        assert!(ActionRequest { action: "k".into(), amount: Some(5) }
            .to_action()
            .is_err());
        assert!(ActionRequest { action: "x".into(), amount: None }
            .to_action()
            .is_err());
    }

    #[test]
    fn round_committed_tracks_blinds_calls_and_raises() {
        let cfg = GameConfig::default();
        let toks = |s: &str| codec::decode_history_string(s).unwrap();
        assert_eq!(round_committed_by_position(&cfg, &toks("")).unwrap(), [50, 100]);
        assert_eq!(
            round_committed_by_position(&cfg, &toks("b200b800")).unwrap(),
            [200, 800]
        );
        assert_eq!(
            round_committed_by_position(&cfg, &toks("b200b800c")).unwrap(),
            [800, 800]
        );
        // New round: BB acts first, bets 300, SB calls.
        assert_eq!(
            round_committed_by_position(&cfg, &toks("b200b800c_b300c")).unwrap(),
            [300, 300]
        );
        // A bet-to below the current commitment is malformed.
        assert!(round_committed_by_position(&cfg, &toks("b200b100")).is_err());
    }

    #[test]
    fn leaderboard_sorts_by_rank_key_descending() {
        let report = |aivat: f64, sd: f64| AivatReport {
            hands_played: 100,
            aivat_score: aivat,
            raw_winrate: aivat,
            chips: 0,
            all_hands_chips: aivat,
            chance_correction: 0.0,
            action_correction: 0.0,
            aivat_stddev: sd,
            range_proxy: false,
        };
        let entry = |name: &str, aivat: f64, sd: f64| {
            let r = report(aivat, sd);
            LeaderboardEntry {
                agent_name: name.to_string(),
                rank_key: r.rank_key(),
                report: r,
            }
        };
        // Equal means: the lower-stddev agent ranks higher.
        let mut entries = vec![
            entry("noisy", -10.0, 8.0),
            entry("steady", -10.0, 2.0),
            entry("best", -5.0, 2.0),
        ];
        sort_leaderboard(&mut entries);
        let names: Vec<&str> = entries.iter().map(|e| e.agent_name.as_str()).collect();
        assert_eq!(names, ["best", "steady", "noisy"]);
    }
}
