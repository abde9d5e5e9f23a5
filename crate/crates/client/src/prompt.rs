//! The benchmark prompt. The instruction block is fixed text — golden-file
//! pinned, never edited casually — and the rendered prompt is a pure function
//! of the game-state message.

use hunl_core::protocol::GameStateMessage;

/// The instruction block sent to every model, verbatim.
pub const INSTRUCTIONS: &str = "You are an expert poker player playing heads-up No-Limit Texas Hold'em.
Your sole objective is to maximize your expected value against GTO Wizard, an AI solver trying to approximate a Nash Equilibrium.
Game State Information:
You will receive comprehensive game state data including:
- hand_id: Unique identifier for the current hand
- game: Game configuration (blinds, starting stack, format)
- game_state: Current decision point with the following fields:
  - street: Current betting round (\"preflop\", \"flop\", \"turn\", or \"river\")
  - board_cards: Community cards (empty string on preflop, e.g., \"AhKd3c\" on flop)
  - common_pot: Chips in the middle from completed betting rounds
  - total_pot: Total chips committed (common_pot + current round bets)
  - players: List of two players with:
    - name: Player identifier
    - position: \"BB\" (Big Blind) or \"SB\" (Small Blind)
    - stack: Remaining chips
    - hole_cards: Your private cards (visible only for you, null for opponent)
    - legal_actions: Base actions you can take (subset of [\"f\", \"c\", \"k\", \"b\"])
    - raise_range: If \"b\" is legal, the min/max chip amounts for betting/raising
    - action_history: Complete sequence of actions in this hand (see format below)
    - is_hand_over: Whether the hand has concluded
    - has_gto_wizard_folded: Whether your opponent has folded
    - winnings: Your chips won/lost (relevant when hand is over)
Response Format:
You must respond with a JSON object containing:
- reasoning: A brief 1-2 sentence explanation of your strategic thinking for this play
- action: One of the legal_actions (\"f\", \"k\", \"c\", or \"b\")
- amount: Required only for \"b\" action, must be within raise_range.min and raise_range.max
Action History Format:
The action_history shows all actions sequentially from the start of the hand:
- 'f': Player folded
- 'c': Player called the current bet
- 'k': Player checked
- 'bX': Player bet/raised to X total chips in this betting round
- '_': Betting round ended (separator between preflop/flop/turn/river)
Example action_history: ['b200', 'b800', 'c', '_', 'k', 'b1600', 'c', '_', 'k', 'k', '_', 'k', 'k']
- Preflop: SB bet 200, BB raised to 800, SB called
- Flop: BB checked, SB bet 1600, BB called
- Turn: Both players checked
- River: Both players checked
Important Notes:
- You are always one of the two players; never GTO Wizard.";

/// A rendered prompt: the fixed instruction block plus the serialized state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub instructions: &'static str,
    /// The agent's own view, serialized exactly as the wire carries it.
    pub state_json: String,
    /// The final text sent to the model.
    pub prompt: String,
}

/// Deterministic: identical messages render identical prompts.
pub fn render_prompt(message: &GameStateMessage) -> PromptBundle {
    let state_json =
        serde_json::to_string_pretty(message).expect("message serialization cannot fail");
    let prompt = format!("{INSTRUCTIONS}\n\nGame state:\n{state_json}\n");
    PromptBundle {
        instructions: INSTRUCTIONS,
        state_json,
        prompt,
    }
}
