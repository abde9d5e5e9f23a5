//! Kuhn poker: three cards (J=0, Q=1, K=2), one ante, one bet of one chip.
//! The exact game value for the first player is −1/18, which anchors the
//! solver's convergence tests.

use super::GameTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KuhnState {
    /// Dealt cards `[p0, p1]`, or `None` at the root chance node.
    pub cards: Option<[u8; 2]>,
    /// Betting history over the alphabet `k`, `b`, `c`, `f`.
    pub history: String,
}

pub struct Kuhn;

impl KuhnState {
    fn facing_bet(&self) -> bool {
        self.history.ends_with('b')
    }
}

impl GameTree for Kuhn {
    type State = KuhnState;

    fn root(&self) -> KuhnState {
        KuhnState {
            cards: None,
            history: String::new(),
        }
    }

    fn is_terminal(&self, s: &KuhnState) -> bool {
        matches!(s.history.as_str(), "kk" | "bf" | "bc" | "kbf" | "kbc")
    }

    fn utility(&self, s: &KuhnState, player: usize) -> f64 {
        let cards = s.cards.expect("terminal state must have cards");
        let u0 = match s.history.as_str() {
            "bf" => 1.0,
            "kbf" => -1.0,
            "kk" => {
                if cards[0] > cards[1] {
                    1.0
                } else {
                    -1.0
                }
            }
            "bc" | "kbc" => {
                if cards[0] > cards[1] {
                    2.0
                } else {
                    -2.0
                }
            }
            h => panic!("utility on non-terminal history {h:?}"),
        };
        if player == 0 {
            u0
        } else {
            -u0
        }
    }

    fn is_chance(&self, s: &KuhnState) -> bool {
        s.cards.is_none()
    }

    fn chance_outcomes(&self, s: &KuhnState) -> Vec<(KuhnState, f64)> {
        let mut out = Vec::with_capacity(6);
        for a in 0..3u8 {
            for b in 0..3u8 {
                if a != b {
                    out.push((
                        KuhnState {
                            cards: Some([a, b]),
                            history: s.history.clone(),
                        },
                        1.0 / 6.0,
                    ));
                }
            }
        }
        out
    }

    fn player(&self, s: &KuhnState) -> usize {
        s.history.len() % 2
    }

    fn num_actions(&self, _s: &KuhnState) -> usize {
        2
    }

    fn next(&self, s: &KuhnState, action: usize) -> KuhnState {
        let c = if s.facing_bet() {
            ['f', 'c'][action]
        } else {
            ['k', 'b'][action]
        };
        let mut history = s.history.clone();
        history.push(c);
        KuhnState {
            cards: s.cards,
            history,
        }
    }

    fn infoset_key(&self, s: &KuhnState) -> String {
        let cards = s.cards.expect("decision node must have cards");
        format!("{}:{}", cards[self.player(s)], s.history)
    }

    fn action_label(&self, s: &KuhnState, action: usize) -> String {
        if s.facing_bet() {
            ["f", "c"][action].to_string()
        } else {
            ["k", "b"][action].to_string()
        }
    }
}

/// Exact first-player game value at equilibrium, in antes.
pub const KUHN_GAME_VALUE_P0: f64 = -1.0 / 18.0;
