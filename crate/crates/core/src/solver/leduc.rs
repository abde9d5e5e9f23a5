//! Leduc hold'em: six cards (two suits of J/Q/K), one ante, two betting
//! rounds with fixed bet sizes 2 then 4 and at most two wagers per round.
//! A public card is dealt between rounds; pairing it beats plain high card.
//! The first player acts first in both rounds.

use super::GameTree;

const BET_SIZE: [i32; 2] = [2, 4];
const MAX_WAGERS: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeducState {
    /// Private card ids 0..6, rank = id / 2; `None` before the deal.
    pub cards: Option<[u8; 2]>,
    /// Public card id, dealt after round 0 closes.
    pub public: Option<u8>,
    pub round: usize,
    /// Per-round histories over `k`, `b`, `c`, `f`.
    pub history: [String; 2],
    /// Chips contributed by each player, antes included.
    pub contrib: [i32; 2],
    wagers: u8,
    folded: Option<usize>,
    showdown: bool,
}

pub struct Leduc;

pub fn rank_of(card: u8) -> u8 {
    card / 2
}

impl LeducState {
    fn round_open(&self) -> bool {
        !self.showdown && self.folded.is_none()
    }

    fn facing_wager(&self) -> bool {
        self.contrib[0] != self.contrib[1]
    }

    fn to_act(&self) -> usize {
        let h = &self.history[self.round];
        h.chars().count() % 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Fold,
    CheckCall,
    BetRaise,
}

fn legal_moves(s: &LeducState) -> Vec<Move> {
    let mut moves = Vec::with_capacity(3);
    if s.facing_wager() {
        moves.push(Move::Fold);
    }
    moves.push(Move::CheckCall);
    if s.wagers < MAX_WAGERS {
        moves.push(Move::BetRaise);
    }
    moves
}

impl GameTree for Leduc {
    type State = LeducState;

    fn root(&self) -> LeducState {
        LeducState {
            cards: None,
            public: None,
            round: 0,
            history: [String::new(), String::new()],
            contrib: [1, 1],
            wagers: 0,
            folded: None,
            showdown: false,
        }
    }

    fn is_terminal(&self, s: &LeducState) -> bool {
        s.folded.is_some() || s.showdown
    }

    fn utility(&self, s: &LeducState, player: usize) -> f64 {
        let winner = if let Some(folder) = s.folded {
            Some(1 - folder)
        } else {
            let cards = s.cards.expect("showdown requires cards");
            let public = rank_of(s.public.expect("showdown requires the public card"));
            let r = [rank_of(cards[0]), rank_of(cards[1])];
            let paired = [r[0] == public, r[1] == public];
            match (paired[0], paired[1]) {
                (true, false) => Some(0),
                (false, true) => Some(1),
                _ => match r[0].cmp(&r[1]) {
                    std::cmp::Ordering::Greater => Some(0),
                    std::cmp::Ordering::Less => Some(1),
                    std::cmp::Ordering::Equal => None,
                },
            }
        };
        let u0 = match winner {
            Some(0) => s.contrib[1] as f64,
            Some(1) => -(s.contrib[0] as f64),
            _ => 0.0,
        };
        if player == 0 {
            u0
        } else {
            -u0
        }
    }

    fn is_chance(&self, s: &LeducState) -> bool {
        s.cards.is_none() || (s.round == 1 && s.public.is_none() && s.round_open())
    }

    fn chance_outcomes(&self, s: &LeducState) -> Vec<(LeducState, f64)> {
        if s.cards.is_none() {
            let mut out = Vec::with_capacity(30);
            for a in 0..6u8 {
                for b in 0..6u8 {
                    if a != b {
                        let mut child = s.clone();
                        child.cards = Some([a, b]);
                        out.push((child, 1.0 / 30.0));
                    }
                }
            }
            out
        } else {
            let cards = s.cards.unwrap();
            let mut out = Vec::with_capacity(4);
            for c in 0..6u8 {
                if c != cards[0] && c != cards[1] {
                    let mut child = s.clone();
                    child.public = Some(c);
                    out.push((child, 0.25));
                }
            }
            out
        }
    }

    fn player(&self, s: &LeducState) -> usize {
        s.to_act()
    }

    fn num_actions(&self, s: &LeducState) -> usize {
        legal_moves(s).len()
    }

    fn next(&self, s: &LeducState, action: usize) -> LeducState {
        let mv = legal_moves(s)[action];
        let actor = s.to_act();
        let mut n = s.clone();
        match mv {
            Move::Fold => {
                n.history[n.round].push('f');
                n.folded = Some(actor);
            }
            Move::CheckCall => {
                let owed = n.contrib[1 - actor] - n.contrib[actor];
                n.contrib[actor] += owed;
                let checked = owed == 0;
                n.history[n.round].push(if checked { 'k' } else { 'c' });
                let both_checked = checked && n.history[n.round].len() >= 2;
                if !checked || both_checked {
                    // The round closes on a call or on check-check.
                    if n.round == 1 {
                        n.showdown = true;
                    } else {
                        n.round = 1;
                        n.wagers = 0;
                    }
                }
            }
            Move::BetRaise => {
                let owed = n.contrib[1 - actor] - n.contrib[actor];
                n.contrib[actor] += owed + BET_SIZE[n.round];
                n.history[n.round].push('b');
                n.wagers += 1;
            }
        }
        n
    }

    fn infoset_key(&self, s: &LeducState) -> String {
        let cards = s.cards.expect("decision node must have cards");
        let own = rank_of(cards[s.to_act()]);
        let public = s
            .public
            .map(|c| rank_of(c).to_string())
            .unwrap_or_else(|| "-".to_string());
        format!("{own}|{}|{public}|{}", s.history[0], s.history[1])
    }

    fn action_label(&self, s: &LeducState, action: usize) -> String {
        match legal_moves(s)[action] {
            Move::Fold => "f".to_string(),
            Move::CheckCall => {
                if s.facing_wager() {
                    "c".to_string()
                } else {
                    "k".to_string()
                }
            }
            Move::BetRaise => "b".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::best_response::exploitability;
    use crate::solver::cfr::VanillaCfr;
    use crate::solver::expected_value;

    #[test]
    fn a_full_line_reaches_showdown_with_the_right_pot() {
        let g = Leduc;
        let mut s = g.chance_outcomes(&g.root())[0].0.clone(); // cards [0, 1]
        // Round 0: bet, raise, call → 1 + 2 + 4 each... contribution check below.
        s = g.next(&s, 1); // p0 bet (contrib 3)
        s = g.next(&s, 2); // p1 raise (contrib 5)
        s = g.next(&s, 1); // p0 call (contrib 5)
        assert!(g.is_chance(&s));
        s = g.chance_outcomes(&s)[0].0.clone();
        assert_eq!(s.round, 1);
        // Round 1: check, bet, call.
        s = g.next(&s, 0); // p0 check
        s = g.next(&s, 1); // p1 bet (contrib 9)
        s = g.next(&s, 1); // p0 call
        assert!(g.is_terminal(&s));
        assert_eq!(s.contrib, [9, 9]);
    }

    #[test]
    fn wager_cap_limits_raises_per_round() {
        let g = Leduc;
        let mut s = g.chance_outcomes(&g.root())[0].0.clone();
        s = g.next(&s, 1); // bet
        assert_eq!(g.num_actions(&s), 3); // fold, call, raise
        s = g.next(&s, 2); // raise — cap reached
        assert_eq!(g.num_actions(&s), 2); // fold, call only
    }

    #[test]
    fn pairing_the_public_card_beats_high_card() {
        let g = Leduc;
        let mut s = g.root();
        s.cards = Some([0, 5]); // ranks J and K
        s.public = Some(1);     // the other J pairs player 0
        s.round = 1;
        s.showdown = true;
        s.contrib = [5, 5];
        assert_eq!(g.utility(&s, 0), 5.0);

        s.public = Some(3); // rank Q pairs nobody → K wins
        assert_eq!(g.utility(&s, 0), -5.0);

        s.cards = Some([4, 5]); // both K → tie
        assert_eq!(g.utility(&s, 0), 0.0);
    }

    #[test]
    fn vanilla_cfr_approaches_equilibrium() {
        let g = Leduc;
        let mut cfr = VanillaCfr::new(&g);
        cfr.run(600);
        let profile = cfr.average_profile();
        let e = exploitability(&g, &profile);
        assert!(e < 0.05, "exploitability {e}");
        // The first player is at a small disadvantage in Leduc.
        let v0 = expected_value(&g, &profile, 0);
        assert!(v0 < 0.0 && v0 > -0.2, "implausible game value {v0}");
    }
}
