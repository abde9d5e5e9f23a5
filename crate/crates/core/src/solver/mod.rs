//! Equilibrium approximation via counterfactual regret minimization.
//!
//! Every solvable game implements [`GameTree`]; the trainers
//! ([`cfr::VanillaCfr`], [`cfr::ExternalMccfr`]) and the exact
//! [`best_response`] evaluator work against that trait. Small games (Kuhn,
//! Leduc) enumerate chance exactly; the HUNL house opponent trains on a
//! scenario-sampled abstraction of the full game.

pub mod abstraction;
pub mod best_response;
pub mod cfr;
pub mod hunl;
pub mod kuhn;
pub mod leduc;

use std::collections::HashMap;

/// A two-player zero-sum extensive-form game with perfect recall.
///
/// States are explicit values; chance nodes enumerate labeled outcomes with
/// probabilities so that evaluators can reason about "what else could have
/// happened" at each chance event.
pub trait GameTree {
    type State: Clone;

    fn root(&self) -> Self::State;

    fn is_terminal(&self, s: &Self::State) -> bool;

    /// Terminal utility for `player` (zero-sum: u(0) = −u(1)).
    fn utility(&self, s: &Self::State, player: usize) -> f64;

    fn is_chance(&self, s: &Self::State) -> bool;

    /// Outcomes and probabilities at a chance node; probabilities sum to 1.
    fn chance_outcomes(&self, s: &Self::State) -> Vec<(Self::State, f64)>;

    /// Sample one chance outcome. Games with wide chance nodes override this
    /// to avoid materializing the full outcome list per visit.
    fn sample_chance(&self, s: &Self::State, rng: &mut rand_chacha::ChaCha8Rng) -> Self::State {
        use rand::Rng;
        let outcomes = self.chance_outcomes(s);
        let total: f64 = outcomes.iter().map(|(_, p)| p).sum();
        let mut draw = rng.random_range(0.0..total.max(f64::MIN_POSITIVE));
        for (state, p) in &outcomes {
            if draw < *p {
                return state.clone();
            }
            draw -= p;
        }
        outcomes.last().unwrap().0.clone()
    }

    /// The player to act at a decision node.
    fn player(&self, s: &Self::State) -> usize;

    /// Number of legal actions at a decision node.
    fn num_actions(&self, s: &Self::State) -> usize;

    /// Successor after the `action`-th legal action.
    fn next(&self, s: &Self::State, action: usize) -> Self::State;

    /// Information-set key for the player to act. Must encode everything that
    /// player knows and nothing they cannot know.
    fn infoset_key(&self, s: &Self::State) -> String;

    /// Human-readable action labels (used by strategy dumps and serving).
    fn action_label(&self, s: &Self::State, action: usize) -> String {
        let _ = s;
        format!("a{action}")
    }
}

/// An average-strategy profile: infoset key → action probabilities.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StrategyProfile {
    pub strategies: HashMap<String, Vec<f64>>,
}

impl StrategyProfile {
    /// Action probabilities at an infoset; uniform when the infoset was never
    /// visited during training.
    pub fn probs(&self, key: &str, num_actions: usize) -> Vec<f64> {
        match self.strategies.get(key) {
            Some(p) if p.len() == num_actions => p.clone(),
            _ => vec![1.0 / num_actions as f64; num_actions],
        }
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

/// Expected utility of `player` under a fixed profile for both players,
/// by full-tree enumeration. Exponential in game size; for small games and
/// evaluation oracles only.
pub fn expected_value<G: GameTree>(game: &G, profile: &StrategyProfile, player: usize) -> f64 {
    fn walk<G: GameTree>(
        game: &G,
        profile: &StrategyProfile,
        s: &G::State,
        player: usize,
    ) -> f64 {
        if game.is_terminal(s) {
            return game.utility(s, player);
        }
        if game.is_chance(s) {
            return game
                .chance_outcomes(s)
                .iter()
                .map(|(child, p)| p * walk(game, profile, child, player))
                .sum();
        }
        let n = game.num_actions(s);
        let probs = profile.probs(&game.infoset_key(s), n);
        (0..n)
            .map(|a| probs[a] * walk(game, profile, &game.next(s, a), player))
            .sum()
    }
    walk(game, profile, &game.root(), player)
}
