//! Exact best response and exploitability for small games.
//!
//! The best responder maximizes per information set (not per state): each of
//! its infosets picks the action maximizing counterfactual-reach-weighted
//! value over every tree node grouped into that infoset. Perfect recall makes
//! the lazy recursion below well-founded — an infoset's best action only
//! depends on strictly deeper nodes.

use std::collections::HashMap;

use super::{GameTree, StrategyProfile};

enum NodeKind {
    Terminal(f64),                    // utility for the BR player
    Chance(Vec<(usize, f64)>),        // (child, prob)
    Opponent(Vec<usize>, Vec<f64>),   // children, fixed strategy
    Responder(Vec<usize>, String),    // children, infoset key
}

struct BrSolver {
    nodes: Vec<NodeKind>,
    /// BR infoset key → (node, counterfactual reach) members.
    infosets: HashMap<String, Vec<(usize, f64)>>,
    best_action: HashMap<String, usize>,
    value_memo: Vec<Option<f64>>,
}

impl BrSolver {
    fn build<G: GameTree>(
        game: &G,
        profile: &StrategyProfile,
        br_player: usize,
    ) -> BrSolver {
        let mut solver = BrSolver {
            nodes: Vec::new(),
            infosets: HashMap::new(),
            best_action: HashMap::new(),
            value_memo: Vec::new(),
        };
        solver.discover(game, profile, br_player, &game.root(), 1.0);
        solver.value_memo = vec![None; solver.nodes.len()];
        solver
    }

    /// Depth-first expansion; `cf_reach` is chance × opponent reach (the BR
    /// player's own actions contribute reach 1).
    fn discover<G: GameTree>(
        &mut self,
        game: &G,
        profile: &StrategyProfile,
        br_player: usize,
        s: &G::State,
        cf_reach: f64,
    ) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(NodeKind::Terminal(0.0)); // placeholder
        let kind = if game.is_terminal(s) {
            NodeKind::Terminal(game.utility(s, br_player))
        } else if game.is_chance(s) {
            let children = game
                .chance_outcomes(s)
                .into_iter()
                .map(|(child, p)| {
                    (
                        self.discover(game, profile, br_player, &child, cf_reach * p),
                        p,
                    )
                })
                .collect();
            NodeKind::Chance(children)
        } else {
            let n = game.num_actions(s);
            if game.player(s) == br_player {
                let key = game.infoset_key(s);
                self.infosets
                    .entry(key.clone())
                    .or_default()
                    .push((idx, cf_reach));
                let children = (0..n)
                    .map(|a| {
                        self.discover(game, profile, br_player, &game.next(s, a), cf_reach)
                    })
                    .collect();
                NodeKind::Responder(children, key)
            } else {
                let probs = profile.probs(&game.infoset_key(s), n);
                let children = (0..n)
                    .map(|a| {
                        self.discover(
                            game,
                            profile,
                            br_player,
                            &game.next(s, a),
                            cf_reach * probs[a],
                        )
                    })
                    .collect();
                NodeKind::Opponent(children, probs)
            }
        };
        self.nodes[idx] = kind;
        idx
    }

    fn value(&mut self, idx: usize) -> f64 {
        if let Some(v) = self.value_memo[idx] {
            return v;
        }
        let v = match &self.nodes[idx] {
            NodeKind::Terminal(u) => *u,
            NodeKind::Chance(children) => {
                let children = children.clone();
                children.iter().map(|(c, p)| p * self.value(*c)).sum()
            }
            NodeKind::Opponent(children, probs) => {
                let (children, probs) = (children.clone(), probs.clone());
                children
                    .iter()
                    .zip(&probs)
                    .map(|(c, p)| p * self.value(*c))
                    .sum()
            }
            NodeKind::Responder(children, key) => {
                let (children, key) = (children.clone(), key.clone());
                let a = self.resolve_best_action(&key, children.len());
                self.value(children[a])
            }
        };
        self.value_memo[idx] = Some(v);
        v
    }

    fn resolve_best_action(&mut self, key: &str, num_actions: usize) -> usize {
        if let Some(a) = self.best_action.get(key) {
            return *a;
        }
        let members = self.infosets[key].clone();
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..num_actions {
            let mut total = 0.0;
            for (node, reach) in &members {
                let child = match &self.nodes[*node] {
                    NodeKind::Responder(children, _) => children[a],
                    _ => unreachable!("infoset member is not a responder node"),
                };
                total += reach * self.value(child);
            }
            if total > best.1 {
                best = (a, total);
            }
        }
        self.best_action.insert(key.to_string(), best.0);
        best.0
    }
}

/// Expected utility for `br_player` when it plays the exact best response to
/// `profile` (which fixes the other player).
pub fn best_response_value<G: GameTree>(
    game: &G,
    profile: &StrategyProfile,
    br_player: usize,
) -> f64 {
    let mut solver = BrSolver::build(game, profile, br_player);
    solver.value(0)
}

/// Average best-responder gain: 0 exactly at a Nash equilibrium.
pub fn exploitability<G: GameTree>(game: &G, profile: &StrategyProfile) -> f64 {
    (best_response_value(game, profile, 0) + best_response_value(game, profile, 1)) / 2.0
}
