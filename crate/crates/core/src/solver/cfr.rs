//! Counterfactual regret minimization trainers.
//!
//! [`VanillaCfr`] walks the full tree (chance included) every iteration and
//! converges fast on tiny games. [`ExternalMccfr`] is external-sampling
//! MCCFR: per traversal it samples chance and the opponent while enumerating
//! the traverser's actions, which scales to abstracted HUNL.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{GameTree, StrategyProfile};

/// Per-infoset accumulators.
#[derive(Debug, Clone, Default)]
struct Node {
    regret_sum: Vec<f64>,
    strategy_sum: Vec<f64>,
}

impl Node {
    fn new(n: usize) -> Node {
        Node {
            regret_sum: vec![0.0; n],
            strategy_sum: vec![0.0; n],
        }
    }

    /// Regret matching: positive regrets normalized, else uniform.
    fn current_strategy(&self) -> Vec<f64> {
        let n = self.regret_sum.len();
        let mut s: Vec<f64> = self.regret_sum.iter().map(|r| r.max(0.0)).collect();
        let total: f64 = s.iter().sum();
        if total > 0.0 {
            for x in &mut s {
                *x /= total;
            }
        } else {
            s = vec![1.0 / n as f64; n];
        }
        s
    }

    fn average_strategy(&self) -> Vec<f64> {
        let n = self.strategy_sum.len();
        let total: f64 = self.strategy_sum.iter().sum();
        if total > 0.0 {
            self.strategy_sum.iter().map(|x| x / total).collect()
        } else {
            vec![1.0 / n as f64; n]
        }
    }
}

fn nodes_to_profile(nodes: &HashMap<String, Node>) -> StrategyProfile {
    StrategyProfile {
        strategies: nodes
            .iter()
            .map(|(k, v)| (k.clone(), v.average_strategy()))
            .collect(),
    }
}

/// Chance-enumerating CFR with simultaneous updates for both players.
pub struct VanillaCfr<'a, G: GameTree> {
    game: &'a G,
    nodes: HashMap<String, Node>,
    iterations: u64,
}

impl<'a, G: GameTree> VanillaCfr<'a, G> {
    pub fn new(game: &'a G) -> Self {
        VanillaCfr {
            game,
            nodes: HashMap::new(),
            iterations: 0,
        }
    }

    pub fn run(&mut self, iterations: u64) {
        for _ in 0..iterations {
            for player in 0..2 {
                let root = self.game.root();
                self.walk(&root, player, 1.0, 1.0, 1.0);
            }
            self.iterations += 1;
        }
    }

    /// Returns utility for `player`; `reach_p`/`reach_o` are the updating
    /// player's and opponent's reach, `reach_c` the chance reach.
    fn walk(
        &mut self,
        s: &G::State,
        player: usize,
        reach_p: f64,
        reach_o: f64,
        reach_c: f64,
    ) -> f64 {
        let game = self.game;
        if game.is_terminal(s) {
            return game.utility(s, player);
        }
        if game.is_chance(s) {
            return game
                .chance_outcomes(s)
                .iter()
                .map(|(child, p)| p * self.walk(child, player, reach_p, reach_o, reach_c * p))
                .sum();
        }
        let acting = game.player(s);
        let n = game.num_actions(s);
        let key = game.infoset_key(s);
        let strategy = self
            .nodes
            .entry(key.clone())
            .or_insert_with(|| Node::new(n))
            .current_strategy();

        let mut action_utils = vec![0.0; n];
        let mut node_util = 0.0;
        for a in 0..n {
            let child = game.next(s, a);
            let u = if acting == player {
                self.walk(&child, player, reach_p * strategy[a], reach_o, reach_c)
            } else {
                self.walk(&child, player, reach_p, reach_o * strategy[a], reach_c)
            };
            action_utils[a] = u;
            node_util += strategy[a] * u;
        }

        let node = self.nodes.get_mut(&key).unwrap();
        if acting == player {
            let cf_reach = reach_o * reach_c;
            for a in 0..n {
                node.regret_sum[a] += cf_reach * (action_utils[a] - node_util);
                node.strategy_sum[a] += reach_p * strategy[a];
            }
        }
        node_util
    }

    pub fn average_profile(&self) -> StrategyProfile {
        nodes_to_profile(&self.nodes)
    }
}

/// External-sampling MCCFR.
pub struct ExternalMccfr<'a, G: GameTree> {
    game: &'a G,
    nodes: HashMap<String, Node>,
    rng: ChaCha8Rng,
    iterations: u64,
}

impl<'a, G: GameTree> ExternalMccfr<'a, G> {
    pub fn new(game: &'a G, rng: ChaCha8Rng) -> Self {
        ExternalMccfr {
            game,
            nodes: HashMap::new(),
            rng,
            iterations: 0,
        }
    }

    /// One iteration = one traversal for each player.
    pub fn run(&mut self, iterations: u64) {
        for _ in 0..iterations {
            for player in 0..2 {
                let root = self.game.root();
                self.traverse(&root, player);
            }
            self.iterations += 1;
        }
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    fn sample_index(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
        let total: f64 = probs.iter().sum();
        let mut draw = rng.random_range(0.0..total.max(f64::MIN_POSITIVE));
        for (i, p) in probs.iter().enumerate() {
            if draw < *p {
                return i;
            }
            draw -= p;
        }
        probs.len() - 1
    }

    fn traverse(&mut self, s: &G::State, player: usize) -> f64 {
        let game = self.game;
        if game.is_terminal(s) {
            return game.utility(s, player);
        }
        if game.is_chance(s) {
            let child = game.sample_chance(s, &mut self.rng);
            return self.traverse(&child, player);
        }
        let acting = game.player(s);
        let n = game.num_actions(s);
        let key = game.infoset_key(s);
        let strategy = self
            .nodes
            .entry(key.clone())
            .or_insert_with(|| Node::new(n))
            .current_strategy();

        if acting == player {
            // Enumerate the traverser's actions.
            let mut action_utils = vec![0.0; n];
            let mut node_util = 0.0;
            for a in 0..n {
                let child = game.next(s, a);
                action_utils[a] = self.traverse(&child, player);
                node_util += strategy[a] * action_utils[a];
            }
            let node = self.nodes.get_mut(&key).unwrap();
            for a in 0..n {
                node.regret_sum[a] += action_utils[a] - node_util;
            }
            node_util
        } else {
            // Sample the opponent; accumulate their average strategy here.
            {
                let node = self.nodes.get_mut(&key).unwrap();
                for a in 0..n {
                    node.strategy_sum[a] += strategy[a];
                }
            }
            let a = Self::sample_index(&mut self.rng, &strategy);
            self.traverse(&game.next(s, a), player)
        }
    }

    pub fn average_profile(&self) -> StrategyProfile {
        nodes_to_profile(&self.nodes)
    }
}
