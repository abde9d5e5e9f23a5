//! Scenario-sampled abstract HUNL and the trained house opponent.
//!
//! Training plays the real betting engine over a bet-size grid, with card
//! information reduced to per-street buckets. Chance is a uniform draw over
//! pre-sampled scenarios (bucket paths plus the showdown winner), which keeps
//! the tree finite while preserving real chip mechanics. At serve time the
//! house mirrors the live hand into the abstraction, translating off-grid
//! opponent bets with seeded pseudo-harmonic sampling, and realizes its
//! abstract choice back into a legal real action.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::abstraction::{
    pseudo_harmonic_weight, sample_scenarios, AbstractionConfig, CardAbstraction, Scenario,
};
use super::cfr::ExternalMccfr;
use super::{GameTree, StrategyProfile};
use crate::agents::{ActionDistribution, Agent, Observation, StrategyAction};
use crate::engine::{
    codec, Action, Chips, GameConfig, HandState, HistoryToken, Outcome, Street,
};

fn street_idx(street: Street) -> usize {
    match street {
        Street::Preflop => 0,
        Street::Flop => 1,
        Street::Turn => 2,
        Street::River => 3,
    }
}

/// Current bet-to level of a round (highest commitment this street).
fn level(hand: &HandState) -> Chips {
    hand.round_committed()[0].max(hand.round_committed()[1])
}

/// Pot size used for fraction sizing: chips already banked plus both players
/// matched at the current level (the pot a caller would create).
fn pot_ref(hand: &HandState) -> Chips {
    hand.common_pot() + 2 * level(hand)
}

fn bets_this_street(hand: &HandState) -> u32 {
    let mut n = 0;
    for tok in hand.history().iter().rev() {
        match tok {
            HistoryToken::StreetEnd => break,
            HistoryToken::Action(Action::BetTo(_)) => n += 1,
            _ => {}
        }
    }
    n
}

/// Semantic bet sizes in the abstraction.
#[derive(Debug, Clone, Copy, PartialEq)]
enum GridSize {
    Frac(f64),
    AllIn,
}

/// The abstract action set at a node: fold / one passive action / grid bets.
fn abstract_actions(hand: &HandState, config: &AbstractionConfig) -> Vec<Action> {
    let legal = hand.legal_actions().expect("decision node");
    let mut out = Vec::with_capacity(3 + config.bet_fractions.len());
    if legal.can_fold {
        out.push(Action::Fold);
    }
    if legal.can_check {
        out.push(Action::Check);
    } else {
        out.push(Action::Call);
    }
    if let Some(r) = legal.raise {
        if bets_this_street(hand) < config.raise_cap {
            let lvl = level(hand);
            let pot = pot_ref(hand) as f64;
            let mut targets: Vec<Chips> = config
                .bet_fractions
                .iter()
                .map(|f| {
                    let t = lvl as f64 + f * pot;
                    (t.round() as Chips).clamp(r.min, r.max)
                })
                .collect();
            targets.push(r.max);
            targets.sort_unstable();
            targets.dedup();
            out.extend(targets.into_iter().map(Action::BetTo));
        }
    }
    out
}

/// Grid sizes in the same order `abstract_actions` generates bets, before
/// clamping merges duplicates: the fractions ascending, then all-in.
fn grid_sizes(config: &AbstractionConfig) -> Vec<GridSize> {
    let mut v: Vec<GridSize> = config.bet_fractions.iter().map(|f| GridSize::Frac(*f)).collect();
    v.push(GridSize::AllIn);
    v
}

/// Realize a semantic size as a bet-to target in `hand`, when raising is
/// possible at all.
fn realize_size(hand: &HandState, size: GridSize) -> Option<Chips> {
    let r = hand.legal_actions().ok()?.raise?;
    Some(match size {
        GridSize::AllIn => r.max,
        GridSize::Frac(f) => {
            let t = level(hand) as f64 + f * pot_ref(hand) as f64;
            (t.round() as Chips).clamp(r.min, r.max)
        }
    })
}

/// Pick the semantic grid size for an observed real bet via pseudo-harmonic
/// sampling between the bracketing grid sizes, measured as pot fractions of
/// the state the bet was made in. Deterministic in `rng`.
fn translate_bet(
    hand: &HandState,
    amount: Chips,
    config: &AbstractionConfig,
    rng: &mut ChaCha8Rng,
) -> GridSize {
    let lvl = level(hand) as f64;
    let pot = pot_ref(hand) as f64;
    let frac_of = |size: GridSize| -> Option<f64> {
        realize_size(hand, size).map(|t| (t as f64 - lvl) / pot)
    };
    let x = (amount as f64 - lvl) / pot;
    let sizes = grid_sizes(config);
    // Fractions of each grid size, realized in this state (clamping makes
    // them state-dependent near the all-in boundary).
    let realized: Vec<(GridSize, f64)> = sizes
        .iter()
        .filter_map(|s| frac_of(*s).map(|f| (*s, f)))
        .collect();
    if realized.is_empty() {
        return GridSize::AllIn;
    }
    let mut below: Option<(GridSize, f64)> = None;
    let mut above: Option<(GridSize, f64)> = None;
    for (s, f) in &realized {
        if *f <= x && below.map(|(_, bf)| *f > bf).unwrap_or(true) {
            below = Some((*s, *f));
        }
        if *f >= x && above.map(|(_, af)| *f < af).unwrap_or(true) {
            above = Some((*s, *f));
        }
    }
    match (below, above) {
        (Some((s, _)), None) => s,
        (None, Some((s, _))) => s,
        (None, None) => GridSize::AllIn,
        (Some((sa, a)), Some((sb, b))) => {
            if (a - b).abs() < 1e-12 {
                sa
            } else {
                let w = pseudo_harmonic_weight(a, b, x);
                let draw = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                if draw < w {
                    sa
                } else {
                    sb
                }
            }
        }
    }
}

/// Training-time state: a scenario id plus a live engine hand over dummy
/// cards (the cards are never consulted; showdowns use the scenario winner).
#[derive(Clone)]
pub struct AbsState {
    pub scenario: Option<u32>,
    pub hand: HandState,
}

pub struct HunlAbstract {
    pub game_config: GameConfig,
    pub abstraction_config: AbstractionConfig,
    pub scenarios: Vec<Scenario>,
    root_hand: HandState,
}

impl HunlAbstract {
    pub fn new(
        game_config: GameConfig,
        abstraction_config: AbstractionConfig,
        scenarios: Vec<Scenario>,
    ) -> HunlAbstract {
        // Any fixed deal works: utilities never inspect these cards.
        let deck = crate::engine::shuffled_deck(0, 0);
        let deal = crate::engine::Deal {
            hole: [[deck[0], deck[1]], [deck[2], deck[3]]],
            board: [deck[4], deck[5], deck[6], deck[7], deck[8]],
        };
        let root_hand = HandState::from_deal(game_config, 0, 0, deal);
        HunlAbstract {
            game_config,
            abstraction_config,
            scenarios,
            root_hand,
        }
    }

    fn scenario(&self, s: &AbsState) -> &Scenario {
        &self.scenarios[s.scenario.unwrap() as usize]
    }

    /// Infoset key: own bucket path through the current street, then the
    /// abstract betting history. Public information plus private buckets.
    fn key_for(&self, s: &AbsState, player: usize) -> String {
        let sc = self.scenario(s);
        let si = street_idx(s.hand.street());
        let path: Vec<String> = (0..=si)
            .map(|i| sc.buckets[player][i].to_string())
            .collect();
        format!("{}|{}", path.join("."), codec::history_string(s.hand.history()))
    }
}

impl GameTree for HunlAbstract {
    type State = AbsState;

    fn root(&self) -> AbsState {
        AbsState {
            scenario: None,
            hand: self.root_hand.clone(),
        }
    }

    fn is_terminal(&self, s: &AbsState) -> bool {
        s.scenario.is_some() && s.hand.is_terminal()
    }

    fn utility(&self, s: &AbsState, player: usize) -> f64 {
        let u0 = match s.hand.outcome().expect("terminal") {
            Outcome::Fold { .. } => s.hand.winnings().unwrap()[0] as f64,
            Outcome::Showdown => {
                let contrib = s.hand.contributed(0) as f64;
                debug_assert_eq!(s.hand.contributed(0), s.hand.contributed(1));
                match self.scenario(s).winner {
                    0 => contrib,
                    1 => -contrib,
                    _ => 0.0,
                }
            }
        };
        if player == 0 {
            u0
        } else {
            -u0
        }
    }

    fn is_chance(&self, s: &AbsState) -> bool {
        s.scenario.is_none()
    }

    fn chance_outcomes(&self, s: &AbsState) -> Vec<(AbsState, f64)> {
        let p = 1.0 / self.scenarios.len() as f64;
        (0..self.scenarios.len() as u32)
            .map(|i| {
                (
                    AbsState {
                        scenario: Some(i),
                        hand: s.hand.clone(),
                    },
                    p,
                )
            })
            .collect()
    }

    fn sample_chance(&self, s: &AbsState, rng: &mut ChaCha8Rng) -> AbsState {
        let i = (rng.next_u64() % self.scenarios.len() as u64) as u32;
        AbsState {
            scenario: Some(i),
            hand: s.hand.clone(),
        }
    }

    fn player(&self, s: &AbsState) -> usize {
        s.hand.to_act().expect("decision node")
    }

    fn num_actions(&self, s: &AbsState) -> usize {
        abstract_actions(&s.hand, &self.abstraction_config).len()
    }

    fn next(&self, s: &AbsState, action: usize) -> AbsState {
        let a = abstract_actions(&s.hand, &self.abstraction_config)[action];
        AbsState {
            scenario: s.scenario,
            hand: s.hand.apply_action(a).expect("abstract action is legal"),
        }
    }

    fn infoset_key(&self, s: &AbsState) -> String {
        self.key_for(s, self.player(s))
    }

    fn action_label(&self, s: &AbsState, action: usize) -> String {
        abstract_actions(&s.hand, &self.abstraction_config)[action].to_string()
    }
}

/// Training knobs for the house opponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseTrainConfig {
    pub abstraction: AbstractionConfig,
    pub scenarios: usize,
    pub iterations: u64,
    pub seed: u64,
}

impl Default for HouseTrainConfig {
    fn default() -> Self {
        HouseTrainConfig {
            abstraction: AbstractionConfig::default(),
            scenarios: 3_000,
            iterations: 200_000,
            seed: 0xD1CE,
        }
    }
}

/// A trained house opponent: abstraction plus average strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HouseModel {
    pub game_config: GameConfig,
    pub abstraction: CardAbstraction,
    pub profile: StrategyProfile,
    pub train: HouseTrainConfig,
}

impl HouseModel {
    pub fn train(game_config: GameConfig, train: HouseTrainConfig) -> HouseModel {
        let abstraction = CardAbstraction::fit(train.abstraction.clone(), train.seed);
        let scenarios = sample_scenarios(&abstraction, train.seed, train.scenarios);
        let game = HunlAbstract::new(game_config, train.abstraction.clone(), scenarios);
        let mut mccfr = ExternalMccfr::new(&game, ChaCha8Rng::seed_from_u64(train.seed));
        mccfr.run(train.iterations);
        HouseModel {
            game_config,
            abstraction,
            profile: mccfr.average_profile(),
            train,
        }
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)
            .map_err(std::io::Error::other)
    }

    pub fn load(path: &Path) -> std::io::Result<HouseModel> {
        let file = std::fs::File::open(path)?;
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(std::io::Error::other)
    }

    /// Exploitability of the house within its own abstraction, averaged over
    /// both seats, in chips per hand, measured on a fresh scenario sample.
    /// A lower bound on real-game exploitability; reported, never asserted.
    pub fn abstract_exploitability(&self, eval_scenarios: usize, seed: u64) -> f64 {
        let scenarios = sample_scenarios(&self.abstraction, seed, eval_scenarios);
        let game = HunlAbstract::new(self.game_config, self.train.abstraction.clone(), scenarios);
        super::best_response::exploitability(&game, &self.profile)
    }
}

/// Serving-time mirror of a live hand inside the abstraction: a parallel
/// engine state whose bets all sit on the grid.
struct Mirror {
    /// Real-amount replay used to measure observed bets in their true pot.
    real: HandState,
    /// Grid-amount replay that generates infoset keys.
    mirror: HandState,
}

impl Mirror {
    /// Rebuild both replays from a public history. Translation randomness is
    /// derived from `(hand_id, token index)`, so every query over the same
    /// hand sees the same mapping.
    fn build(
        config: GameConfig,
        hand_id: u64,
        history: &[HistoryToken],
        abs_config: &AbstractionConfig,
    ) -> Mirror {
        let deck = crate::engine::shuffled_deck(0, 0);
        let deal = crate::engine::Deal {
            hole: [[deck[0], deck[1]], [deck[2], deck[3]]],
            board: [deck[4], deck[5], deck[6], deck[7], deck[8]],
        };
        // Seat 0 is the small blind in both replays; real seats map to
        // positions before we get here.
        let mut real = HandState::from_deal(config, hand_id, 0, deal);
        let mut mirror = real.clone();
        for (i, tok) in history.iter().enumerate() {
            let action = match tok {
                HistoryToken::StreetEnd => continue, // both replays auto-insert
                HistoryToken::Action(a) => *a,
            };
            let mirror_action = match action {
                Action::Fold => Action::Fold,
                Action::Check => Action::Check,
                Action::Call => Action::Call,
                Action::BetTo(x) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        hand_id
                            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                            .wrapping_add(i as u64),
                    );
                    let size = translate_bet(&real, x, abs_config, &mut rng);
                    match realize_size(&mirror, size) {
                        Some(t) => Action::BetTo(t),
                        // The mirror can no longer raise (its stack drifted
                        // dry); degrade to a call to stay in the hand.
                        None => Action::Call,
                    }
                }
            };
            let next_mirror = mirror
                .apply_action(mirror_action)
                .or_else(|_| mirror.apply_action(Action::Call))
                .or_else(|_| mirror.apply_action(Action::Check));
            if let Ok(m) = next_mirror {
                mirror = m;
            }
            if let Ok(r) = real.apply_action(action) {
                real = r;
            }
        }
        Mirror { real, mirror }
    }
}

/// The trained opponent as an [`Agent`]. Fully queryable: its mixed strategy
/// at any observation is a pure function of the model and the observation.
pub struct HouseAgent {
    model: Arc<HouseModel>,
    name: String,
}

impl HouseAgent {
    pub fn new(model: Arc<HouseModel>) -> HouseAgent {
        HouseAgent {
            model,
            name: "house".to_string(),
        }
    }

    pub fn model(&self) -> &Arc<HouseModel> {
        &self.model
    }

    /// Bucket path of `hole` through the streets revealed by `board`.
    fn bucket_path(&self, hole: [crate::cards::Card; 2], board: &[crate::cards::Card]) -> Vec<u16> {
        let streets = [Street::Preflop, Street::Flop, Street::Turn, Street::River];
        let current = match board.len() {
            0 => 0,
            3 => 1,
            4 => 2,
            _ => 3,
        };
        (0..=current)
            .map(|i| self.model.abstraction.bucket(streets[i], hole, board))
            .collect()
    }

    /// The house strategy at an observation, expressed over real actions.
    fn real_strategy(&self, obs: &Observation) -> ActionDistribution {
        let mirror = Mirror::build(
            obs.config,
            obs.hand_id,
            &obs.history,
            &self.model.train.abstraction,
        );
        if mirror.mirror.is_terminal() || mirror.mirror.to_act().is_none() {
            // Mirror desynchronized beyond repair; play safe.
            return ActionDistribution::pure(if obs.legal.can_check {
                Action::Check
            } else {
                Action::Call
            });
        }
        let path = self.bucket_path(obs.hole, &obs.board);
        let path_str: Vec<String> = path.iter().map(|b| b.to_string()).collect();
        let key = format!(
            "{}|{}",
            path_str.join("."),
            codec::history_string(mirror.mirror.history())
        );
        let options = abstract_actions(&mirror.mirror, &self.model.train.abstraction);
        let probs = self.model.profile.probs(&key, options.len());

        // Realize each abstract option as a legal real action and merge
        // duplicates.
        let mut merged: HashMap<Action, f64> = HashMap::new();
        for (opt, p) in options.iter().zip(probs.iter()) {
            if *p <= 0.0 {
                continue;
            }
            let real_action = match opt {
                Action::Fold if obs.legal.can_fold => Action::Fold,
                Action::Fold => Action::Check,
                Action::Check if obs.legal.can_check => Action::Check,
                Action::Check => Action::Call,
                Action::Call if obs.legal.can_call => Action::Call,
                Action::Call => Action::Check,
                Action::BetTo(t) => match obs.legal.raise {
                    Some(r) => {
                        // Map the mirror target back through its pot fraction.
                        let m_lvl = level(&mirror.mirror) as f64;
                        let m_pot = pot_ref(&mirror.mirror) as f64;
                        let frac = (*t as f64 - m_lvl) / m_pot.max(1.0);
                        let r_lvl = level(&mirror.real) as f64;
                        let r_pot = pot_ref(&mirror.real) as f64;
                        let target = (r_lvl + frac * r_pot).round() as Chips;
                        Action::BetTo(target.clamp(r.min, r.max))
                    }
                    None if obs.legal.can_call => Action::Call,
                    None => Action::Check,
                },
            };
            *merged.entry(real_action).or_insert(0.0) += p;
        }
        let sort_key = |a: &Action| match a {
            Action::Fold => (0u8, 0u32),
            Action::Check => (1, 0),
            Action::Call => (2, 0),
            Action::BetTo(x) => (3, *x),
        };
        let mut entries: Vec<(StrategyAction, f64)> = merged
            .into_iter()
            .map(|(a, p)| (StrategyAction::Fixed(a), p))
            .collect();
        entries.sort_by_key(|(sa, _)| match sa {
            StrategyAction::Fixed(a) => sort_key(a),
            StrategyAction::BetUniform { min, .. } => (4, *min),
        });
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if total <= 0.0 {
            return ActionDistribution::pure(if obs.legal.can_check {
                Action::Check
            } else {
                Action::Call
            });
        }
        for e in &mut entries {
            e.1 /= total;
        }
        ActionDistribution { entries }
    }
}

impl Agent for HouseAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Action {
        self.real_strategy(obs).sample(rng)
    }

    fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
        Some(self.real_strategy(obs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::abstraction::EQUITY_BINS;

    fn tiny_model() -> HouseModel {
        let train = HouseTrainConfig {
            abstraction: AbstractionConfig {
                bet_fractions: vec![0.5, 1.0],
                raise_cap: 2,
                buckets: 3,
                runouts: 8,
                opp_samples: 4,
                fit_points: 40,
            },
            scenarios: 60,
            iterations: 2_000,
            seed: 9,
        };
        HouseModel::train(GameConfig::default(), train)
    }

    #[test]
    fn abstract_actions_follow_the_grid() {
        let g = GameConfig::default();
        let deck = crate::engine::shuffled_deck(0, 0);
        let deal = crate::engine::Deal {
            hole: [[deck[0], deck[1]], [deck[2], deck[3]]],
            board: [deck[4], deck[5], deck[6], deck[7], deck[8]],
        };
        let hand = HandState::from_deal(g, 0, 0, deal);
        let cfg = AbstractionConfig::default();
        let acts = abstract_actions(&hand, &cfg);
        // SB first in: fold, call, half-pot (200... clamped to min 200),
        // pot (300), all-in.
        assert_eq!(acts[0], Action::Fold);
        assert_eq!(acts[1], Action::Call);
        // pot_ref preflop = 0 + 2×100 = 200 → half-pot raise to 200, pot 300.
        assert!(acts.contains(&Action::BetTo(200)));
        assert!(acts.contains(&Action::BetTo(300)));
        assert!(acts.contains(&Action::BetTo(20_000)));
    }

    #[test]
    fn bet_translation_is_deterministic_and_bracketing() {
        let g = GameConfig::default();
        let deck = crate::engine::shuffled_deck(0, 0);
        let deal = crate::engine::Deal {
            hole: [[deck[0], deck[1]], [deck[2], deck[3]]],
            board: [deck[4], deck[5], deck[6], deck[7], deck[8]],
        };
        let hand = HandState::from_deal(g, 0, 0, deal);
        let cfg = AbstractionConfig::default();
        // On-grid amounts map to themselves deterministically.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            translate_bet(&hand, 300, &cfg, &mut rng),
            GridSize::Frac(1.0)
        );
        // Off-grid amounts land on one of the two brackets only.
        for s in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let got = translate_bet(&hand, 250, &cfg, &mut rng);
            assert!(
                got == GridSize::Frac(0.5) || got == GridSize::Frac(1.0),
                "{got:?}"
            );
        }
        // Same seed, same answer.
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            translate_bet(&hand, 777, &cfg, &mut r1),
            translate_bet(&hand, 777, &cfg, &mut r2)
        );
    }

    #[test]
    fn trained_house_plays_legally_and_deterministically() {
        let model = Arc::new(tiny_model());
        assert!(!model.profile.is_empty());
        for street_dim in &model.abstraction.centroids {
            assert_eq!(street_dim.len(), 3);
        }
        assert!(model.abstraction.centroids[0][0].len() == EQUITY_BINS);

        let mut house = HouseAgent::new(model.clone());
        let mut cc = crate::agents::CheckCall;
        for h in 0..30u64 {
            let mut agents: [&mut dyn Agent; 2] = [&mut house, &mut cc];
            let played = crate::agents::play_hand(
                GameConfig::default(),
                77,
                h,
                (h % 2) as usize,
                &mut agents,
            )
            .expect("house actions must be legal");
            assert!(played.state.is_terminal());
        }

        // Strategy queries are stable.
        let st = crate::engine::deal_hand(GameConfig::default(), 77, 0, 0);
        let obs = Observation::from_state(&st).unwrap();
        let house = HouseAgent::new(model);
        let d1 = house.strategy(&obs).unwrap();
        let d2 = house.strategy(&obs).unwrap();
        assert_eq!(d1, d2);
        assert!((d1.total_weight() - 1.0).abs() < 1e-9);
    }
}
