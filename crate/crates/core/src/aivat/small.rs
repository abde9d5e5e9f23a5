//! Trace construction for the exactly-solvable games.
//!
//! These builders exist to *prove* the evaluator's statistical contract —
//! zero-mean corrections under any oracle, Bayes-consistent all-hands values,
//! variance reduction with a competent oracle — by full enumeration on games
//! small enough to enumerate, rather than trusting the derivation.
//!
//! Every logged state carries the hero's posterior range alongside it (see
//! [`RangeState`]). Correction terms can then value each branch for the
//! hero's *whole range* rather than its actual holding ([`Marginalized`]),
//! which is the same base the all-hands metric uses. That consistency is what
//! makes the corrections cancel nearly all of the variance when the oracle is
//! accurate: measuring card luck for the actual holding while reporting the
//! range-averaged outcome would remove the hero's own deal luck twice and
//! reinject it as noise.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{HandTrace, TraceEvent, ValueOracle};
use crate::solver::kuhn::{Kuhn, KuhnState};
use crate::solver::leduc::{Leduc, LeducState};
use crate::solver::{GameTree, StrategyProfile};

/// Action probabilities for the seat to act at a decision state.
pub type StrategyFn<'a, G> = dyn Fn(&G, &<G as GameTree>::State) -> Vec<f64> + 'a;

/// Wrap an average-strategy profile as a strategy function.
pub fn profile_strategy<G: GameTree>(
    profile: &StrategyProfile,
) -> impl Fn(&G, &G::State) -> Vec<f64> + '_ {
    move |g, s| profile.probs(&g.infoset_key(s), g.num_actions(s))
}

/// The always-check/call strategy, located by action label.
pub fn passive_strategy<G: GameTree>() -> impl Fn(&G, &G::State) -> Vec<f64> {
    |g, s| {
        let n = g.num_actions(s);
        let idx = (0..n)
            .find(|&a| matches!(g.action_label(s, a).as_str(), "k" | "c"))
            .unwrap_or(0);
        let mut probs = vec![0.0; n];
        probs[idx] = 1.0;
        probs
    }
}

/// Games whose evaluated-seat private deal can be substituted while replaying
/// the recorded public action sequence — what the all-hands (range) metric
/// needs. The contract: action indices and legality depend only on public
/// information, so a recorded path replays verbatim under any alternative
/// holding.
pub trait PrivateInfoGame: GameTree {
    /// Every private assignment the evaluated seat could have held given the
    /// opponent's cards, with prior probabilities, as full post-deal states.
    /// Includes the actual holding.
    fn hero_alternatives(&self, dealt: &Self::State, hero: usize) -> Vec<(Self::State, f64)>;

    /// Map a realized later chance outcome onto `alt`'s outcome space (same
    /// public consequence), or `None` when the alternative holding makes the
    /// realized outcome impossible (it holds that card).
    fn match_chance(&self, alt: &Self::State, realized: &Self::State) -> Option<Self::State> {
        let _ = (alt, realized);
        None
    }
}

impl PrivateInfoGame for Kuhn {
    fn hero_alternatives(&self, dealt: &KuhnState, hero: usize) -> Vec<(KuhnState, f64)> {
        let cards = dealt.cards.expect("dealt state must hold cards");
        (0..3u8)
            .filter(|&c| c != cards[1 - hero])
            .map(|c| {
                let mut alt_cards = cards;
                alt_cards[hero] = c;
                (
                    KuhnState {
                        cards: Some(alt_cards),
                        history: dealt.history.clone(),
                    },
                    0.5,
                )
            })
            .collect()
    }
}

impl PrivateInfoGame for Leduc {
    fn hero_alternatives(&self, dealt: &LeducState, hero: usize) -> Vec<(LeducState, f64)> {
        let cards = dealt.cards.expect("dealt state must hold cards");
        (0..6u8)
            .filter(|&c| c != cards[1 - hero])
            .map(|c| {
                let mut alt = dealt.clone();
                let mut alt_cards = cards;
                alt_cards[hero] = c;
                alt.cards = Some(alt_cards);
                (alt, 1.0 / 5.0)
            })
            .collect()
    }

    fn match_chance(&self, alt: &LeducState, realized: &LeducState) -> Option<LeducState> {
        let public = realized
            .public
            .expect("realized chance child must reveal the public card");
        self.chance_outcomes(alt)
            .into_iter()
            .map(|(s, _)| s)
            .find(|s| s.public == Some(public))
    }
}

/// A reached state paired with the hero's posterior range: every holding the
/// hero could have held given everything observable from outside its cards,
/// advanced along the same public path, weighted by prior × the probability
/// the hero's strategy assigns to the actions it actually took.
#[derive(Debug, Clone)]
pub struct RangeState<S> {
    /// The state that actually occurred.
    pub state: S,
    /// Hero-substituted parallel states with posterior weights (not
    /// normalized; consumers divide by the total).
    pub range: Vec<(S, f64)>,
}

/// Values a [`RangeState`] by averaging an underlying per-state oracle over
/// the hero's posterior range: `v̄ = Σ w·v(alt) / Σ w`. Falls back to the
/// actual state if the range is empty.
pub struct Marginalized<O>(pub O);

impl<S, O: ValueOracle<S>> ValueOracle<RangeState<S>> for Marginalized<O> {
    fn value(&self, rs: &RangeState<S>) -> f64 {
        let total: f64 = rs.range.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return self.0.value(&rs.state);
        }
        rs.range
            .iter()
            .map(|(s, w)| w * self.0.value(s))
            .sum::<f64>()
            / total
    }
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random_range(0.0..total.max(f64::MIN_POSITIVE));
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    weights.len() - 1
}

/// Attach the hero range to a freshly drawn chance outcome. The first chance
/// event of a hand is the private deal, which creates the range; later ones
/// re-match each hypothesis onto the realized public outcome and drop
/// blocked holdings.
fn attach_range<G: PrivateInfoGame>(
    game: &G,
    hero: usize,
    dealt: bool,
    range: &[(G::State, f64)],
    child: G::State,
) -> RangeState<G::State> {
    let next_range = if dealt {
        range
            .iter()
            .filter_map(|(s, w)| game.match_chance(s, &child).map(|n| (n, *w)))
            .collect()
    } else {
        game.hero_alternatives(&child, hero)
    };
    RangeState {
        state: child,
        range: next_range,
    }
}

/// Advance state and range by a non-hero action. The house acts on its own
/// cards, identical across hero hypotheses, so weights are unchanged.
fn house_step<G: GameTree>(game: &G, current: &RangeState<G::State>, action: usize) -> RangeState<G::State> {
    RangeState {
        state: game.next(&current.state, action),
        range: current
            .range
            .iter()
            .map(|(s, w)| (game.next(s, action), *w))
            .collect(),
    }
}

/// Advance state and range by a hero action: each hypothesis's weight is
/// multiplied by the probability the hero strategy puts on that action from
/// that holding (the Bayes update an observer of the action would make).
fn hero_step<G: GameTree>(
    game: &G,
    hero_strategy: &StrategyFn<'_, G>,
    current: &RangeState<G::State>,
    action: usize,
) -> RangeState<G::State> {
    RangeState {
        state: game.next(&current.state, action),
        range: current
            .range
            .iter()
            .filter_map(|(s, w)| {
                let updated = w * hero_strategy(game, s)[action];
                (updated > 0.0).then(|| (game.next(s, action), updated))
            })
            .collect(),
    }
}

fn terminal_range<G: GameTree>(
    game: &G,
    hero: usize,
    range: &[(G::State, f64)],
) -> Vec<(f64, f64)> {
    range
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(s, w)| (*w, game.utility(s, hero)))
        .collect()
}

fn chance_children<G: PrivateInfoGame>(
    game: &G,
    hero: usize,
    dealt: bool,
    current: &RangeState<G::State>,
) -> Vec<(RangeState<G::State>, f64)> {
    game.chance_outcomes(&current.state)
        .into_iter()
        .map(|(child, p)| (attach_range(game, hero, dealt, &current.range, child), p))
        .collect()
}

/// Play one hand to completion and log everything evaluation needs.
///
/// Every chance node (the private deal first) becomes a chance event and
/// every non-hero decision a house event; children carry the hero range so
/// oracles can value them range-averaged. The terminal range supplies the
/// all-hands hypotheses directly.
pub fn simulate_hand<G: PrivateInfoGame>(
    game: &G,
    hero: usize,
    strategies: [&StrategyFn<'_, G>; 2],
    rng: &mut ChaCha8Rng,
) -> HandTrace<RangeState<G::State>> {
    let mut current = RangeState {
        state: game.root(),
        range: Vec::new(),
    };
    let mut dealt = false;
    let mut chance_events = Vec::new();
    let mut house_events = Vec::new();

    while !game.is_terminal(&current.state) {
        if game.is_chance(&current.state) {
            let children = chance_children(game, hero, dealt, &current);
            dealt = true;
            let weights: Vec<f64> = children.iter().map(|(_, p)| *p).collect();
            let idx = sample_index(&weights, rng);
            let realized = children[idx].0.clone();
            chance_events.push(TraceEvent {
                children,
                realized: realized.clone(),
            });
            current = realized;
        } else {
            let seat = game.player(&current.state);
            let probs = strategies[seat](game, &current.state);
            let idx = sample_index(&probs, rng);
            if seat == hero {
                current = hero_step(game, strategies[hero], &current, idx);
            } else {
                let children: Vec<(RangeState<G::State>, f64)> = (0..probs.len())
                    .map(|a| (house_step(game, &current, a), probs[a]))
                    .collect();
                let realized = children[idx].0.clone();
                house_events.push(TraceEvent {
                    children,
                    realized: realized.clone(),
                });
                current = realized;
            }
        }
    }

    let raw = game.utility(&current.state, hero);
    let range_hypotheses = terminal_range(game, hero, &current.range);
    HandTrace {
        chance_events,
        house_events,
        raw,
        range_hypotheses,
    }
}

/// Enumerate the full distribution over hands as `(probability, trace)`
/// pairs: every chance outcome and every positive-probability action of both
/// seats. Exponential; for contract tests on small games only.
pub fn enumerate_traces<G: PrivateInfoGame>(
    game: &G,
    hero: usize,
    strategies: [&StrategyFn<'_, G>; 2],
) -> Vec<(f64, HandTrace<RangeState<G::State>>)> {
    struct Walker<'w, G: PrivateInfoGame> {
        game: &'w G,
        hero: usize,
        strategies: [&'w StrategyFn<'w, G>; 2],
        out: Vec<(f64, HandTrace<RangeState<G::State>>)>,
    }

    impl<G: PrivateInfoGame> Walker<'_, G> {
        fn walk(
            &mut self,
            current: &RangeState<G::State>,
            dealt: bool,
            prob: f64,
            chance_events: &mut Vec<TraceEvent<RangeState<G::State>>>,
            house_events: &mut Vec<TraceEvent<RangeState<G::State>>>,
        ) {
            if self.game.is_terminal(&current.state) {
                self.out.push((
                    prob,
                    HandTrace {
                        chance_events: chance_events.clone(),
                        house_events: house_events.clone(),
                        raw: self.game.utility(&current.state, self.hero),
                        range_hypotheses: terminal_range(self.game, self.hero, &current.range),
                    },
                ));
                return;
            }
            if self.game.is_chance(&current.state) {
                let children = chance_children(self.game, self.hero, dealt, current);
                for i in 0..children.len() {
                    let p = children[i].1;
                    chance_events.push(TraceEvent {
                        children: children.clone(),
                        realized: children[i].0.clone(),
                    });
                    self.walk(&children[i].0.clone(), true, prob * p, chance_events, house_events);
                    chance_events.pop();
                }
                return;
            }
            let seat = self.game.player(&current.state);
            let probs = self.strategies[seat](self.game, &current.state);
            if seat == self.hero {
                for (idx, p) in probs.iter().enumerate() {
                    if *p <= 0.0 {
                        continue;
                    }
                    let next = hero_step(self.game, self.strategies[self.hero], current, idx);
                    self.walk(&next, dealt, prob * p, chance_events, house_events);
                }
            } else {
                let children: Vec<(RangeState<G::State>, f64)> = (0..probs.len())
                    .map(|a| (house_step(self.game, current, a), probs[a]))
                    .collect();
                for (idx, p) in probs.iter().enumerate() {
                    if *p <= 0.0 {
                        continue;
                    }
                    house_events.push(TraceEvent {
                        children: children.clone(),
                        realized: children[idx].0.clone(),
                    });
                    self.walk(&children[idx].0.clone(), dealt, prob * p, chance_events, house_events);
                    house_events.pop();
                }
            }
        }
    }

    let mut walker = Walker {
        game,
        hero,
        strategies,
        out: Vec::new(),
    };
    let root = RangeState {
        state: game.root(),
        range: Vec::new(),
    };
    walker.walk(&root, false, 1.0, &mut Vec::new(), &mut Vec::new());
    walker.out
}

/// Exact expected hero chips from any state when both seats play fixed
/// strategies, by enumeration below the state, memoized. The default oracle
/// for the exactly-solvable games; wrap in [`Marginalized`] to value
/// [`RangeState`]s.
pub struct SelfPlayOracle<'a, G: GameTree>
where
    G::State: std::fmt::Debug,
{
    game: &'a G,
    strategies: [&'a StrategyFn<'a, G>; 2],
    hero: usize,
    memo: RefCell<HashMap<String, f64>>,
}

impl<'a, G: GameTree> SelfPlayOracle<'a, G>
where
    G::State: std::fmt::Debug,
{
    pub fn new(game: &'a G, strategies: [&'a StrategyFn<'a, G>; 2], hero: usize) -> Self {
        SelfPlayOracle {
            game,
            strategies,
            hero,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn eval(&self, state: &G::State) -> f64 {
        if self.game.is_terminal(state) {
            return self.game.utility(state, self.hero);
        }
        let key = format!("{state:?}");
        if let Some(v) = self.memo.borrow().get(&key) {
            return *v;
        }
        let v = if self.game.is_chance(state) {
            self.game
                .chance_outcomes(state)
                .iter()
                .map(|(child, p)| p * self.eval(child))
                .sum()
        } else {
            let seat = self.game.player(state);
            let probs = self.strategies[seat](self.game, state);
            probs
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(a, p)| p * self.eval(&self.game.next(state, a)))
                .sum()
        };
        self.memo.borrow_mut().insert(key, v);
        v
    }
}

impl<G: GameTree> ValueOracle<G::State> for SelfPlayOracle<'_, G>
where
    G::State: std::fmt::Debug,
{
    fn value(&self, state: &G::State) -> f64 {
        self.eval(state)
    }
}
