//! Evaluation of recorded hold'em hands.
//!
//! A [`HandRecord`] is unpacked into a [`HandTrace`] whose states are
//! [`EvalPoint`]s — just enough information for a value oracle to price: the
//! evaluated seat's cards, the visible board, the pot, and the seat's
//! investment. Working on these snapshots (rather than full engine states)
//! keeps every child of every event well-defined, including counterfactual
//! boards that would collide with cards dealt later in the real hand.
//!
//! Sampling policy, chosen so the zero-mean contract survives:
//! * the evaluated seat's hole event and the turn/river events enumerate
//!   every alternative exactly;
//! * flop alternatives are sampled (there are 17,296), i.i.d. from the same
//!   uniform law the real flop was drawn from, independent of the realized
//!   flop — an unbiased estimate of the expected child value, which is all
//!   zero-mean needs;
//! * bet-range entries of a logged mixed strategy are expanded the same way.
//!
//! All sampling is seeded per hand from `(config seed, hand_id)`, so a given
//! record always evaluates to the same numbers, in any order, on any number
//! of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AivatReport, EvalError, HandTrace, HandValues, TraceEvent, ValueOracle};
use crate::agents::{Agent, Observation, StrategyAction};
use crate::cards::{full_deck, hole_class_id, Card};
use crate::engine::{
    codec, evaluate_seven, Action, HandState, HistoryToken, Outcome, Seat, Street,
};
use crate::record::HandRecord;
use crate::solver::abstraction::{mc_equity, preflop_class_equity};

/// A point a value oracle can price.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalPoint {
    /// Hand over: exact chips for the evaluated seat.
    Settled(f64),
    /// Live hand, described by what the evaluated seat can see.
    Live {
        hole: [Card; 2],
        board: Vec<Card>,
        total_pot: f64,
        contributed: f64,
    },
}

impl EvalPoint {
    pub fn of_state(state: &HandState, hero: Seat) -> EvalPoint {
        match state.winnings() {
            Some(w) => EvalPoint::Settled(w[hero] as f64),
            None => EvalPoint::Live {
                hole: state.hole_cards(hero),
                board: state.board().to_vec(),
                total_pot: state.total_pot() as f64,
                contributed: state.contributed(hero) as f64,
            },
        }
    }
}

/// Default oracle: pot share by showdown equity, minus chips invested.
/// Settled points are exact; live preflop points use the cached 169-class
/// equity table and postflop points seeded Monte-Carlo rollouts, so a given
/// point always prices to the same number.
pub struct EquityOracle {
    pub samples: usize,
}

impl ValueOracle<EvalPoint> for EquityOracle {
    fn value(&self, point: &EvalPoint) -> f64 {
        match point {
            EvalPoint::Settled(v) => *v,
            EvalPoint::Live {
                hole,
                board,
                total_pot,
                contributed,
            } => {
                let equity = if board.is_empty() {
                    preflop_class_equity(hole_class_id(*hole))
                } else {
                    mc_equity(*hole, board, self.samples, 0)
                };
                equity * total_pot - contributed
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HunlEvalConfig {
    /// Sampled alternative flops per hand; turn and river enumerate exactly.
    pub flop_samples: usize,
    /// Monte-Carlo rollouts behind each postflop oracle call.
    pub equity_samples: usize,
    /// Hole-pair hypotheses for the all-hands metric; 0 enumerates all.
    pub range_samples: usize,
    /// Expansion width for a bet-range entry of a logged mixed strategy.
    pub bet_samples: usize,
    /// Base seed; evaluation is deterministic in `(records, config)`.
    pub seed: u64,
}

impl Default for HunlEvalConfig {
    fn default() -> Self {
        HunlEvalConfig {
            flop_samples: 64,
            equity_samples: 96,
            range_samples: 160,
            bet_samples: 8,
            seed: 0xA11CE,
        }
    }
}

fn bad(e: impl std::fmt::Display) -> EvalError {
    EvalError::BadRecord(e.to_string())
}

/// The record replayed into per-decision engine states.
struct Replayed {
    /// `(at_token, state before the action)` for every action, in order.
    decisions: Vec<(usize, HandState)>,
    terminal: HandState,
}

fn replay(record: &HandRecord) -> Result<Replayed, EvalError> {
    let tokens = codec::decode_history(&record.history).map_err(bad)?;
    let mut state = HandState::from_deal(
        record.config,
        record.hand_id,
        record.sb_seat,
        record.deal,
    );
    let mut decisions = Vec::new();
    for token in &tokens {
        if let HistoryToken::Action(a) = token {
            decisions.push((state.history().len(), state.clone()));
            state = state.apply_action(*a).map_err(bad)?;
        }
    }
    if state.history() != tokens.as_slice() {
        return Err(bad("history separators do not match engine replay"));
    }
    if state.winnings() != Some(record.winnings) {
        return Err(bad(format!(
            "recorded winnings {:?} do not match replay {:?}",
            record.winnings,
            state.winnings()
        )));
    }
    Ok(Replayed {
        decisions,
        terminal: state,
    })
}

fn remaining(excluded: &[Card]) -> Vec<Card> {
    full_deck()
        .into_iter()
        .filter(|c| !excluded.contains(c))
        .collect()
}

/// Build the evaluation trace for one record.
///
/// `range_source` supplies the evaluated agent's strategy for the all-hands
/// weighting (the agent itself when queryable, the house policy as a flagged
/// proxy otherwise); `None` leaves the range empty and the all-hands value
/// degrades to the raw outcome. Opponent decisions without a logged
/// distribution contribute no action event — the unknown policy is treated
/// as a point mass on the taken action, whose luck is exactly zero.
pub fn hand_trace(
    record: &HandRecord,
    range_source: Option<&dyn Agent>,
    cfg: &HunlEvalConfig,
) -> Result<HandTrace<EvalPoint>, EvalError> {
    let replayed = replay(record)?;
    let hero = record.agent_seat;
    let opp = 1 - hero;
    let config = record.config;
    let mut rng = ChaCha8Rng::seed_from_u64(
        cfg.seed ^ record.hand_id.wrapping_mul(0x9e37_79b9_7f4a_7c15),
    );

    let mut chance_events = Vec::new();

    // --- The evaluated seat's hole cards. In the dealing order used for
    // corrections, the opponent's cards come first and are conditioned on,
    // so alternatives exclude only those; collisions with cards dealt later
    // are legitimate counterfactuals.
    {
        let preflop_pot = (config.small_blind() + config.big_blind()) as f64;
        let hero_blind = if hero == record.sb_seat {
            config.small_blind()
        } else {
            config.big_blind()
        } as f64;
        let live = |hole: [Card; 2]| EvalPoint::Live {
            hole,
            board: Vec::new(),
            total_pot: preflop_pot,
            contributed: hero_blind,
        };
        let pool = remaining(&record.deal.hole[opp]);
        let mut children = Vec::with_capacity(pool.len() * (pool.len() - 1) / 2);
        for i in 0..pool.len() {
            for j in (i + 1)..pool.len() {
                children.push((live([pool[i], pool[j]]), 1.0));
            }
        }
        chance_events.push(TraceEvent {
            children,
            realized: live(record.deal.hole[hero]),
        });
    }

    // --- Board events, one per street the hand actually revealed.
    let revealed = replayed.terminal.board().len();
    let hero_hole = record.deal.hole[hero];
    for street in [Street::Flop, Street::Turn, Street::River] {
        let len = street.board_len();
        if revealed < len {
            break;
        }
        // Pot and investment at the start of the street: the state before the
        // street's first action, or the terminal state when an all-in runout
        // left no action to take (nothing changes after the all-in call).
        let (total_pot, contributed) = replayed
            .decisions
            .iter()
            .find(|(_, s)| s.street() == street)
            .map(|(_, s)| (s.total_pot() as f64, s.contributed(hero) as f64))
            .unwrap_or((
                replayed.terminal.total_pot() as f64,
                replayed.terminal.contributed(hero) as f64,
            ));
        let prior = &record.deal.board[..len - if street == Street::Flop { 3 } else { 1 }];
        let live = |cards: &[Card]| EvalPoint::Live {
            hole: hero_hole,
            board: prior.iter().chain(cards).copied().collect(),
            total_pot,
            contributed,
        };
        let mut used: Vec<Card> = record.deal.hole[0].to_vec();
        used.extend_from_slice(&record.deal.hole[1]);
        used.extend_from_slice(prior);
        let pool = remaining(&used);
        let children = if street == Street::Flop {
            (0..cfg.flop_samples.max(1))
                .map(|_| {
                    let picks = rand::seq::index::sample(&mut rng, pool.len(), 3);
                    let cards: Vec<Card> = picks.iter().map(|i| pool[i]).collect();
                    (live(&cards), 1.0)
                })
                .collect()
        } else {
            pool.iter().map(|&c| (live(&[c]), 1.0)).collect()
        };
        chance_events.push(TraceEvent {
            children,
            realized: live(&record.deal.board[len - if street == Street::Flop { 3 } else { 1 }..len]),
        });
    }

    // --- Opponent mixed-strategy draws.
    let state_at: std::collections::HashMap<usize, &HandState> = replayed
        .decisions
        .iter()
        .map(|(at, s)| (*at, s))
        .collect();
    let mut house_events = Vec::new();
    for d in record.decisions.iter().filter(|d| d.seat == opp) {
        let Some(dist) = &d.distribution else {
            continue;
        };
        let point_mass = dist.entries.len() == 1
            && match dist.entries[0].0 {
                StrategyAction::Fixed(_) => true,
                StrategyAction::BetUniform { min, max } => min == max,
            };
        if point_mass {
            continue;
        }
        let state = state_at
            .get(&d.at_token)
            .copied()
            .ok_or_else(|| bad(format!("no decision state at token {}", d.at_token)))?;
        if state.to_act() != Some(d.seat) {
            return Err(bad(format!(
                "decision log says seat {} acts at token {} but replay disagrees",
                d.seat, d.at_token
            )));
        }
        let after = |a: Action| -> Result<EvalPoint, EvalError> {
            Ok(EvalPoint::of_state(&state.apply_action(a).map_err(bad)?, hero))
        };
        let mut children = Vec::new();
        for (entry, weight) in &dist.entries {
            match *entry {
                StrategyAction::Fixed(a) => children.push((after(a)?, *weight)),
                StrategyAction::BetUniform { min, max } => {
                    let span = (max - min + 1) as usize;
                    if span <= cfg.bet_samples.max(1) {
                        for x in min..=max {
                            children.push((after(Action::BetTo(x))?, weight / span as f64));
                        }
                    } else {
                        let k = cfg.bet_samples.max(1);
                        for _ in 0..k {
                            use rand::Rng;
                            let x = rng.random_range(min..=max);
                            children.push((after(Action::BetTo(x))?, weight / k as f64));
                        }
                    }
                }
            }
        }
        house_events.push(TraceEvent {
            children,
            realized: after(d.action)?,
        });
    }

    let raw = record.winnings[hero] as f64;
    let range_hypotheses = match range_source {
        Some(agent) => range_hypotheses(record, &replayed, agent, cfg, &mut rng)?,
        None => Vec::new(),
    };

    Ok(HandTrace {
        chance_events,
        house_events,
        raw,
        range_hypotheses,
    })
}

/// All-hands hypotheses: every holding the evaluated seat could have had
/// given the opponent's cards and the revealed board, weighted by the
/// probability `range_source` would have taken the recorded actions with it.
fn range_hypotheses(
    record: &HandRecord,
    replayed: &Replayed,
    range_source: &dyn Agent,
    cfg: &HunlEvalConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, f64)>, EvalError> {
    let hero = record.agent_seat;
    let opp = 1 - hero;
    let terminal = &replayed.terminal;
    let raw = record.winnings[hero] as f64;

    let mut known: Vec<Card> = record.deal.hole[opp].to_vec();
    known.extend_from_slice(terminal.board());
    let pool = remaining(&known);
    let mut pairs: Vec<[Card; 2]> = Vec::with_capacity(pool.len() * (pool.len() - 1) / 2);
    for i in 0..pool.len() {
        for j in (i + 1)..pool.len() {
            pairs.push([pool[i], pool[j]]);
        }
    }
    if cfg.range_samples > 0 && pairs.len() > cfg.range_samples {
        let picks = rand::seq::index::sample(rng, pairs.len(), cfg.range_samples);
        pairs = picks.iter().map(|i| pairs[i]).collect();
    }

    // One observation per hero decision, built from the true state; the
    // hypothesis loop only swaps the hole cards in.
    let state_at: std::collections::HashMap<usize, &HandState> = replayed
        .decisions
        .iter()
        .map(|(at, s)| (*at, s))
        .collect();
    let mut hero_decisions = Vec::new();
    for d in record.decisions.iter().filter(|d| d.seat == hero) {
        let state = state_at
            .get(&d.at_token)
            .copied()
            .ok_or_else(|| bad(format!("no decision state at token {}", d.at_token)))?;
        let obs = Observation::for_seat(state, hero).map_err(bad)?;
        hero_decisions.push((d.action, obs));
    }

    // Showdown comparison against the fixed opponent holding.
    let showdown = match terminal.outcome() {
        Some(Outcome::Showdown) => {
            let board: [Card; 5] = record.deal.board;
            let o = record.deal.hole[opp];
            let opp_rank = evaluate_seven(&[
                o[0], o[1], board[0], board[1], board[2], board[3], board[4],
            ])
            .map_err(bad)?;
            Some((board, opp_rank, terminal.contributed(hero) as f64))
        }
        _ => None,
    };

    let mut out = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let mut weight = 1.0;
        for (action, obs) in &hero_decisions {
            let mut alt = obs.clone();
            alt.hole = pair;
            if let Some(dist) = range_source.strategy(&alt) {
                weight *= dist.probability_of(*action);
                if weight <= 0.0 {
                    break;
                }
            }
            // A non-queryable source contributes no factor: the range
            // degrades toward the unconditioned uniform one.
        }
        if weight <= 0.0 {
            continue;
        }
        let utility = match &showdown {
            // Fold awards do not depend on the folder's cards.
            None => raw,
            Some((board, opp_rank, contributed)) => {
                let rank = evaluate_seven(&[
                    pair[0], pair[1], board[0], board[1], board[2], board[3], board[4],
                ])
                .map_err(bad)?;
                match rank.cmp(opp_rank) {
                    std::cmp::Ordering::Greater => *contributed,
                    std::cmp::Ordering::Less => -contributed,
                    std::cmp::Ordering::Equal => 0.0,
                }
            }
        };
        out.push((weight, utility));
    }
    Ok(out)
}

/// Card/board luck of one hand, in chips (positive = the agent ran hot).
pub fn chance_correction(
    record: &HandRecord,
    oracle: &dyn ValueOracle<EvalPoint>,
    cfg: &HunlEvalConfig,
) -> Result<f64, EvalError> {
    Ok(hand_trace(record, None, cfg)?.chance_correction(oracle))
}

/// House mixed-action luck of one hand, in chips.
pub fn action_correction(
    record: &HandRecord,
    oracle: &dyn ValueOracle<EvalPoint>,
    cfg: &HunlEvalConfig,
) -> Result<f64, EvalError> {
    Ok(hand_trace(record, None, cfg)?.action_correction(oracle))
}

/// Terminal value with the evaluated seat's holding marginalized over its
/// action-consistent range, in chips.
pub fn all_hands_chips(
    record: &HandRecord,
    range_source: &dyn Agent,
    cfg: &HunlEvalConfig,
) -> Result<f64, EvalError> {
    Ok(hand_trace(record, Some(range_source), cfg)?.all_hands())
}

/// Evaluate a full match of records into the eight-metric report.
///
/// Per-hand work runs in parallel; the reduction is sequential in record
/// order, so the report is bit-identical however many threads ran.
pub fn evaluate_records(
    records: &[HandRecord],
    range_source: Option<&(dyn Agent + Sync)>,
    cfg: &HunlEvalConfig,
) -> Result<AivatReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let big_blind = records[0].config.big_blind() as f64;
    let oracle = EquityOracle {
        samples: cfg.equity_samples,
    };
    let values: Vec<HandValues> = records
        .par_iter()
        .map(|r| {
            let trace = hand_trace(r, range_source.map(|a| a as &dyn Agent), cfg)?;
            Ok(trace.values(&oracle))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let range_proxy = records.iter().any(|r| r.range_proxy);
    AivatReport::from_values(&values, big_blind, range_proxy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{baseline_by_name, play_hand, AlwaysFold, CheckCall};
    use crate::engine::{Deal, GameConfig};

    fn card(s: &str) -> Card {
        s.parse().unwrap()
    }

    fn play_records(hero: &str, house: &str, hands: u64, seed: u64) -> Vec<HandRecord> {
        (0..hands)
            .map(|h| {
                let mut a = baseline_by_name(hero).unwrap();
                let mut b = baseline_by_name(house).unwrap();
                let mut agents: [&mut dyn Agent; 2] = [a.as_mut(), b.as_mut()];
                let sb = (h % 2) as usize;
                let played = play_hand(GameConfig::default(), seed, h, sb, &mut agents).unwrap();
                HandRecord::from_played(&played, seed, sb, 0, false)
            })
            .collect()
    }

    /// A constructed checkdown where the evaluated seat spikes the best river
    /// card: trip deuces against overcards-turned-nothing.
    fn lucky_river_record() -> HandRecord {
        let deal = Deal {
            hole: [
                [card("2h"), card("2d")],
                [card("As"), card("Ac")],
            ],
            board: [card("Kc"), card("Qd"), card("7s"), card("8d"), card("2c")],
        };
        let history: Vec<String> = ["c", "k", "_", "k", "k", "_", "k", "k", "_", "k", "k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        HandRecord {
            version: 1,
            hand_id: 7,
            seed: 0,
            sb_seat: 0,
            agent_seat: 0,
            config: GameConfig::default(),
            deal,
            history,
            winnings: [100, -100],
            decisions: Vec::new(),
            range_proxy: false,
        }
    }

    #[test]
    fn constant_oracle_zeroes_both_corrections() {
        let cfg = HunlEvalConfig::default();
        for record in play_records("uniform-random", "uniform-random", 10, 3) {
            let oracle = |_: &EvalPoint| 42.0;
            assert_eq!(chance_correction(&record, &oracle, &cfg).unwrap(), 0.0);
            assert_eq!(action_correction(&record, &oracle, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn deterministic_house_policy_has_zero_action_luck() {
        let cfg = HunlEvalConfig::default();
        let oracle = EquityOracle { samples: 32 };
        // check-call and always-fold are point-mass policies at every node.
        for record in play_records("check-call", "always-fold", 8, 5) {
            assert_eq!(action_correction(&record, &oracle, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn rivering_the_best_card_counts_as_positive_luck() {
        let record = lucky_river_record();
        let cfg = HunlEvalConfig::default();
        let oracle = EquityOracle { samples: 256 };
        let trace = hand_trace(&record, None, &cfg).unwrap();
        // Hole event + flop + turn + river.
        assert_eq!(trace.chance_events.len(), 4);
        assert!(trace.house_events.is_empty());
        let river = trace.chance_events.last().unwrap();
        let river_luck = river.luck(&oracle);
        assert!(
            river_luck > 0.0,
            "spiking trips on the river must register as good luck, got {river_luck}"
        );
    }

    #[test]
    fn all_hands_discount_a_lucky_holding() {
        let record = lucky_river_record();
        let cfg = HunlEvalConfig {
            range_samples: 0,
            ..HunlEvalConfig::default()
        };
        let hero = CheckCall;
        let all_hands = all_hands_chips(&record, &hero, &cfg).unwrap();
        // The realized holding won; the average holding on this runout does
        // far worse against the fixed aces.
        assert!(all_hands < record.winnings[0] as f64);
        assert!(all_hands.abs() <= 100.0);
    }

    #[test]
    fn instant_fold_yields_raw_equals_all_hands_exactly() {
        let mut hero = AlwaysFold;
        let mut house = CheckCall;
        let mut agents: [&mut dyn Agent; 2] = [&mut hero, &mut house];
        let played = play_hand(GameConfig::default(), 11, 0, 0, &mut agents).unwrap();
        let record = HandRecord::from_played(&played, 11, 0, 0, false);
        assert_eq!(record.winnings[0], -50);

        let cfg = HunlEvalConfig {
            range_samples: 0,
            ..HunlEvalConfig::default()
        };
        let trace = hand_trace(&record, Some(&AlwaysFold as &dyn Agent), &cfg).unwrap();
        // Folding loses the blind no matter which cards the seat held.
        assert_eq!(trace.all_hands(), -50.0);

        // With a constant oracle the whole report collapses to the raw line.
        let constant = |_: &EvalPoint| 0.0;
        let report =
            super::super::evaluate_traces(&[trace], &constant, 100.0, false).unwrap();
        assert_eq!(report.aivat_score, -50.0);
        assert_eq!(report.raw_winrate, -50.0);
        assert_eq!(report.chips, -50);
    }

    #[test]
    fn match_report_holds_the_identity_and_is_deterministic() {
        let records = play_records("check-call", "uniform-random", 40, 9);
        let cfg = HunlEvalConfig {
            flop_samples: 16,
            equity_samples: 24,
            range_samples: 40,
            bet_samples: 4,
            seed: 1,
        };
        let hero = CheckCall;
        let a = evaluate_records(&records, Some(&hero), &cfg).unwrap();
        let b = evaluate_records(&records, Some(&hero), &cfg).unwrap();
        assert_eq!(a, b, "evaluation must be bit-deterministic");

        let identity = a.all_hands_chips - a.chance_correction - a.action_correction;
        assert!((a.aivat_score - identity).abs() < 1e-9);
        assert_eq!(a.hands_played, 40);
        let chips: i64 = records.iter().map(|r| r.winnings[0]).sum();
        assert_eq!(a.chips, chips);
        assert!(
            (a.raw_winrate - chips as f64 / 40.0 / 100.0 * 100.0).abs() < 1e-9,
            "raw winrate must be chips / hands / big blind * 100"
        );
    }

    #[test]
    fn tampered_records_are_rejected() {
        let mut records = play_records("check-call", "check-call", 1, 2);
        records[0].winnings[0] += 1;
        let err = evaluate_records(&records, Some(&CheckCall), &HunlEvalConfig::default());
        assert!(matches!(err, Err(EvalError::BadRecord(_))));
    }

    #[test]
    fn uniform_random_house_produces_action_events() {
        let records = play_records("check-call", "uniform-random", 12, 13);
        let cfg = HunlEvalConfig {
            flop_samples: 8,
            equity_samples: 16,
            range_samples: 20,
            bet_samples: 4,
            seed: 2,
        };
        let with_events = records.iter().any(|r| {
            let trace = hand_trace(r, None, &cfg).unwrap();
            !trace.house_events.is_empty()
        });
        assert!(with_events, "a mixing opponent must generate action events");
    }
}
