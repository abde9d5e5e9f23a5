//! Variance-reduced, unbiased match evaluation.
//!
//! Raw poker winnings are dominated by luck: which cards were dealt, which
//! board fell, and which branch of the house's mixed strategy happened to be
//! sampled. For every such event whose distribution is known at the moment it
//! resolves, we can measure a *luck term* — the value of the realized branch
//! minus the probability-weighted value over all branches, as judged by a
//! [`ValueOracle`]. Each luck term has expectation zero no matter how wrong
//! the oracle is, because the realized branch is drawn from exactly the
//! distribution being averaged over; subtracting the terms therefore leaves
//! the expected score intact while cancelling most of its variance whenever
//! the oracle is any good. This module tests that claim by exhaustive
//! enumeration on the small games rather than assuming it.
//!
//! Independently, the evaluated seat's own cards can be marginalized out:
//! holding the opponent's cards, the board, and the action sequence fixed,
//! the terminal value is averaged over every holding the seat could have had,
//! weighted by the posterior probability it would have played the same
//! actions with it (the "all hands" value). The reported score is
//!
//! `aivat = all_hands − chance_correction − action_correction`
//!
//! with all three components exposed so the decomposition stays auditable.
//! Positive corrections mean the agent ran hot; subtracting them removes the
//! heat from the score.

pub mod hunl;
pub mod small;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no hands to evaluate")]
    Empty,
    #[error("hand record is not usable: {0}")]
    BadRecord(String),
}

/// Estimates the expected final chips of the evaluated seat from a state,
/// under some reference notion of continued play.
///
/// The evaluator's *mean* never depends on the oracle — that is verified by
/// enumeration, not assumed — so oracle quality only determines how much
/// variance the corrections remove. Implementations must be deterministic
/// given the state (seeded sampling counts as deterministic).
pub trait ValueOracle<S> {
    fn value(&self, state: &S) -> f64;
}

impl<S, F: Fn(&S) -> f64> ValueOracle<S> for F {
    fn value(&self, state: &S) -> f64 {
        self(state)
    }
}

/// One stochastic event whose distribution was known when it resolved: a card
/// deal or a draw from the house's mixed strategy.
///
/// `children` holds the weighted alternatives — enumerated exactly, or
/// sampled from the same law independently of the realized outcome, which
/// preserves the zero-mean property — and `realized` the branch that actually
/// happened.
#[derive(Debug, Clone)]
pub struct TraceEvent<S> {
    pub children: Vec<(S, f64)>,
    pub realized: S,
}

impl<S> TraceEvent<S> {
    /// How much better the realized branch was than the average branch:
    /// `v(realized) − E[v(child)]`. Positive means the draw favored the
    /// evaluated seat. Computed as a weighted mean of differences so that a
    /// constant oracle yields exactly zero, not rounding dust.
    pub fn luck(&self, oracle: &dyn ValueOracle<S>) -> f64 {
        let total: f64 = self.children.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let realized = oracle.value(&self.realized);
        self.children
            .iter()
            .map(|(s, w)| w * (realized - oracle.value(s)))
            .sum::<f64>()
            / total
    }
}

/// Everything the evaluator needs from one finished hand.
pub struct HandTrace<S> {
    /// Card events charged to the evaluated seat's luck (its own deal and the
    /// board), in hand order.
    pub chance_events: Vec<TraceEvent<S>>,
    /// House mixed-strategy draws, in hand order.
    pub house_events: Vec<TraceEvent<S>>,
    /// Realized chips won by the evaluated seat.
    pub raw: f64,
    /// `(posterior weight, terminal value)` per holding the evaluated seat
    /// could have had. Empty means no range was available and the all-hands
    /// value degrades to the raw outcome.
    pub range_hypotheses: Vec<(f64, f64)>,
}

impl<S> HandTrace<S> {
    /// Terminal value with the evaluated seat's holding marginalized over its
    /// action-consistent range.
    pub fn all_hands(&self) -> f64 {
        let total: f64 = self.range_hypotheses.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return self.raw;
        }
        self.range_hypotheses
            .iter()
            .map(|(w, v)| w * v)
            .sum::<f64>()
            / total
    }

    /// Total card luck across the hand's chance events, in chips.
    pub fn chance_correction(&self, oracle: &dyn ValueOracle<S>) -> f64 {
        self.chance_events.iter().map(|e| e.luck(oracle)).sum()
    }

    /// Total house mixed-action luck, in chips.
    pub fn action_correction(&self, oracle: &dyn ValueOracle<S>) -> f64 {
        self.house_events.iter().map(|e| e.luck(oracle)).sum()
    }

    pub fn values(&self, oracle: &dyn ValueOracle<S>) -> HandValues {
        HandValues {
            raw: self.raw,
            all_hands: self.all_hands(),
            chance: self.chance_correction(oracle),
            action: self.action_correction(oracle),
        }
    }
}

/// Per-hand evaluation components, in chips for the evaluated seat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandValues {
    pub raw: f64,
    pub all_hands: f64,
    pub chance: f64,
    pub action: f64,
}

impl HandValues {
    /// The luck-adjusted outcome of this hand.
    pub fn aivat(&self) -> f64 {
        self.all_hands - self.chance - self.action
    }
}

/// The eight match metrics. All rates are big blinds per 100 hands, so a hand
/// that nets one big blind contributes +100 bb/100 across one hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AivatReport {
    pub hands_played: u64,
    /// Luck-adjusted winrate; always equals
    /// `all_hands_chips − chance_correction − action_correction`.
    pub aivat_score: f64,
    /// Unadjusted winrate.
    pub raw_winrate: f64,
    /// Total signed chips won by the evaluated agent.
    pub chips: i64,
    /// Winrate with the agent's holding marginalized over its range.
    pub all_hands_chips: f64,
    /// How well the agent's own cards and the board ran (positive = hot).
    pub chance_correction: f64,
    /// How favorable the house's mixed-strategy draws were for the agent.
    pub action_correction: f64,
    /// Standard error of the mean per-hand adjusted value.
    pub aivat_stddev: f64,
    /// True when the agent exposed no strategy of its own and the house
    /// policy stood in as its range for the all-hands metric.
    pub range_proxy: bool,
}

impl AivatReport {
    /// Reduce per-hand values to the match report.
    ///
    /// Summation is sequential in input order, so a given hand sequence
    /// always reduces to bit-identical metrics no matter how the per-hand
    /// values were computed (serially or in parallel).
    pub fn from_values(
        values: &[HandValues],
        big_blind: f64,
        range_proxy: bool,
    ) -> Result<AivatReport, EvalError> {
        if values.is_empty() {
            return Err(EvalError::Empty);
        }
        let n = values.len() as f64;
        let to_rate = |chips_total: f64| chips_total / n / big_blind * 100.0;

        let mut raw_sum = 0.0;
        let mut all_hands_sum = 0.0;
        let mut chance_sum = 0.0;
        let mut action_sum = 0.0;
        let mut aivat_sum = 0.0;
        for v in values {
            raw_sum += v.raw;
            all_hands_sum += v.all_hands;
            chance_sum += v.chance;
            action_sum += v.action;
            aivat_sum += v.aivat();
        }
        let aivat_mean = aivat_sum / n;
        let stddev = if values.len() < 2 {
            0.0
        } else {
            let ss: f64 = values
                .iter()
                .map(|v| {
                    let d = v.aivat() - aivat_mean;
                    d * d
                })
                .sum();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        };

        Ok(AivatReport {
            hands_played: values.len() as u64,
            aivat_score: to_rate(aivat_sum),
            raw_winrate: to_rate(raw_sum),
            chips: raw_sum.round() as i64,
            all_hands_chips: to_rate(all_hands_sum),
            chance_correction: to_rate(chance_sum),
            action_correction: to_rate(action_sum),
            aivat_stddev: stddev / big_blind * 100.0,
            range_proxy,
        })
    }

    /// 95% confidence interval on the adjusted winrate, bb/100.
    pub fn interval95(&self) -> (f64, f64) {
        (
            self.aivat_score - 1.96 * self.aivat_stddev,
            self.aivat_score + 1.96 * self.aivat_stddev,
        )
    }

    /// Leaderboard rank key: the lower bound of the 95% interval, so an agent
    /// must be both good and well-measured to rank high.
    pub fn rank_key(&self) -> f64 {
        self.interval95().0
    }
}

/// Evaluate already-built traces against one oracle.
pub fn evaluate_traces<S>(
    traces: &[HandTrace<S>],
    oracle: &dyn ValueOracle<S>,
    big_blind: f64,
    range_proxy: bool,
) -> Result<AivatReport, EvalError> {
    let values: Vec<HandValues> = traces.iter().map(|t| t.values(oracle)).collect();
    AivatReport::from_values(&values, big_blind, range_proxy)
}

/// Sample standard error of the mean of `xs`; 0 for fewer than two samples.
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt() / n.sqrt()
}
