//! Card abstraction for the HUNL house opponent.
//!
//! Preflop uses the lossless 169-class grouping. Postflop streets bucket
//! hands by k-means over equity histograms: the distribution of river equity
//! across sampled runouts (a point equity on the river itself). Every equity
//! estimate is Monte Carlo with an RNG seeded from the cards themselves, so
//! training and serving assign identical buckets with no shared state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cards::{hole_class_id, Card};
use crate::engine::{evaluate_seven, shuffled_deck, Street};

/// Histogram resolution for flop/turn equity distributions.
pub const EQUITY_BINS: usize = 8;

/// Stable seed derived from the exact cards in view, so repeated bucket
/// queries for the same situation agree bit-for-bit.
pub fn equity_seed(hole: [Card; 2], board: &[Card], salt: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ salt.wrapping_mul(0x1000_0000_01b3);
    let mut eat = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100_0000_01b3);
    };
    let mut hole_idx = [hole[0].index() as u64, hole[1].index() as u64];
    hole_idx.sort_unstable();
    eat(hole_idx[0]);
    eat(hole_idx[1]);
    for c in board {
        eat(c.index() as u64);
    }
    h
}

fn remaining_deck(used: &[Card]) -> Vec<Card> {
    let mut mask = [false; 52];
    for c in used {
        mask[c.index()] = true;
    }
    (0..52)
        .filter(|i| !mask[*i])
        .map(Card::from_index)
        .collect()
}

fn win_share(hero: [Card; 2], villain: [Card; 2], board: &[Card; 5]) -> f64 {
    let h = evaluate_seven(&[
        hero[0], hero[1], board[0], board[1], board[2], board[3], board[4],
    ])
    .expect("distinct cards");
    let v = evaluate_seven(&[
        villain[0], villain[1], board[0], board[1], board[2], board[3], board[4],
    ])
    .expect("distinct cards");
    match h.cmp(&v) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Less => 0.0,
    }
}

fn draw_distinct(rng: &mut ChaCha8Rng, deck: &[Card], n: usize, out: &mut Vec<Card>) {
    out.clear();
    while out.len() < n {
        let c = deck[rng.random_range(0..deck.len())];
        if !out.contains(&c) {
            out.push(c);
        }
    }
}

/// Monte Carlo equity of `hole` on `board` against a uniform random hand,
/// completing the board per sample. Deterministic in `(cards, salt)`.
pub fn mc_equity(hole: [Card; 2], board: &[Card], samples: usize, salt: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(equity_seed(hole, board, salt));
    let mut used = vec![hole[0], hole[1]];
    used.extend_from_slice(board);
    let deck = remaining_deck(&used);
    let need = 5 - board.len();
    let mut drawn = Vec::with_capacity(need + 2);
    let mut total = 0.0;
    for _ in 0..samples {
        draw_distinct(&mut rng, &deck, need + 2, &mut drawn);
        let mut full = [hole[0]; 5];
        full[..board.len()].copy_from_slice(board);
        for (i, c) in drawn[..need].iter().enumerate() {
            full[board.len() + i] = *c;
        }
        let villain = [drawn[need], drawn[need + 1]];
        total += win_share(hole, villain, &full);
    }
    total / samples as f64
}

/// Equity histogram: for flop/turn, the distribution over sampled runouts of
/// the hand's river equity (each runout's equity estimated against sampled
/// opponents); on the river, the single-point equity as a 1-vector.
pub fn equity_histogram(
    street: Street,
    hole: [Card; 2],
    board: &[Card],
    runouts: usize,
    opp_samples: usize,
    salt: u64,
) -> Vec<f64> {
    debug_assert_eq!(board.len(), street.board_len());
    let mut rng = ChaCha8Rng::seed_from_u64(equity_seed(hole, board, salt ^ 0xa5a5));
    match street {
        Street::Preflop => panic!("preflop uses the 169-class table, not histograms"),
        Street::River => {
            let board5: [Card; 5] = board.try_into().unwrap();
            let mut used = vec![hole[0], hole[1]];
            used.extend_from_slice(board);
            let deck = remaining_deck(&used);
            let mut drawn = Vec::with_capacity(2);
            let mut total = 0.0;
            let n = runouts * opp_samples;
            for _ in 0..n {
                draw_distinct(&mut rng, &deck, 2, &mut drawn);
                total += win_share(hole, [drawn[0], drawn[1]], &board5);
            }
            vec![total / n as f64]
        }
        _ => {
            let mut used = vec![hole[0], hole[1]];
            used.extend_from_slice(board);
            let deck = remaining_deck(&used);
            let need = 5 - board.len();
            let mut hist = vec![0.0; EQUITY_BINS];
            let mut drawn = Vec::with_capacity(need);
            let mut opp = Vec::with_capacity(2);
            for _ in 0..runouts {
                draw_distinct(&mut rng, &deck, need, &mut drawn);
                let mut full = [hole[0]; 5];
                full[..board.len()].copy_from_slice(board);
                for (i, c) in drawn.iter().enumerate() {
                    full[board.len() + i] = *c;
                }
                let mut eq = 0.0;
                let mut taken = 0;
                while taken < opp_samples {
                    draw_distinct(&mut rng, &deck, 2, &mut opp);
                    if opp.iter().any(|c| drawn.contains(c)) {
                        continue;
                    }
                    eq += win_share(hole, [opp[0], opp[1]], &full);
                    taken += 1;
                }
                eq /= opp_samples as f64;
                let bin = ((eq * EQUITY_BINS as f64) as usize).min(EQUITY_BINS - 1);
                hist[bin] += 1.0 / runouts as f64;
            }
            hist
        }
    }
}

/// Per-class preflop equity vs a uniform random hand, cached process-wide.
pub fn preflop_class_equity(class: usize) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..169usize)
            .into_par_iter()
            .map(|id| {
                let rep = crate::cards::class_representative(id);
                mc_equity(rep, &[], 2_000, 0x9ec1)
            })
            .collect()
    })[class]
}

/// Seeded k-means with deterministic quantile initialization.
fn kmeans(points: &[Vec<f64>], k: usize, iterations: usize) -> Vec<Vec<f64>> {
    assert!(!points.is_empty());
    let dim = points[0].len();
    // Initialize centroids at quantiles of the first-moment ordering so runs
    // are reproducible without RNG.
    let mut order: Vec<usize> = (0..points.len()).collect();
    let moment = |p: &Vec<f64>| -> f64 {
        p.iter()
            .enumerate()
            .map(|(i, v)| (i as f64 + 0.5) * v)
            .sum()
    };
    order.sort_by(|a, b| {
        moment(&points[*a])
            .partial_cmp(&moment(&points[*b]))
            .unwrap()
            .then(a.cmp(b))
    });
    let mut centroids: Vec<Vec<f64>> = (0..k)
        .map(|i| points[order[(i * points.len() + points.len() / 2) / k]].clone())
        .collect();

    let mut assignment = vec![0usize; points.len()];
    for _ in 0..iterations {
        for (pi, p) in points.iter().enumerate() {
            assignment[pi] = nearest_centroid(p, &centroids);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (pi, p) in points.iter().enumerate() {
            let a = assignment[pi];
            counts[a] += 1;
            for d in 0..dim {
                sums[a][d] += p[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..dim {
                    centroids[c][d] = sums[c][d] / counts[c] as f64;
                }
            }
        }
    }
    centroids
}

pub fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d: f64 = point
            .iter()
            .zip(c.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Abstraction parameters; defaults stay desk-scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionConfig {
    /// Bet sizes as pot fractions, all-in always added.
    pub bet_fractions: Vec<f64>,
    /// Max bets/raises per street in the abstract tree.
    pub raise_cap: u32,
    /// Postflop bucket count per street.
    pub buckets: usize,
    /// Runouts per histogram (flop/turn).
    pub runouts: usize,
    /// Opponent samples per runout (and per river-equity estimate).
    pub opp_samples: usize,
    /// Sample points per street for centroid fitting.
    pub fit_points: usize,
}

impl Default for AbstractionConfig {
    fn default() -> Self {
        AbstractionConfig {
            bet_fractions: vec![0.5, 1.0],
            raise_cap: 3,
            buckets: 8,
            runouts: 24,
            opp_samples: 8,
            fit_points: 1_200,
        }
    }
}

/// Fitted card abstraction: centroids per postflop street.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardAbstraction {
    pub config: AbstractionConfig,
    /// Centroids indexed by street − 1 (flop, turn, river).
    pub centroids: [Vec<Vec<f64>>; 3],
}

fn street_index(street: Street) -> Option<usize> {
    match street {
        Street::Preflop => None,
        Street::Flop => Some(0),
        Street::Turn => Some(1),
        Street::River => Some(2),
    }
}

impl CardAbstraction {
    /// Fit centroids from deals drawn with the deterministic match shuffler.
    pub fn fit(config: AbstractionConfig, seed: u64) -> CardAbstraction {
        let fit_street = |street: Street| -> Vec<Vec<f64>> {
            let points: Vec<Vec<f64>> = (0..config.fit_points as u64)
                .into_par_iter()
                .map(|i| {
                    let deck = shuffled_deck(seed ^ 0xfee1_0000, i);
                    let hole = [deck[0], deck[1]];
                    let board = &deck[4..4 + street.board_len()];
                    equity_histogram(
                        street,
                        hole,
                        board,
                        config.runouts,
                        config.opp_samples,
                        0,
                    )
                })
                .collect();
            kmeans(&points, config.buckets, 25)
        };
        let centroids = [
            fit_street(Street::Flop),
            fit_street(Street::Turn),
            fit_street(Street::River),
        ];
        CardAbstraction { config, centroids }
    }

    /// Bucket of a hand at a street: preflop its 169-class id, postflop the
    /// nearest equity-histogram centroid. Pure function of the cards.
    pub fn bucket(&self, street: Street, hole: [Card; 2], board: &[Card]) -> u16 {
        match street_index(street) {
            None => hole_class_id(hole) as u16,
            Some(si) => {
                let hist = equity_histogram(
                    street,
                    hole,
                    &board[..street.board_len()],
                    self.config.runouts,
                    self.config.opp_samples,
                    0,
                );
                nearest_centroid(&hist, &self.centroids[si]) as u16
            }
        }
    }
}

/// One sampled deal projected into buckets, with the showdown result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// `buckets[player][street]`.
    pub buckets: [[u16; 4]; 2],
    /// Showdown winner: 0, 1, or −1 for a chop.
    pub winner: i8,
}

/// Sample `n` scenarios through the abstraction, in parallel.
pub fn sample_scenarios(abs: &CardAbstraction, seed: u64, n: usize) -> Vec<Scenario> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let deck = shuffled_deck(seed ^ 0x5ce0_0000, i);
            let holes = [[deck[0], deck[1]], [deck[2], deck[3]]];
            let board = [deck[4], deck[5], deck[6], deck[7], deck[8]];
            let mut buckets = [[0u16; 4]; 2];
            for (p, hole) in holes.iter().enumerate() {
                for (si, street) in [Street::Preflop, Street::Flop, Street::Turn, Street::River]
                    .into_iter()
                    .enumerate()
                {
                    buckets[p][si] = abs.bucket(street, *hole, &board);
                }
            }
            let r0 = evaluate_seven(&[
                holes[0][0], holes[0][1], board[0], board[1], board[2], board[3], board[4],
            ])
            .unwrap();
            let r1 = evaluate_seven(&[
                holes[1][0], holes[1][1], board[0], board[1], board[2], board[3], board[4],
            ])
            .unwrap();
            let winner = match r0.cmp(&r1) {
                std::cmp::Ordering::Greater => 0,
                std::cmp::Ordering::Less => 1,
                std::cmp::Ordering::Equal => -1,
            };
            Scenario { buckets, winner }
        })
        .collect()
}

/// Pseudo-harmonic mapping: the probability that a real size `x` maps to the
/// smaller abstract size `a` when bracketed by grid sizes `a < b` (all three
/// as pot fractions): f(a,b,x) = ((b−x)(1+a)) / ((b−a)(1+x)).
pub fn pseudo_harmonic_weight(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a <= x && x <= b && a < b);
    ((b - x) * (1.0 + a)) / ((b - a) * (1.0 + x))
}
