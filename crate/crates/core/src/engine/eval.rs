//! Seven-card hand evaluation.
//!
//! `evaluate_seven` classifies the best five-card hand available from seven
//! cards directly from rank/suit multisets, without enumerating the 21
//! five-card subsets. Tests cross-check it against a brute-force subset
//! enumerator.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cards::Card;
use crate::error::EngineError;

/// Hand category in increasing strength order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum HandCategory {
    HighCard,
    Pair,
    TwoPair,
    Trips,
    Straight,
    Flush,
    FullHouse,
    Quads,
    StraightFlush,
}

/// Total-ordered strength of a five-card hand.
///
/// `tiebreak` is a category-specific rank vector, most significant first,
/// zero-padded to fixed width so lexicographic comparison is correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HandRank {
    pub category: HandCategory,
    pub tiebreak: [u8; 5],
}

impl PartialOrd for HandRank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HandRank {
    fn cmp(&self, other: &Self) -> Ordering {
        self.category
            .cmp(&other.category)
            .then_with(|| self.tiebreak.cmp(&other.tiebreak))
    }
}

impl fmt::Display for HandRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.category, self.tiebreak)
    }
}

fn rank(category: HandCategory, parts: &[u8]) -> HandRank {
    let mut tiebreak = [0u8; 5];
    tiebreak[..parts.len()].copy_from_slice(parts);
    HandRank { category, tiebreak }
}

/// Highest straight top rank in a set of distinct ranks, if any.
/// The wheel (A-2-3-4-5) counts with top rank 5.
fn straight_top(rank_mask: u16) -> Option<u8> {
    // Ace also plays low.
    let mask = rank_mask | if rank_mask & (1 << 14) != 0 { 1 << 1 } else { 0 };
    for top in (5..=14u8).rev() {
        let window = 0b11111u16 << (top - 4);
        if mask & window == window {
            return Some(top);
        }
    }
    None
}

/// Evaluate the best five-card hand from exactly seven distinct cards.
pub fn evaluate_seven(cards: &[Card; 7]) -> Result<HandRank, EngineError> {
    let mut seen = 0u64;
    for c in cards {
        let bit = 1u64 << c.index();
        if seen & bit != 0 {
            return Err(EngineError::DuplicateCard(c.to_string()));
        }
        seen |= bit;
    }

    let mut rank_counts = [0u8; 15];
    let mut suit_counts = [0u8; 4];
    let mut rank_mask = 0u16;
    for c in cards {
        rank_counts[c.rank() as usize] += 1;
        suit_counts[c.suit() as usize] += 1;
        rank_mask |= 1 << c.rank();
    }

    // Flush and straight flush first: they dominate everything they coexist with
    // except quads/full house, which cannot coexist with a 7-card flush.
    let flush_suit = (0..4).find(|&s| suit_counts[s] >= 5);
    if let Some(s) = flush_suit {
        let mut suited_mask = 0u16;
        let mut suited_ranks: Vec<u8> = Vec::with_capacity(7);
        for c in cards {
            if c.suit() as usize == s {
                suited_mask |= 1 << c.rank();
                suited_ranks.push(c.rank());
            }
        }
        if let Some(top) = straight_top(suited_mask) {
            return Ok(rank(HandCategory::StraightFlush, &[top]));
        }
        suited_ranks.sort_unstable_by(|a, b| b.cmp(a));
        return Ok(rank(HandCategory::Flush, &suited_ranks[..5]));
    }

    let mut quads: Option<u8> = None;
    let mut trips: Vec<u8> = Vec::new();
    let mut pairs: Vec<u8> = Vec::new();
    let mut singles: Vec<u8> = Vec::new();
    for r in (2..=14u8).rev() {
        match rank_counts[r as usize] {
            4 => quads = Some(r),
            3 => trips.push(r),
            2 => pairs.push(r),
            1 => singles.push(r),
            _ => {}
        }
    }

    if let Some(q) = quads {
        let kicker = trips
            .iter()
            .chain(pairs.iter())
            .chain(singles.iter())
            .copied()
            .max()
            .unwrap();
        return Ok(rank(HandCategory::Quads, &[q, kicker]));
    }

    if !trips.is_empty() && (trips.len() >= 2 || !pairs.is_empty()) {
        let t = trips[0];
        let p = trips
            .iter()
            .skip(1)
            .chain(pairs.iter())
            .copied()
            .max()
            .unwrap();
        return Ok(rank(HandCategory::FullHouse, &[t, p]));
    }

    if let Some(top) = straight_top(rank_mask) {
        return Ok(rank(HandCategory::Straight, &[top]));
    }

    if let Some(&t) = trips.first() {
        // singles hold all other ranks here (no pairs, else full house above)
        return Ok(rank(HandCategory::Trips, &[t, singles[0], singles[1]]));
    }

    if pairs.len() >= 2 {
        let kicker = pairs
            .iter()
            .skip(2)
            .chain(singles.iter())
            .copied()
            .max()
            .unwrap();
        return Ok(rank(HandCategory::TwoPair, &[pairs[0], pairs[1], kicker]));
    }

    if pairs.len() == 1 {
        return Ok(rank(
            HandCategory::Pair,
            &[pairs[0], singles[0], singles[1], singles[2]],
        ));
    }

    Ok(rank(HandCategory::HighCard, &singles[..5]))
}
