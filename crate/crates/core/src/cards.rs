//! Cards, ranks, suits, and the text encoding shared by every layer.
//!
//! The wire form of a card is rank char + suit char, e.g. `"Ah"` or `"Td"`:
//! ranks are uppercase `2..9, T, J, Q, K, A`, suits lowercase `c, d, h, s`.
//! Boards serialize as concatenated cards with no separator (`"AhKd3c"`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

/// Card suit. Ordering is only used for canonicalization, never for hand strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Suit {
    Clubs,
    Diamonds,
    Hearts,
    Spades,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    pub fn to_char(self) -> char {
        match self {
            Suit::Clubs => 'c',
            Suit::Diamonds => 'd',
            Suit::Hearts => 'h',
            Suit::Spades => 's',
        }
    }

    pub fn from_char(c: char) -> Option<Suit> {
        match c {
            'c' => Some(Suit::Clubs),
            'd' => Some(Suit::Diamonds),
            'h' => Some(Suit::Hearts),
            's' => Some(Suit::Spades),
            _ => None,
        }
    }
}

/// A playing card: rank 2..=14 (14 = ace) plus suit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Card {
    rank: u8,
    suit: Suit,
}

impl Card {
    pub const MIN_RANK: u8 = 2;
    pub const MAX_RANK: u8 = 14;

    pub fn new(rank: u8, suit: Suit) -> Result<Card, EngineError> {
        if !(Card::MIN_RANK..=Card::MAX_RANK).contains(&rank) {
            return Err(EngineError::InvalidCard(format!("rank {rank} out of range")));
        }
        Ok(Card { rank, suit })
    }

    pub fn rank(self) -> u8 {
        self.rank
    }

    pub fn suit(self) -> Suit {
        self.suit
    }

    /// Index in 0..52, stable across runs: `rank_index * 4 + suit_index`.
    pub fn index(self) -> usize {
        (self.rank as usize - 2) * 4 + self.suit as usize
    }

    pub fn from_index(i: usize) -> Card {
        debug_assert!(i < 52);
        Card {
            rank: (i / 4) as u8 + 2,
            suit: Suit::ALL[i % 4],
        }
    }

    pub fn rank_char(self) -> char {
        match self.rank {
            14 => 'A',
            13 => 'K',
            12 => 'Q',
            11 => 'J',
            10 => 'T',
            r => (b'0' + r) as char,
        }
    }

    pub fn rank_from_char(c: char) -> Option<u8> {
        match c {
            'A' => Some(14),
            'K' => Some(13),
            'Q' => Some(12),
            'J' => Some(11),
            'T' => Some(10),
            '2'..='9' => Some(c as u8 - b'0'),
            _ => None,
        }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank_char(), self.suit.to_char())
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Card {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Card, EngineError> {
        let mut chars = s.chars();
        let (r, su) = match (chars.next(), chars.next(), chars.next()) {
            (Some(r), Some(su), None) => (r, su),
            _ => return Err(EngineError::InvalidCard(format!("bad card literal {s:?}"))),
        };
        let rank = Card::rank_from_char(r)
            .ok_or_else(|| EngineError::InvalidCard(format!("bad rank in {s:?}")))?;
        let suit = Suit::from_char(su)
            .ok_or_else(|| EngineError::InvalidCard(format!("bad suit in {s:?}")))?;
        Card::new(rank, suit)
    }
}

impl TryFrom<String> for Card {
    type Error = EngineError;
    fn try_from(s: String) -> Result<Card, EngineError> {
        s.parse()
    }
}

impl From<Card> for String {
    fn from(c: Card) -> String {
        c.to_string()
    }
}

/// All 52 cards in index order.
pub fn full_deck() -> Vec<Card> {
    (0..52).map(Card::from_index).collect()
}

/// Parse a concatenated board string like `"AhKd3c"` into cards.
pub fn parse_board(s: &str) -> Result<Vec<Card>, EngineError> {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() % 2 != 0 {
        return Err(EngineError::InvalidCard(format!("odd-length board {s:?}")));
    }
    chars
        .chunks(2)
        .map(|pair| {
            let lit: String = pair.iter().collect();
            lit.parse()
        })
        .collect()
}

/// Format cards as a concatenated board string.
pub fn board_string(cards: &[Card]) -> String {
    cards.iter().map(|c| c.to_string()).collect()
}

/// Canonical index of a hole-card pair in the standard 13×13 grid, 0..169.
///
/// `id = row * 13 + col` with row 0 / col 0 the ace. Pairs sit on the
/// diagonal, suited combos in the upper-right triangle (row < col), offsuit
/// in the lower-left — the layout every range chart uses.
pub fn hole_class_id(hole: [Card; 2]) -> usize {
    let hi = hole[0].rank().max(hole[1].rank());
    let lo = hole[0].rank().min(hole[1].rank());
    let suited = hole[0].suit() == hole[1].suit();
    let (hi_pos, lo_pos) = ((14 - hi) as usize, (14 - lo) as usize);
    if hi == lo {
        hi_pos * 13 + hi_pos
    } else if suited {
        hi_pos * 13 + lo_pos
    } else {
        lo_pos * 13 + hi_pos
    }
}

/// Grid coordinates `(row, col)` of a class id.
pub fn class_grid_pos(id: usize) -> (usize, usize) {
    (id / 13, id % 13)
}

fn rank_char_of_pos(pos: usize) -> char {
    const CHARS: [char; 13] = [
        'A', 'K', 'Q', 'J', 'T', '9', '8', '7', '6', '5', '4', '3', '2',
    ];
    CHARS[pos]
}

/// Chart label of a class id: `"AA"`, `"AKs"`, `"T9o"`.
pub fn class_label(id: usize) -> String {
    let (row, col) = class_grid_pos(id);
    if row == col {
        format!("{0}{0}", rank_char_of_pos(row))
    } else if row < col {
        format!("{}{}s", rank_char_of_pos(row), rank_char_of_pos(col))
    } else {
        format!("{}{}o", rank_char_of_pos(col), rank_char_of_pos(row))
    }
}

/// One representative combo per class (used to precompute per-class tables).
pub fn class_representative(id: usize) -> [Card; 2] {
    let (row, col) = class_grid_pos(id);
    let (hi_pos, lo_pos, suited) = if row == col {
        (row, col, false)
    } else if row < col {
        (row, col, true)
    } else {
        (col, row, false)
    };
    let hi = 14 - hi_pos as u8;
    let lo = 14 - lo_pos as u8;
    let first = Card::new(hi, Suit::Spades).unwrap();
    let second = Card::new(lo, if suited { Suit::Spades } else { Suit::Hearts }).unwrap();
    [first, second]
}
