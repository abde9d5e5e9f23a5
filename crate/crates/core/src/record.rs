//! Durable per-hand records: everything needed to re-derive, audit, and
//! evaluate a finished hand. Serialized as one JSON object per line in a
//! match's `hands.jsonl`.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{DecisionRecord, PlayedHand};
use crate::engine::{codec, replay_hand, Deal, GameConfig, HandState, Seat};
use crate::error::EngineError;

/// Current schema version written by this build.
pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandRecord {
    pub version: u32,
    pub hand_id: u64,
    /// Match-level seed; with `hand_id` it reproduces the deal.
    pub seed: u64,
    pub sb_seat: Seat,
    /// Seat occupied by the evaluated (external) agent.
    pub agent_seat: Seat,
    pub config: GameConfig,
    pub deal: Deal,
    /// Encoded action history tokens, e.g. `["b200", "c", "_", "k"]`.
    pub history: Vec<String>,
    pub winnings: [i64; 2],
    /// Every decision with the mixed strategy it was drawn from, when the
    /// acting agent could state one.
    pub decisions: Vec<DecisionRecord>,
    /// True when all-hands evaluation must fall back to the opponent's
    /// strategy as a range proxy (external agents expose no range).
    pub range_proxy: bool,
}

impl HandRecord {
    pub fn from_played(
        played: &PlayedHand,
        seed: u64,
        sb_seat: Seat,
        agent_seat: Seat,
        range_proxy: bool,
    ) -> HandRecord {
        let state = &played.state;
        HandRecord {
            version: RECORD_VERSION,
            hand_id: state.hand_id(),
            seed,
            sb_seat,
            agent_seat,
            config: *state.config(),
            deal: *state.deal(),
            history: codec::encode_history(state.history()),
            winnings: state.winnings().expect("record requires a finished hand"),
            decisions: played.decisions.clone(),
            range_proxy,
        }
    }

    /// Rebuild the terminal state, verifying the record is self-consistent.
    pub fn replay(&self) -> Result<HandState, EngineError> {
        let tokens = codec::decode_history(&self.history)?;
        let state = replay_hand(self.config, self.hand_id, self.sb_seat, self.deal, &tokens)?;
        match state.winnings() {
            Some(w) if w == self.winnings => Ok(state),
            Some(w) => Err(EngineError::ReplayMismatch(format!(
                "recorded winnings {:?} but replay produced {w:?}",
                self.winnings
            ))),
            None => Err(EngineError::ReplayMismatch(
                "recorded hand does not reach a terminal state".to_string(),
            )),
        }
    }
}

/// Append records to a JSONL file (one line each, flushed).
pub fn append_records(path: &Path, records: &[HandRecord]) -> std::io::Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    for r in records {
        serde_json::to_writer(&mut file, r).map_err(std::io::Error::other)?;
        file.write_all(b"\n")?;
    }
    file.flush()
}

/// Load every record from a JSONL file, reporting the first malformed line.
pub fn load_records(path: &Path) -> std::io::Result<Vec<HandRecord>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: HandRecord = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {}: {e}", i + 1),
            )
        })?;
        out.push(rec);
    }
    Ok(out)
}
