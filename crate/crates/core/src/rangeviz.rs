//! 13×13 range matrices at fixed decision nodes, and their renderings.
//!
//! A matrix cell is one starting-hand class (pairs on the diagonal, suited
//! combos upper-right, offsuit lower-left) holding the agent's action
//! frequencies there, averaged over the class's concrete combos. Rendering is
//! a pure function of the matrix: red = bet/raise, green = call/check,
//! blue = fold, painted as a proportional horizontal fill so mixed strategies
//! are visible at a glance.

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, Rgb, RgbImage};
use thiserror::Error;

use crate::agents::{Agent, Observation};
use crate::cards::{class_label, full_deck, hole_class_id, Card};
use crate::engine::{Action, Chips, Deal, GameConfig, HandState, Seat};
use crate::error::EngineError;

/// Frequencies `[raise, call/check, fold]`, each in `[0,1]`, summing to 1.
pub type CellFrequencies = [f64; 3];

/// The fixed decision nodes ranges are extracted at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeNode {
    /// The small blind's first decision of the hand.
    SbOpen,
    /// The big blind facing a small-blind open to `open_to` chips.
    BbDefend { open_to: Chips },
}

impl RangeNode {
    pub fn describe(&self) -> String {
        match self {
            RangeNode::SbOpen => "sb-open".to_string(),
            RangeNode::BbDefend { open_to } => format!("bb-defend-vs-b{open_to}"),
        }
    }
}

/// A 13×13 action-frequency grid; `cells[row * 13 + col]`, ace top-left.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeMatrix {
    /// Node description plus the queried agent, recorded in artifacts.
    pub node: String,
    pub agent: String,
    pub cells: Vec<CellFrequencies>,
}

#[derive(Debug, Error)]
pub enum RangeError {
    #[error("agent cannot state its strategy at {0}")]
    NotQueryable(String),
    #[error("engine error while building the node: {0}")]
    Engine(#[from] EngineError),
}

/// The hand state at a node, with the class-representative hole cards dealt
/// to the acting seat. Filler cards (opponent hole, board) come from the
/// first non-colliding cards of a fixed deck order and are never revealed at
/// the preflop nodes the extractor supports.
fn node_state(config: GameConfig, node: &RangeNode, hole: [Card; 2]) -> Result<HandState, EngineError> {
    let mut filler = full_deck()
        .into_iter()
        .filter(|c| *c != hole[0] && *c != hole[1]);
    let mut take = || filler.next().expect("52-card deck cannot run dry here");
    let opp = [take(), take()];
    let board = [take(), take(), take(), take(), take()];
    let (hero_seat, opp_seat): (Seat, Seat) = match node {
        RangeNode::SbOpen => (0, 1),
        RangeNode::BbDefend { .. } => (1, 0),
    };
    let mut holes = [[hole[0], hole[1]]; 2];
    holes[opp_seat] = opp;
    let deal = Deal { hole: holes, board };
    let state = HandState::from_deal(config, 0, 0, deal);
    debug_assert_eq!(state.to_act(), Some(0));
    let _ = hero_seat;
    match node {
        RangeNode::SbOpen => Ok(state),
        RangeNode::BbDefend { open_to } => state.apply_action(Action::BetTo(*open_to)),
    }
}

/// Query `agent` at `node` for every concrete hole-card combo and average
/// the action frequencies into the 169-cell grid.
pub fn extract_range(
    agent: &dyn Agent,
    config: GameConfig,
    node: &RangeNode,
) -> Result<RangeMatrix, RangeError> {
    let deck = full_deck();
    let mut sums = vec![[0.0f64; 3]; 169];
    let mut counts = vec![0u32; 169];
    for i in 0..deck.len() {
        for j in (i + 1)..deck.len() {
            let hole = [deck[i], deck[j]];
            let state = node_state(config, node, hole)?;
            let seat = state.to_act().expect("node is a decision point");
            let obs = Observation::for_seat(&state, seat)?;
            let dist = agent
                .strategy(&obs)
                .ok_or_else(|| RangeError::NotQueryable(node.describe()))?;
            let f = dist.base_frequencies(); // [fold, call/check, bet]
            let cell = &mut sums[hole_class_id(hole)];
            cell[0] += f[2];
            cell[1] += f[1];
            cell[2] += f[0];
            counts[hole_class_id(hole)] += 1;
        }
    }
    let cells = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| {
            debug_assert!(n > 0);
            [s[0] / n as f64, s[1] / n as f64, s[2] / n as f64]
        })
        .collect();
    Ok(RangeMatrix {
        node: node.describe(),
        agent: agent.name().to_string(),
        cells,
    })
}

/// The bet-to amount the agent opens most often from the small blind,
/// aggregated over every combo — the default size for the defend node.
/// `None` when the agent never opens.
pub fn most_frequent_open(agent: &dyn Agent, config: GameConfig) -> Result<Option<Chips>, RangeError> {
    use crate::agents::StrategyAction;
    let deck = full_deck();
    let mut mass: std::collections::BTreeMap<Chips, f64> = std::collections::BTreeMap::new();
    for i in 0..deck.len() {
        for j in (i + 1)..deck.len() {
            let hole = [deck[i], deck[j]];
            let state = node_state(config, &RangeNode::SbOpen, hole)?;
            let obs = Observation::for_seat(&state, 0)?;
            let dist = agent
                .strategy(&obs)
                .ok_or_else(|| RangeError::NotQueryable("sb-open".to_string()))?;
            for (sa, w) in &dist.entries {
                match sa {
                    StrategyAction::Fixed(Action::BetTo(x)) => *mass.entry(*x).or_default() += w,
                    StrategyAction::BetUniform { min, .. } => {
                        // Attribute the whole spread to its minimum: a single
                        // representative size is all the defend node needs.
                        *mass.entry(*min).or_default() += w;
                    }
                    _ => {}
                }
            }
        }
    }
    // Highest mass wins; the BTreeMap iteration order makes ties go to the
    // smallest amount deterministically.
    let mut best: Option<(Chips, f64)> = None;
    for (amount, m) in mass {
        if best.map(|(_, bm)| m > bm).unwrap_or(m > 0.0) {
            best = Some((amount, m));
        }
    }
    Ok(best.map(|(a, _)| a))
}

/// Pixel colors for the three base actions.
pub const RAISE_COLOR: [u8; 3] = [203, 56, 46];
pub const CALL_COLOR: [u8; 3] = [64, 153, 82];
pub const FOLD_COLOR: [u8; 3] = [52, 94, 196];
const GRID_COLOR: [u8; 3] = [30, 30, 30];

/// Cell interior size in pixels; one-pixel grid lines separate cells.
pub const CELL_PX: u32 = 30;

/// Paint the matrix as a PNG. Deterministic: identical matrices produce
/// identical bytes.
pub fn render_png(matrix: &RangeMatrix) -> Vec<u8> {
    let step = CELL_PX + 1;
    let size = 13 * step + 1;
    let mut img = RgbImage::from_pixel(size, size, Rgb(GRID_COLOR));
    for row in 0..13u32 {
        for col in 0..13u32 {
            let [raise, call, _fold] = matrix.cells[(row * 13 + col) as usize];
            let x0 = col * step + 1;
            let y0 = row * step + 1;
            // Proportional horizontal fill: red, then green, then blue.
            let red_end = (raise * CELL_PX as f64).round() as u32;
            let green_end = ((raise + call) * CELL_PX as f64).round() as u32;
            for dx in 0..CELL_PX {
                let color = if dx < red_end {
                    RAISE_COLOR
                } else if dx < green_end.max(red_end) {
                    CALL_COLOR
                } else {
                    FOLD_COLOR
                };
                for dy in 0..CELL_PX {
                    img.put_pixel(x0 + dx, y0 + dy, Rgb(color));
                }
            }
        }
    }
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(img.as_raw(), size, size, ExtendedColorType::Rgb8)
        .expect("in-memory png encoding cannot fail");
    out
}

/// Text rendering: one 13×13 table of `label letter percent`, where the
/// letter is the dominant action (R/C/F) and the percent its frequency.
pub fn render_text(matrix: &RangeMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {} — {}\n", matrix.agent, matrix.node));
    for row in 0..13 {
        let mut line = String::new();
        for col in 0..13 {
            let id = row * 13 + col;
            let cell = matrix.cells[id];
            let (letter, freq) = ["R", "C", "F"]
                .iter()
                .zip(cell.iter())
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(l, f)| (*l, *f))
                .unwrap();
            line.push_str(&format!("{:>4} {}{:<3}", class_label(id), letter, (freq * 100.0).round() as u32));
            if col < 12 {
                line.push(' ');
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use rand::RngCore;

    use super::*;
    use crate::agents::{ActionDistribution, AllIn, AlwaysFold, CheckCall};

    fn assert_uniform(matrix: &RangeMatrix, which: usize) {
        assert_eq!(matrix.cells.len(), 169);
        for (id, cell) in matrix.cells.iter().enumerate() {
            assert!(
                (cell[which] - 1.0).abs() < 1e-9,
                "cell {} expected pure action {which}, got {cell:?}",
                class_label(id)
            );
            assert!((cell.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_baselines_fill_single_colors() {
        let cfg = GameConfig::default();
        let allin = extract_range(&AllIn, cfg, &RangeNode::SbOpen).unwrap();
        assert_uniform(&allin, 0);
        let fold = extract_range(&AlwaysFold, cfg, &RangeNode::SbOpen).unwrap();
        assert_uniform(&fold, 2);
        let defend = extract_range(&CheckCall, cfg, &RangeNode::BbDefend { open_to: 200 }).unwrap();
        assert_uniform(&defend, 1);
    }

    /// Raises suited combos, folds everything else: pins the grid layout
    /// (suited = upper-right triangle, pairs diagonal, offsuit lower-left).
    struct SuitedRaiser;

    impl Agent for SuitedRaiser {
        fn name(&self) -> &str {
            "suited-raiser"
        }

        fn act(&mut self, obs: &Observation, _rng: &mut dyn RngCore) -> Action {
            if obs.hole[0].suit() == obs.hole[1].suit() {
                Action::BetTo(obs.legal.raise.unwrap().min)
            } else {
                Action::Fold
            }
        }

        fn strategy(&self, obs: &Observation) -> Option<ActionDistribution> {
            Some(ActionDistribution::pure(
                if obs.hole[0].suit() == obs.hole[1].suit() {
                    Action::BetTo(obs.legal.raise.unwrap().min)
                } else {
                    Action::Fold
                },
            ))
        }
    }

    #[test]
    fn grid_layout_separates_suited_pairs_and_offsuit() {
        let matrix = extract_range(&SuitedRaiser, GameConfig::default(), &RangeNode::SbOpen).unwrap();
        for row in 0..13 {
            for col in 0..13 {
                let cell = matrix.cells[row * 13 + col];
                if row < col {
                    assert!((cell[0] - 1.0).abs() < 1e-9, "suited cell must raise");
                } else {
                    // Pairs cannot be suited; offsuit folds.
                    assert!((cell[2] - 1.0).abs() < 1e-9, "cell ({row},{col}) must fold");
                }
            }
        }
    }

    #[test]
    fn mixed_cells_paint_proportional_fill() {
        let mut matrix = RangeMatrix {
            node: "fixture".to_string(),
            agent: "fixture".to_string(),
            cells: vec![[0.0, 0.0, 1.0]; 169],
        };
        matrix.cells[0] = [0.5, 0.0, 0.5];
        let png = render_png(&matrix);
        let img = image::load_from_memory(&png).unwrap().to_rgb8();
        // Cell (0,0) interior spans x,y in [1, 31): left half red, right blue.
        assert_eq!(img.get_pixel(2, 2).0, RAISE_COLOR);
        assert_eq!(img.get_pixel(29, 2).0, FOLD_COLOR);
        // A pure-fold neighbor is blue throughout.
        assert_eq!(img.get_pixel(2 + (CELL_PX + 1), 2).0, FOLD_COLOR);
    }

    #[test]
    fn renders_are_byte_deterministic() {
        let matrix = extract_range(&AllIn, GameConfig::default(), &RangeNode::SbOpen).unwrap();
        assert_eq!(render_png(&matrix), render_png(&matrix));
        assert_eq!(render_text(&matrix), render_text(&matrix));
        let text = render_text(&matrix);
        assert!(text.contains("AA R100"));
        assert_eq!(text.lines().count(), 14); // header + 13 rows
    }

    #[test]
    fn most_frequent_open_picks_the_modal_size() {
        // AllIn opens to 20000 with every combo.
        let size = most_frequent_open(&AllIn, GameConfig::default()).unwrap();
        assert_eq!(size, Some(20_000));
        // AlwaysFold never opens.
        let none = most_frequent_open(&AlwaysFold, GameConfig::default()).unwrap();
        assert_eq!(none, None);
    }
}
