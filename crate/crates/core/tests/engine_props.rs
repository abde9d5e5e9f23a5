//! Property tests: randomized playouts preserve the engine's invariants and
//! every produced history replays to the identical terminal state.

use proptest::prelude::*;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hunl_core::engine::{
    codec, deal_hand, replay_hand, Action, GameConfig, HandState, HistoryToken, Outcome,
};

fn random_legal_action(st: &HandState, rng: &mut ChaCha8Rng) -> Action {
    let legal = st.legal_actions().unwrap();
    let mut options = Vec::new();
    if legal.can_fold {
        options.push(Action::Fold);
    }
    if legal.can_check {
        options.push(Action::Check);
    }
    if legal.can_call {
        options.push(Action::Call);
    }
    if let Some(r) = legal.raise {
        options.push(Action::BetTo(r.min));
        options.push(Action::BetTo(r.max));
        if r.max > r.min {
            options.push(Action::BetTo(rng.random_range(r.min..=r.max)));
        }
    }
    options[(rng.next_u64() % options.len() as u64) as usize]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn playouts_conserve_chips_and_replay_exactly(seed in any::<u64>(), hand in 0u64..64) {
        let cfg = GameConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let sb_seat = (hand % 2) as usize;
        let mut st = deal_hand(cfg, seed, hand, sb_seat);
        let mut steps = 0;
        while !st.is_terminal() {
            let a = random_legal_action(&st, &mut rng);
            st = st.apply_action(a).unwrap();
            prop_assert_eq!(
                st.stacks()[0] + st.stacks()[1] + st.total_pot(),
                2 * cfg.starting_stack()
            );
            steps += 1;
            prop_assert!(steps < 2_000, "playout failed to terminate");
        }

        let w = st.winnings().unwrap();
        prop_assert_eq!(w[0] + w[1], 0);
        match st.outcome().unwrap() {
            Outcome::Fold { folder } => {
                prop_assert_eq!(w[folder], -(st.contributed(folder) as i64));
            }
            Outcome::Showdown => {
                prop_assert_eq!(st.board().len(), 5);
            }
        }

        // Histories never end with a separator and replay bit-exactly.
        prop_assert!(st.history().last() != Some(&HistoryToken::StreetEnd)
            || st.outcome() == Some(Outcome::Showdown) && st.stacks() == [0, 0]);
        let wire = codec::encode_history(st.history());
        let decoded = codec::decode_history(&wire).unwrap();
        let replayed = replay_hand(cfg, st.hand_id(), sb_seat, *st.deal(), &decoded).unwrap();
        prop_assert_eq!(replayed, st);
    }
}
