//! Text codec for action histories.
//!
//! Tokens: `f` fold, `k` check, `c` call, `bX` bet/raise to `X` chips total
//! for the current street, `_` betting-round separator. Bet amounts are
//! canonical base-10: no sign, no leading zeros. Histories appear either as
//! token lists (as in API messages) or as one concatenated string; tokens are
//! self-delimiting so the string form parses unambiguously.

use crate::engine::{Action, HistoryToken};
use crate::error::EngineError;

/// Render a history as a token list, e.g. `["b200", "c", "_", "k"]`.
pub fn encode_history(tokens: &[HistoryToken]) -> Vec<String> {
    tokens.iter().map(|t| t.to_string()).collect()
}

/// Render a history as one compact string, e.g. `"b200c_kk"`.
pub fn history_string(tokens: &[HistoryToken]) -> String {
    let mut out = String::new();
    for t in tokens {
        use std::fmt::Write;
        write!(out, "{t}").unwrap();
    }
    out
}

fn parse_amount(digits: &str, position: usize, token: &str) -> Result<u32, EngineError> {
    if digits.is_empty() {
        return Err(EngineError::Parse {
            position,
            message: format!("bet token '{token}' has no amount"),
        });
    }
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(EngineError::Parse {
            position,
            message: format!("bet amount in '{token}' contains non-digits"),
        });
    }
    if digits.starts_with('0') {
        return Err(EngineError::Parse {
            position,
            message: format!("bet amount in '{token}' is zero or has leading zeros"),
        });
    }
    digits.parse::<u32>().map_err(|_| EngineError::Parse {
        position,
        message: format!("bet amount in '{token}' is out of range"),
    })
}

/// Parse one token. `position` is the token's index, used in errors.
pub fn decode_token(token: &str, position: usize) -> Result<HistoryToken, EngineError> {
    match token {
        "f" => Ok(HistoryToken::Action(Action::Fold)),
        "k" => Ok(HistoryToken::Action(Action::Check)),
        "c" => Ok(HistoryToken::Action(Action::Call)),
        "_" => Ok(HistoryToken::StreetEnd),
        t if t.starts_with('b') => {
            let amount = parse_amount(&t[1..], position, t)?;
            Ok(HistoryToken::Action(Action::BetTo(amount)))
        }
        t => Err(EngineError::Parse {
            position,
            message: format!("unknown action token '{t}'"),
        }),
    }
}

/// Parse a token list, reporting the index of the first bad token.
pub fn decode_history<S: AsRef<str>>(tokens: &[S]) -> Result<Vec<HistoryToken>, EngineError> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| decode_token(t.as_ref(), i))
        .collect()
}

/// Parse the compact string form; `position` in errors counts tokens.
pub fn decode_history_string(s: &str) -> Result<Vec<HistoryToken>, EngineError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        i += 1;
        if bytes[start] == b'b' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        out.push(decode_token(&s[start..i], out.len())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_token_list() {
        let tokens = decode_history(&["b200", "c", "_", "k", "b450", "f"]).unwrap();
        assert_eq!(
            tokens,
            vec![
                HistoryToken::Action(Action::BetTo(200)),
                HistoryToken::Action(Action::Call),
                HistoryToken::StreetEnd,
                HistoryToken::Action(Action::Check),
                HistoryToken::Action(Action::BetTo(450)),
                HistoryToken::Action(Action::Fold),
            ]
        );
        assert_eq!(encode_history(&tokens), ["b200", "c", "_", "k", "b450", "f"]);
        assert_eq!(history_string(&tokens), "b200c_kb450f");
    }

    #[test]
    fn round_trips_compact_string() {
        let s = "cb300b900c_kk_b1000c_b2000b20000c";
        let tokens = decode_history_string(s).unwrap();
        assert_eq!(history_string(&tokens), s);
    }

    #[test]
    fn rejects_malformed_tokens() {
        for bad in ["x", "b", "b0", "b007", "b-5", "B200", "bb", "check", ""] {
            let err = decode_token(bad, 3).unwrap_err();
            match err {
                EngineError::Parse { position, .. } => assert_eq!(position, 3),
                other => panic!("expected parse error for {bad:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn reports_first_bad_index_in_lists_and_strings() {
        let err = decode_history(&["c", "k", "b12x"]).unwrap_err();
        assert!(matches!(err, EngineError::Parse { position: 2, .. }));
        // 'b12' parses greedily, then 'x' fails as token 2.
        let err = decode_history_string("cb12x").unwrap_err();
        assert!(matches!(err, EngineError::Parse { position: 2, .. }));
    }

    #[test]
    fn amount_out_of_u32_range_is_rejected() {
        let err = decode_token("b99999999999", 0).unwrap_err();
        assert!(matches!(err, EngineError::Parse { position: 0, .. }));
    }
}
