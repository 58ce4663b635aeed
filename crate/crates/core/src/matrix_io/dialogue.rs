use thiserror::Error;

use crate::model::{Agent, Dialogue, ModelError};
use crate::rational::{Rational, RationalParseError};
use crate::rationalizer::{expand_silence, RationalizeError, TapeEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueParseError {
    #[error("empty dialogue")]
    Empty,
    #[error("token {index} (`{token}`): {source}")]
    BadNumber {
        index: usize,
        token: String,
        source: RationalParseError,
    },
    #[error("token {index} (`{token}`): value outside [0,1]")]
    OutOfRange { index: usize, token: String },
    #[error("token {index}: silence needs an opinion two turns earlier")]
    EarlySilence { index: usize },
}

/// Parses opinions separated by whitespace or commas. Each token is an
/// integer, a fraction `a/b`, an exact decimal, or `_` for silence (the
/// speaker repeats its previous opinion).
pub fn parse_dialogue(text: &str) -> Result<Dialogue, DialogueParseError> {
    let tokens: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(DialogueParseError::Empty);
    }
    let tape = tokens
        .iter()
        .enumerate()
        .map(|(index, &token)| {
            if token == "_" {
                return Ok(TapeEntry::Silence);
            }
            let value: Rational =
                token
                    .parse()
                    .map_err(|source| DialogueParseError::BadNumber {
                        index,
                        token: token.to_string(),
                        source,
                    })?;
            if !value.in_unit_interval() {
                return Err(DialogueParseError::OutOfRange {
                    index,
                    token: token.to_string(),
                });
            }
            Ok(TapeEntry::Opinion(value))
        })
        .collect::<Result<Vec<_>, _>>()?;
    expand_silence(&tape, Agent::P).map_err(|e| match e {
        RationalizeError::EarlySilence { index } => DialogueParseError::EarlySilence { index },
        RationalizeError::Model(ModelError::EmptyDialogue) => DialogueParseError::Empty,
        other => unreachable!("tape values were range checked: {other}"),
    })
}
