use std::fmt;

use thiserror::Error;

use super::{MatrixDocument, MatrixEntry};
use crate::model::Agent;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixErrorKind {
    #[error("empty document")]
    EmptyDocument,
    #[error("row has {found} cells, expected {expected}")]
    NonRectangular { expected: usize, found: usize },
    #[error("missing fixed state (mark exactly one entry with `*`)")]
    MissingFixedState,
    #[error("multiple fixed states (second `*` here)")]
    MultipleFixedStates,
    #[error("malformed rational `{0}`")]
    MalformedRational(String),
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("no entry has positive mass")]
    NoPositiveMass,
    #[error("fixed state has zero mass")]
    ZeroMassFixedState,
}

/// A matrix parse error, with a 1-based line/column position when one
/// applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixError {
    pub position: Option<(usize, usize)>,
    pub kind: MatrixErrorKind,
}

impl MatrixError {
    pub(crate) fn at(line: usize, column: usize, kind: MatrixErrorKind) -> Self {
        MatrixError {
            position: Some((line, column)),
            kind,
        }
    }

    pub(crate) fn document(kind: MatrixErrorKind) -> Self {
        MatrixError {
            position: None,
            kind,
        }
    }
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some((line, column)) => write!(f, "line {line}, column {column}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl std::error::Error for MatrixError {}

struct LineParser<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn error(&self, kind: MatrixErrorKind) -> MatrixError {
        MatrixError::at(self.line, self.column(), kind)
    }

    fn unexpected(&self, expected: &'static str) -> MatrixError {
        let found = match self.peek() {
            Some(c) => format!("`{c}`"),
            None => "end of line".to_string(),
        };
        self.error(MatrixErrorKind::Unexpected { expected, found })
    }

    fn row(
        &mut self,
        stars: &mut Vec<(usize, usize)>,
    ) -> Result<Vec<Vec<MatrixEntry>>, MatrixError> {
        let mut cells = Vec::new();
        loop {
            cells.push(self.cell(stars)?);
            self.skip_ws();
            match self.peek() {
                Some('|') => {
                    self.bump();
                }
                None => return Ok(cells),
                Some(_) => return Err(self.unexpected("`|`, `,` or end of line")),
            }
        }
    }

    fn cell(&mut self, stars: &mut Vec<(usize, usize)>) -> Result<Vec<MatrixEntry>, MatrixError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            self.bump();
            return Ok(Vec::new());
        }
        let mut entries = vec![self.entry(stars)?];
        loop {
            self.skip_ws();
            if self.peek() != Some(',') {
                return Ok(entries);
            }
            self.bump();
            entries.push(self.entry(stars)?);
        }
    }

    fn entry(&mut self, stars: &mut Vec<(usize, usize)>) -> Result<MatrixEntry, MatrixError> {
        self.skip_ws();
        let starred = self.peek() == Some('*');
        if starred {
            stars.push((self.line, self.column()));
            self.bump();
            self.skip_ws();
        }
        let in_event = match self.peek() {
            Some('y') => true,
            Some('n') => false,
            _ => return Err(self.unexpected("`y` or `n`")),
        };
        self.bump();
        self.skip_ws();
        let close = match self.peek() {
            Some('[') => ']',
            Some('(') => ')',
            _ => return Err(self.unexpected("`[` or `(`")),
        };
        self.bump();
        let start = self.pos;
        let start_col = self.column();
        while self
            .peek()
            .is_some_and(|c| c != close && c != '|' && c != ',')
        {
            self.bump();
        }
        if self.peek() != Some(close) {
            return Err(self.unexpected(if close == ']' { "`]`" } else { "`)`" }));
        }
        let raw = &self.text[start..self.pos];
        self.bump();
        let mass = parse_mass(raw).ok_or_else(|| {
            MatrixError::at(
                self.line,
                start_col,
                MatrixErrorKind::MalformedRational(raw.trim().to_string()),
            )
        })?;
        Ok(MatrixEntry {
            in_event,
            mass,
            starred,
        })
    }
}

/// `int` or `int/int`, non-negative.
fn parse_mass(raw: &str) -> Option<Rational> {
    let raw = raw.trim();
    let ok = !raw.is_empty()
        && raw
            .chars()
            .all(|c| c.is_ascii_digit() || c == '/' || c.is_whitespace());
    if !ok {
        return None;
    }
    raw.parse().ok()
}

fn directive(body: &str, line: usize) -> Result<Option<Agent>, MatrixError> {
    let body = body.trim();
    match body.split_once(':') {
        Some((key, value)) if key.trim() == "opener" => {
            value.trim().parse::<Agent>().map(Some).map_err(|_| {
                MatrixError::at(line, 1, MatrixErrorKind::UnknownDirective(body.to_string()))
            })
        }
        _ => Ok(None),
    }
}

/// Parses the grid notation.
///
/// One row per line, cells separated by `|`, a cell is `-` or a comma
/// separated list of entries `[*](y|n)[mass]`. Parentheses may replace the
/// brackets. Lines starting with `#` are comments; `# opener: q` makes the
/// column agent speak first.
pub fn parse_matrix(text: &str) -> Result<MatrixDocument, MatrixError> {
    let mut rows: Vec<Vec<Vec<MatrixEntry>>> = Vec::new();
    let mut row_lines = Vec::new();
    let mut stars = Vec::new();
    let mut opener = Agent::P;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(body) = trimmed.strip_prefix('#') {
            if let Some(agent) = directive(body, line)? {
                opener = agent;
            }
            continue;
        }
        let mut parser = LineParser {
            text: raw_line,
            pos: 0,
            line,
        };
        rows.push(parser.row(&mut stars)?);
        row_lines.push(line);
    }
    let Some(first) = rows.first() else {
        return Err(MatrixError::document(MatrixErrorKind::EmptyDocument));
    };
    let width = first.len();
    for (row, &line) in rows.iter().zip(&row_lines) {
        if row.len() != width {
            return Err(MatrixError::at(
                line,
                1,
                MatrixErrorKind::NonRectangular {
                    expected: width,
                    found: row.len(),
                },
            ));
        }
    }
    match stars.as_slice() {
        [] => return Err(MatrixError::document(MatrixErrorKind::MissingFixedState)),
        [_] => {}
        [_, (line, column), ..] => {
            return Err(MatrixError::at(
                *line,
                *column,
                MatrixErrorKind::MultipleFixedStates,
            ))
        }
    }
    let doc = MatrixDocument { rows, opener };
    if !doc.entries().any(|(_, _, e)| e.mass.is_positive()) {
        return Err(MatrixError::document(MatrixErrorKind::NoPositiveMass));
    }
    Ok(doc)
}
