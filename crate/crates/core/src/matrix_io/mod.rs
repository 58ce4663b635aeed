//! Text formats: the state grid notation for frameworks, a JSON export, and
//! whitespace separated dialogues.
//!
//! In a grid, rows are the cells of agent p and columns the cells of agent
//! q. Each grid cell lists the states in that row/column intersection as
//! `y[mass]` (in the event) or `n[mass]` (outside it); `*` marks the fixed
//! state.

mod dialogue;
mod export;
mod fixtures;
mod parse;

use std::fmt::Write as _;

pub use dialogue::{parse_dialogue, DialogueParseError};
pub use export::{export_framework, FrameworkExport};
pub use fixtures::{builtin_fixtures, fixture, fixture_text, UnknownFixture, FIXTURE_NAMES};
pub use parse::{parse_matrix, MatrixError, MatrixErrorKind};

use crate::model::{drop_null_states, Agent, Framework, FrameworkParts, ModelError, StateId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixEntry {
    pub in_event: bool,
    pub mass: Rational,
    pub starred: bool,
}

/// A parsed grid, zero-mass placeholders included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixDocument {
    pub rows: Vec<Vec<Vec<MatrixEntry>>>,
    pub opener: Agent,
}

impl MatrixDocument {
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Every entry with its row and column, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &MatrixEntry)> {
        self.rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(c, cell)| cell.iter().map(move |e| (r, c, e)))
        })
    }
}

/// Builds the framework described by a grid. Zero-mass entries are dropped,
/// and rows or columns left without any state are not agents' cells.
pub fn matrix_to_framework(doc: &MatrixDocument) -> Result<(Framework, StateId), MatrixError> {
    let mut labels = Vec::new();
    let mut prior = Vec::new();
    let mut event = Vec::new();
    let mut rows: Vec<Vec<StateId>> = vec![Vec::new(); doc.height()];
    let mut cols: Vec<Vec<StateId>> = vec![Vec::new(); doc.width()];
    let mut star = None;
    for (r, row) in doc.rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            for (k, entry) in cell.iter().enumerate() {
                if !entry.mass.is_positive() {
                    if entry.starred {
                        return Err(MatrixError::document(MatrixErrorKind::ZeroMassFixedState));
                    }
                    continue;
                }
                let s = labels.len();
                let tag = if entry.in_event { 'y' } else { 'n' };
                labels.push(if k == 0 {
                    format!("{tag}{}.{}", r + 1, c + 1)
                } else {
                    format!("{tag}{}.{}.{}", r + 1, c + 1, k)
                });
                prior.push(entry.mass.clone());
                if entry.in_event {
                    event.push(s);
                }
                if entry.starred {
                    star = Some(s);
                }
                rows[r].push(s);
                cols[c].push(s);
            }
        }
    }
    let star = star.ok_or_else(|| MatrixError::document(MatrixErrorKind::MissingFixedState))?;
    rows.retain(|cell| !cell.is_empty());
    cols.retain(|cell| !cell.is_empty());
    let parts = FrameworkParts {
        labels,
        prior,
        event,
        partition_p: rows,
        partition_q: cols,
        opener: doc.opener,
    };
    let (framework, index) = drop_null_states(parts).map_err(|e| match e {
        ModelError::ZeroTotalMass => MatrixError::document(MatrixErrorKind::NoPositiveMass),
        other => unreachable!("grid always yields a structurally valid framework: {other}"),
    })?;
    Ok((
        framework,
        index[star].expect("fixed state has positive mass"),
    ))
}

/// Lays a framework out as a grid: p's cells as rows and q's cells as
/// columns, in partition order.
pub fn framework_to_document(fw: &Framework, omega_star: StateId) -> MatrixDocument {
    let p = fw.partition_p();
    let q = fw.partition_q();
    let mut rows = vec![vec![Vec::new(); q.len()]; p.len()];
    for s in 0..fw.size() {
        rows[p.cell_of(s)][q.cell_of(s)].push(MatrixEntry {
            in_event: fw.event().contains(s),
            mass: fw.prior().mass(s).clone(),
            starred: s == omega_star,
        });
    }
    MatrixDocument {
        rows,
        opener: fw.opener(),
    }
}

/// Canonical text of a grid. A `# opener: q` line precedes the rows when q
/// speaks first.
pub fn emit_document(doc: &MatrixDocument) -> String {
    let mut out = String::new();
    if doc.opener == Agent::Q {
        out.push_str("# opener: q\n");
    }
    for row in &doc.rows {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str(" | ");
            }
            if cell.is_empty() {
                out.push('-');
            }
            for (k, e) in cell.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let star = if e.starred { "*" } else { "" };
                let tag = if e.in_event { 'y' } else { 'n' };
                let _ = write!(out, "{star}{tag}[{}]", e.mass);
            }
        }
        out.push('\n');
    }
    out
}

pub fn emit_matrix(fw: &Framework, omega_star: StateId) -> String {
    emit_document(&framework_to_document(fw, omega_star))
}
