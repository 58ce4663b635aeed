//! Domain objects: states, measures, events, partitions, frameworks and
//! dialogues.
//!
//! A [`Framework`] can only be obtained through validation, so every
//! framework handed to the engine has a strictly positive prior and two
//! partitions covering the state space. Raw, possibly invalid input lives in
//! [`FrameworkParts`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub type StateId = usize;

/// One of the two interlocutors. Agent `P` owns the rows of a matrix, `Q`
/// the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    P,
    Q,
}

impl Agent {
    pub fn other(self) -> Agent {
        match self {
            Agent::P => Agent::Q,
            Agent::Q => Agent::P,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::P => "p",
            Agent::Q => "q",
        })
    }
}

impl FromStr for Agent {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "p" | "P" => Ok(Agent::P),
            "q" | "Q" => Ok(Agent::Q),
            other => Err(ModelError::UnknownAgent(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown agent `{0}` (expected p or q)")]
    UnknownAgent(String),
    #[error("partitions range over different state spaces ({left} vs {right} states)")]
    MismatchedStateSpaces { left: usize, right: usize },
    #[error("total mass is zero")]
    ZeroTotalMass,
    #[error("empty cell after drop: cell {cell} of agent {agent} has no positive-mass state")]
    EmptyCellAfterDrop { agent: Agent, cell: usize },
    #[error("dialogue is empty")]
    EmptyDialogue,
    #[error("opinion {value} at position {index} is outside [0,1]")]
    OpinionOutOfRange { index: usize, value: Rational },
    #[error("invalid framework: {0}")]
    Invalid(ValidationReport),
}

/// Finite set of states `0..size`, each with a display label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Self {
        StateSpace { labels }
    }

    /// States labelled `s0, s1, ...`.
    pub fn anonymous(size: usize) -> Self {
        StateSpace {
            labels: (0..size).map(|i| format!("s{i}")).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, state: StateId) -> &str {
        &self.labels[state]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Unnormalized common prior: one non-negative mass per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    masses: Vec<Rational>,
}

impl Measure {
    pub fn new(masses: Vec<Rational>) -> Self {
        Measure { masses }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, state: StateId) -> &Rational {
        &self.masses[state]
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn total(&self) -> Rational {
        self.masses.iter().sum()
    }

    pub fn mass_of<'a>(&self, states: impl IntoIterator<Item = &'a StateId>) -> Rational {
        states.into_iter().map(|&s| &self.masses[s]).sum()
    }

    /// Multiplies every mass by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Measure {
        Measure::new(self.masses.iter().map(|m| m * factor).collect())
    }
}

/// Rescales a measure to total mass one. Conditional probabilities are
/// unaffected.
pub fn normalize_measure(m: &Measure) -> Result<Measure, ModelError> {
    let total = m.total();
    if !total.is_positive() {
        return Err(ModelError::ZeroTotalMass);
    }
    Ok(m.scaled(&total.recip()))
}

/// A subset of the state space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventSet {
    members: Vec<bool>,
}

impl EventSet {
    pub fn empty(universe: usize) -> Self {
        EventSet {
            members: vec![false; universe],
        }
    }

    pub fn full(universe: usize) -> Self {
        EventSet {
            members: vec![true; universe],
        }
    }

    /// Panics if a state is out of range.
    pub fn from_states(universe: usize, states: impl IntoIterator<Item = StateId>) -> Self {
        let mut set = EventSet::empty(universe);
        for s in states {
            set.insert(s);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, state: StateId) -> bool {
        self.members.get(state).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, state: StateId) {
        self.members[state] = true;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.states().all(|s| other.contains(s))
    }
}

/// A partition of `0..universe` into nonempty disjoint cells.
///
/// Cell order is significant for display (rows and columns of a matrix) but
/// not for equality: two partitions are equal when they have the same blocks.
#[derive(Debug, Clone)]
pub struct Partition {
    cells: Vec<Vec<StateId>>,
    cell_of: Vec<usize>,
}

/// Problems found when checking a list of cells against a universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellDefect {
    EmptyCell { cell: usize },
    OutOfRange { cell: usize, state: StateId },
    Overlap { state: StateId },
    Uncovered { state: StateId },
}

fn cell_defects(universe: usize, cells: &[Vec<StateId>]) -> Vec<CellDefect> {
    let mut defects = Vec::new();
    let mut seen = vec![false; universe];
    for (c, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            defects.push(CellDefect::EmptyCell { cell: c });
        }
        for &s in cell {
            if s >= universe {
                defects.push(CellDefect::OutOfRange { cell: c, state: s });
            } else if seen[s] {
                defects.push(CellDefect::Overlap { state: s });
            } else {
                seen[s] = true;
            }
        }
    }
    defects.extend(
        seen.iter()
            .enumerate()
            .filter(|(_, &hit)| !hit)
            .map(|(s, _)| CellDefect::Uncovered { state: s }),
    );
    defects
}

impl Partition {
    /// Builds a partition, rejecting empty, overlapping, out-of-range or
    /// non-covering cells. States inside each cell are sorted.
    pub fn new(universe: usize, cells: Vec<Vec<StateId>>) -> Result<Self, Vec<CellDefect>> {
        let defects = cell_defects(universe, &cells);
        if !defects.is_empty() {
            return Err(defects);
        }
        Ok(Partition::from_valid_cells(universe, cells))
    }

    pub(crate) fn from_valid_cells(universe: usize, mut cells: Vec<Vec<StateId>>) -> Self {
        let mut cell_of = vec![usize::MAX; universe];
        for (c, cell) in cells.iter_mut().enumerate() {
            cell.sort_unstable();
            for &s in cell.iter() {
                cell_of[s] = c;
            }
        }
        Partition { cells, cell_of }
    }

    /// The one-cell partition (no information).
    pub fn trivial(universe: usize) -> Self {
        Partition::from_valid_cells(universe, vec![(0..universe).collect()])
    }

    /// Singleton cells (full information).
    pub fn discrete(universe: usize) -> Self {
        Partition::from_valid_cells(universe, (0..universe).map(|s| vec![s]).collect())
    }

    pub fn universe(&self) -> usize {
        self.cell_of.len()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Vec<StateId>] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &[StateId] {
        &self.cells[id]
    }

    pub fn cell_of(&self, state: StateId) -> usize {
        self.cell_of[state]
    }

    pub fn cell_containing(&self, state: StateId) -> &[StateId] {
        &self.cells[self.cell_of[state]]
    }

    /// True when every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.universe() == coarser.universe()
            && self.cells.iter().all(|cell| {
                let target = coarser.cell_of(cell[0]);
                cell.iter().all(|&s| coarser.cell_of(s) == target)
            })
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.universe() == other.universe()
            && self.len() == other.len()
            && self
                .cells
                .iter()
                .all(|cell| other.cell_containing(cell[0]) == cell.as_slice())
    }
}

impl Eq for Partition {}

/// Coarsest common refinement: two states share a cell iff they share a cell
/// in both inputs. Cells are ordered by their smallest state.
pub fn join_partitions(a: &Partition, b: &Partition) -> Result<Partition, ModelError> {
    if a.universe() != b.universe() {
        return Err(ModelError::MismatchedStateSpaces {
            left: a.universe(),
            right: b.universe(),
        });
    }
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells: Vec<Vec<StateId>> = Vec::new();
    for s in 0..a.universe() {
        let key = (a.cell_of(s), b.cell_of(s));
        let id = *index.entry(key).or_insert_with(|| {
            cells.push(Vec::new());
            cells.len() - 1
        });
        cells[id].push(s);
    }
    Ok(Partition::from_valid_cells(a.universe(), cells))
}

/// A single invariant failure found by [`validate_framework`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyStateSpace,
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    PriorNotPositive {
        state: StateId,
        label: String,
    },
    EventOutOfRange {
        state: StateId,
    },
    EmptyCell {
        agent: Agent,
        cell: usize,
    },
    CellStateOutOfRange {
        agent: Agent,
        cell: usize,
        state: StateId,
    },
    CellsOverlap {
        agent: Agent,
        state: StateId,
    },
    CellsDoNotCover {
        agent: Agent,
        state: StateId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyStateSpace => write!(f, "state space is empty"),
            Violation::LengthMismatch {
                what,
                expected,
                found,
            } => {
                write!(f, "{what} has {found} entries, expected {expected}")
            }
            Violation::PriorNotPositive { state, label } => {
                write!(f, "prior not strictly positive at state {state} ({label})")
            }
            Violation::EventOutOfRange { state } => {
                write!(f, "event contains out-of-range state {state}")
            }
            Violation::EmptyCell { agent, cell } => {
                write!(f, "partition {agent}: cell {cell} is empty")
            }
            Violation::CellStateOutOfRange { agent, cell, state } => {
                write!(
                    f,
                    "partition {agent}: cell {cell} contains out-of-range state {state}"
                )
            }
            Violation::CellsOverlap { agent, state } => {
                write!(f, "partition {agent}: cells overlap at state {state}")
            }
            Violation::CellsDoNotCover { agent, state } => {
                write!(
                    f,
                    "partition {agent}: cells do not cover Ω (state {state} missing)"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Unvalidated framework components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameworkParts {
    pub labels: Vec<String>,
    pub prior: Vec<Rational>,
    pub event: Vec<StateId>,
    pub partition_p: Vec<Vec<StateId>>,
    pub partition_q: Vec<Vec<StateId>>,
    pub opener: Agent,
}

impl FrameworkParts {
    pub fn build(self) -> Result<Framework, ModelError> {
        let report = validate_framework(&self);
        if !report.is_ok() {
            return Err(ModelError::Invalid(report));
        }
        let n = self.labels.len();
        Ok(Framework {
            states: StateSpace::new(self.labels),
            prior: Measure::new(self.prior),
            event: EventSet::from_states(n, self.event),
            partition_p: Partition::from_valid_cells(n, self.partition_p),
            partition_q: Partition::from_valid_cells(n, self.partition_q),
            opener: self.opener,
        })
    }
}

/// Checks every framework invariant and reports each failure.
pub fn validate_framework(parts: &FrameworkParts) -> ValidationReport {
    let n = parts.labels.len();
    let mut violations = Vec::new();
    if n == 0 {
        violations.push(Violation::EmptyStateSpace);
    }
    if parts.prior.len() != n {
        violations.push(Violation::LengthMismatch {
            what: "prior",
            expected: n,
            found: parts.prior.len(),
        });
    }
    for (s, mass) in parts.prior.iter().enumerate() {
        if !mass.is_positive() {
            violations.push(Violation::PriorNotPositive {
                state: s,
                label: parts.labels.get(s).cloned().unwrap_or_default(),
            });
        }
    }
    for &s in &parts.event {
        if s >= n {
            violations.push(Violation::EventOutOfRange { state: s });
        }
    }
    for (agent, cells) in [
        (Agent::P, &parts.partition_p),
        (Agent::Q, &parts.partition_q),
    ] {
        violations.extend(cell_defects(n, cells).into_iter().map(|d| match d {
            CellDefect::EmptyCell { cell } => Violation::EmptyCell { agent, cell },
            CellDefect::OutOfRange { cell, state } => {
                Violation::CellStateOutOfRange { agent, cell, state }
            }
            CellDefect::Overlap { state } => Violation::CellsOverlap { agent, state },
            CellDefect::Uncovered { state } => Violation::CellsDoNotCover { agent, state },
        }));
    }
    ValidationReport { violations }
}

/// A Bayesian opinion framework: states, strictly positive prior, target
/// event, one partition per agent and the agent who speaks first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Framework {
    states: StateSpace,
    prior: Measure,
    event: EventSet,
    partition_p: Partition,
    partition_q: Partition,
    opener: Agent,
}

impl Framework {
    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn size(&self) -> usize {
        self.states.size()
    }

    pub fn prior(&self) -> &Measure {
        &self.prior
    }

    pub fn event(&self) -> &EventSet {
        &self.event
    }

    pub fn partition(&self, agent: Agent) -> &Partition {
        match agent {
            Agent::P => &self.partition_p,
            Agent::Q => &self.partition_q,
        }
    }

    pub fn partition_p(&self) -> &Partition {
        &self.partition_p
    }

    pub fn partition_q(&self) -> &Partition {
        &self.partition_q
    }

    pub fn opener(&self) -> Agent {
        self.opener
    }

    pub fn with_opener(mut self, opener: Agent) -> Self {
        self.opener = opener;
        self
    }

    /// Same framework with every mass multiplied by a positive factor.
    pub fn with_scaled_prior(&self, factor: &Rational) -> Self {
        assert!(factor.is_positive(), "scale factor must be positive");
        Framework {
            prior: self.prior.scaled(factor),
            ..self.clone()
        }
    }

    pub(crate) fn with_partition(mut self, agent: Agent, partition: Partition) -> Self {
        match agent {
            Agent::P => self.partition_p = partition,
            Agent::Q => self.partition_q = partition,
        }
        self
    }

    pub fn to_parts(&self) -> FrameworkParts {
        FrameworkParts {
            labels: self.states.labels().to_vec(),
            prior: self.prior.masses().to_vec(),
            event: self.event.states().collect(),
            partition_p: self.partition_p.cells().to_vec(),
            partition_q: self.partition_q.cells().to_vec(),
            opener: self.opener,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_framework(&self.to_parts())
    }
}

/// Removes zero-mass states, reindexing the rest in order. Returns the new
/// framework and, for each old state, its new index (`None` if dropped).
pub fn drop_null_states(
    parts: FrameworkParts,
) -> Result<(Framework, Vec<Option<StateId>>), ModelError> {
    let n = parts.labels.len();
    let structural: Vec<Violation> = validate_framework(&parts)
        .violations
        .into_iter()
        .filter(|v| !matches!(v, Violation::PriorNotPositive { .. }))
        .collect();
    if !structural.is_empty() {
        return Err(ModelError::Invalid(ValidationReport {
            violations: structural,
        }));
    }
    if let Some(s) = parts.prior.iter().position(Rational::is_negative) {
        return Err(ModelError::Invalid(ValidationReport {
            violations: vec![Violation::PriorNotPositive {
                state: s,
                label: parts.labels[s].clone(),
            }],
        }));
    }
    let total: Rational = parts.prior.iter().sum();
    if !total.is_positive() {
        return Err(ModelError::ZeroTotalMass);
    }

    let mut new_index = vec![None; n];
    let mut next = 0;
    for (s, mass) in parts.prior.iter().enumerate() {
        if mass.is_positive() {
            new_index[s] = Some(next);
            next += 1;
        }
    }
    let remap_cells = |agent: Agent, cells: &[Vec<StateId>]| {
        cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let kept: Vec<StateId> = cell.iter().filter_map(|&s| new_index[s]).collect();
                if kept.is_empty() {
                    Err(ModelError::EmptyCellAfterDrop { agent, cell: c })
                } else {
                    Ok(kept)
                }
            })
            .collect::<Result<Vec<_>, _>>()
    };
    let partition_p = remap_cells(Agent::P, &parts.partition_p)?;
    let partition_q = remap_cells(Agent::Q, &parts.partition_q)?;
    let keep = |s: &StateId| new_index[*s].is_some();
    let framework = FrameworkParts {
        labels: (0..n)
            .filter(keep)
            .map(|s| parts.labels[s].clone())
            .collect(),
        prior: (0..n)
            .filter(keep)
            .map(|s| parts.prior[s].clone())
            .collect(),
        event: parts.event.iter().filter_map(|&s| new_index[s]).collect(),
        partition_p,
        partition_q,
        opener: parts.opener,
    }
    .build()?;
    Ok((framework, new_index))
}

/// A finite transcript of alternating opinions, starting with `opener`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    opinions: Vec<Rational>,
    opener: Agent,
}

impl Dialogue {
    pub fn new(opinions: Vec<Rational>, opener: Agent) -> Result<Self, ModelError> {
        if opinions.is_empty() {
            return Err(ModelError::EmptyDialogue);
        }
        if let Some((index, value)) = opinions
            .iter()
            .enumerate()
            .find(|(_, b)| !b.in_unit_interval())
        {
            return Err(ModelError::OpinionOutOfRange {
                index,
                value: value.clone(),
            });
        }
        Ok(Dialogue { opinions, opener })
    }

    pub fn opinions(&self) -> &[Rational] {
        &self.opinions
    }

    pub fn opener(&self) -> Agent {
        self.opener
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn last(&self) -> &Rational {
        self.opinions.last().expect("dialogue is nonempty")
    }

    pub fn with_opener(mut self, opener: Agent) -> Self {
        self.opener = opener;
        self
    }

    /// The dialogue without its first opinion, spoken by the other agent.
    /// `None` for a single-opinion dialogue.
    pub fn tail(&self) -> Option<Dialogue> {
        (self.len() > 1).then(|| Dialogue {
            opinions: self.opinions[1..].to_vec(),
            opener: self.opener.other(),
        })
    }
}

impl fmt::Display for Dialogue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.opinions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}
