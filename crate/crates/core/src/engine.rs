//! Forward simulation of Bayesian dialogues.
//!
//! The speaker announces the conditional probability of the event given its
//! own cell; the listener intersects each of its cells with the level sets of
//! that opinion function. Iterating this alternately from the opener yields
//! the dialogue. At a fixed state the announced values form the transcript.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::{join_partitions, Agent, EventSet, Framework, Partition, StateId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("state {state} out of range for a {size}-state framework")]
    StateOutOfRange { state: StateId, size: usize },
    #[error("no partition fixed point within {max_steps} steps")]
    StepLimit { max_steps: usize },
    #[error("agents disagree at the fixed point (p says {p}, q says {q})")]
    NoConsensus { p: Box<Rational>, q: Box<Rational> },
}

/// An agent's opinion as a function of its cell.
#[derive(Debug, Clone)]
pub struct OpinionFunction<'a> {
    partition: &'a Partition,
    values: Vec<Rational>,
}

impl<'a> OpinionFunction<'a> {
    pub fn partition(&self) -> &'a Partition {
        self.partition
    }

    /// Opinion on cell `cell` of the speaker's partition.
    pub fn on_cell(&self, cell: usize) -> &Rational {
        &self.values[cell]
    }

    pub fn at(&self, state: StateId) -> &Rational {
        &self.values[self.partition.cell_of(state)]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

fn conditional(fw: &Framework, cell: &[StateId]) -> Rational {
    let prior = fw.prior();
    let mut inside = Rational::zero();
    let mut total = Rational::zero();
    for &s in cell {
        let m = prior.mass(s);
        if fw.event().contains(s) {
            inside = inside + m;
        }
        total = total + m;
    }
    inside / total
}

pub fn opinion_function(fw: &Framework, agent: Agent) -> OpinionFunction<'_> {
    let partition = fw.partition(agent);
    OpinionFunction {
        partition,
        values: partition
            .cells()
            .iter()
            .map(|c| conditional(fw, c))
            .collect(),
    }
}

fn check_state(fw: &Framework, state: StateId) -> Result<(), EngineError> {
    if state >= fw.size() {
        return Err(EngineError::StateOutOfRange {
            state,
            size: fw.size(),
        });
    }
    Ok(())
}

/// Probability of the event conditional on `agent`'s cell at `omega`.
pub fn opinion(fw: &Framework, agent: Agent, omega: StateId) -> Result<Rational, EngineError> {
    check_state(fw, omega)?;
    Ok(conditional(fw, fw.partition(agent).cell_containing(omega)))
}

/// Splits every listener cell by the speaker's announced value. Sub-cells
/// keep the order of first appearance inside their parent cell.
pub fn refine_by_announcement(
    listener: &Partition,
    speaker: &OpinionFunction<'_>,
) -> Result<Partition, crate::model::ModelError> {
    if listener.universe() != speaker.partition().universe() {
        return Err(crate::model::ModelError::MismatchedStateSpaces {
            left: listener.universe(),
            right: speaker.partition().universe(),
        });
    }
    let mut cells = Vec::with_capacity(listener.len());
    for cell in listener.cells() {
        let mut groups: Vec<(&Rational, Vec<StateId>)> = Vec::new();
        for &s in cell {
            let value = speaker.at(s);
            match groups.iter_mut().find(|(v, _)| *v == value) {
                Some((_, members)) => members.push(s),
                None => groups.push((value, vec![s])),
            }
        }
        cells.extend(groups.into_iter().map(|(_, members)| members));
    }
    Ok(Partition::from_valid_cells(listener.universe(), cells))
}

/// The opener announces, the listener revises, and the turn passes.
pub fn dialogue_step(fw: &Framework) -> Framework {
    step_with_flag(fw).0
}

fn step_with_flag(fw: &Framework) -> (Framework, bool) {
    let speaker = fw.opener();
    let listener = speaker.other();
    let (revised, changed) = revise(fw, fw.partition(speaker), fw.partition(listener));
    let next = fw
        .clone()
        .with_partition(listener, revised)
        .with_opener(listener);
    (next, changed)
}

/// The listener's partition after hearing the speaker's opinion function,
/// and whether it changed.
fn revise(fw: &Framework, speaker: &Partition, listener: &Partition) -> (Partition, bool) {
    let announced = OpinionFunction {
        partition: speaker,
        values: speaker.cells().iter().map(|c| conditional(fw, c)).collect(),
    };
    let revised = refine_by_announcement(listener, &announced)
        .expect("partitions of a framework share its state space");
    let changed = revised.len() != listener.len();
    (revised, changed)
}

/// One announcement of a simulated dialogue, with both partitions as they
/// stand after the listener's revision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub speaker: Agent,
    pub opinion: Rational,
    pub partition_p: Partition,
    pub partition_q: Partition,
    pub refined: bool,
}

/// A simulated dialogue at a fixed state, recorded up to the partition fixed
/// point. Announcements after the recorded steps all equal
/// `consensus_value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueTrace {
    pub omega_star: StateId,
    pub opener: Agent,
    pub steps: Vec<TraceStep>,
    /// First step from which no announcement changes either partition.
    pub fixed_point_step: usize,
    /// First step from which every announcement at `omega_star` equals the
    /// consensus value.
    pub consensus_step: usize,
    pub consensus_value: Rational,
}

impl DialogueTrace {
    /// The announcement at step `t` (1-based), extended past the recorded
    /// steps by the constant tail.
    pub fn announcement(&self, t: usize) -> &Rational {
        assert!(t >= 1, "steps are 1-based");
        self.steps
            .get(t - 1)
            .map(|s| &s.opinion)
            .unwrap_or(&self.consensus_value)
    }

    /// The first `len` announcements.
    pub fn prefix(&self, len: usize) -> Vec<Rational> {
        (1..=len).map(|t| self.announcement(t).clone()).collect()
    }

    /// Announcements through the step after consensus, so the agreement of
    /// both agents is visible.
    pub fn transcript(&self) -> Vec<Rational> {
        self.prefix(self.consensus_step + 1)
    }

    pub fn speaker(&self, t: usize) -> Agent {
        if t % 2 == 1 {
            self.opener
        } else {
            self.opener.other()
        }
    }
}

/// Simulates the dialogue of `fw` at `omega_star` until the partitions stop
/// changing, then checks that both agents agree there.
pub fn run_dialogue(
    fw: &Framework,
    omega_star: StateId,
    max_steps: usize,
) -> Result<DialogueTrace, EngineError> {
    check_state(fw, omega_star)?;
    Evolution::run(fw, max_steps)?.trace_at(fw, omega_star)
}

/// [`run_dialogue`] at every state, sharing the partition history. The
/// result is indexed by fixed state.
pub fn run_dialogue_all(
    fw: &Framework,
    max_steps: usize,
) -> Result<Vec<DialogueTrace>, EngineError> {
    let evolution = Evolution::run(fw, max_steps)?;
    (0..fw.size()).map(|s| evolution.trace_at(fw, s)).collect()
}

struct EvolutionStep {
    speaker: Agent,
    /// The speaker's opinion on each of its cells before the revision.
    values: Vec<Rational>,
    speaker_cells: Partition,
    partition_p: Partition,
    partition_q: Partition,
    refined: bool,
}

/// Partition history of a dialogue; it does not depend on the fixed state.
struct Evolution {
    steps: Vec<EvolutionStep>,
    fixed_point_step: usize,
}

impl Evolution {
    fn run(fw: &Framework, max_steps: usize) -> Result<Self, EngineError> {
        let mut partitions = [fw.partition_p().clone(), fw.partition_q().clone()];
        let slot = |a: Agent| usize::from(a == Agent::Q);
        let mut speaker = fw.opener();
        let mut steps = Vec::new();
        let mut quiet = 0;
        for t in 1..=max_steps {
            let listener = speaker.other();
            let own = &partitions[slot(speaker)];
            let announced = OpinionFunction {
                partition: own,
                values: own.cells().iter().map(|c| conditional(fw, c)).collect(),
            };
            let revised = refine_by_announcement(&partitions[slot(listener)], &announced)
                .expect("partitions of a framework share its state space");
            let refined = revised.len() != partitions[slot(listener)].len();
            let values = announced.values;
            let speaker_cells = own.clone();
            partitions[slot(listener)] = revised;
            steps.push(EvolutionStep {
                speaker,
                values,
                speaker_cells,
                partition_p: partitions[0].clone(),
                partition_q: partitions[1].clone(),
                refined,
            });
            speaker = listener;
            // Two silent announcements in a row: each agent has heard
            // everything the other's current partition can say.
            quiet = if refined { 0 } else { quiet + 1 };
            if quiet == 2 {
                return Ok(Evolution {
                    steps,
                    fixed_point_step: t - 1,
                });
            }
        }
        Err(EngineError::StepLimit { max_steps })
    }

    fn trace_at(&self, fw: &Framework, omega_star: StateId) -> Result<DialogueTrace, EngineError> {
        let last = self.steps.last().expect("a fixed point needs two steps");
        let p = conditional(fw, last.partition_p.cell_containing(omega_star));
        let q = conditional(fw, last.partition_q.cell_containing(omega_star));
        if p != q {
            return Err(EngineError::NoConsensus {
                p: Box::new(p),
                q: Box::new(q),
            });
        }
        let steps: Vec<TraceStep> = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| TraceStep {
                step: i + 1,
                speaker: s.speaker,
                opinion: s.values[s.speaker_cells.cell_of(omega_star)].clone(),
                partition_p: s.partition_p.clone(),
                partition_q: s.partition_q.clone(),
                refined: s.refined,
            })
            .collect();
        let consensus_value = p;
        let consensus_step = steps
            .iter()
            .rposition(|s| s.opinion != consensus_value)
            .map_or(1, |i| i + 2);
        Ok(DialogueTrace {
            omega_star,
            opener: fw.opener(),
            steps,
            fixed_point_step: self.fixed_point_step,
            consensus_step,
            consensus_value,
        })
    }
}

/// The smallest event containing the anchor that is common knowledge there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonKnowledgeComponent {
    pub members: EventSet,
    pub anchor: StateId,
}

/// Closure of `{omega_star}` under both agents' cells.
pub fn reachable_closure(
    fw: &Framework,
    omega_star: StateId,
) -> Result<CommonKnowledgeComponent, EngineError> {
    check_state(fw, omega_star)?;
    let mut members = EventSet::empty(fw.size());
    let mut queue = VecDeque::from([omega_star]);
    members.insert(omega_star);
    while let Some(s) = queue.pop_front() {
        for agent in [Agent::P, Agent::Q] {
            for &t in fw.partition(agent).cell_containing(s) {
                if !members.contains(t) {
                    members.insert(t);
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(CommonKnowledgeComponent {
        members,
        anchor: omega_star,
    })
}

/// True iff `omega_star ∈ e` and both agents' cells at every state of `e`
/// lie inside `e`.
pub fn is_common_knowledge(fw: &Framework, e: &EventSet, omega_star: StateId) -> bool {
    e.universe() == fw.size()
        && e.contains(omega_star)
        && e.states().all(|s| {
            [Agent::P, Agent::Q].iter().all(|&a| {
                fw.partition(a)
                    .cell_containing(s)
                    .iter()
                    .all(|&t| e.contains(t))
            })
        })
}

/// Which cells of the join count when deciding whether an agent is an
/// expert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpertScope {
    /// Join cells inside the agent's own cell at the fixed state.
    #[default]
    OwnCell,
    /// Every join cell inside the common-knowledge closure of the fixed
    /// state.
    Closure,
}

/// An agent is an expert at `omega_star` when no cell of the join of both
/// partitions (within `scope`) would move its opinion.
pub fn is_expert(
    fw: &Framework,
    agent: Agent,
    omega_star: StateId,
    scope: ExpertScope,
) -> Result<bool, EngineError> {
    let own = opinion(fw, agent, omega_star)?;
    let join = join_partitions(fw.partition_p(), fw.partition_q())
        .expect("partitions of a framework share its state space");
    let region = match scope {
        ExpertScope::OwnCell => EventSet::from_states(
            fw.size(),
            fw.partition(agent)
                .cell_containing(omega_star)
                .iter()
                .copied(),
        ),
        ExpertScope::Closure => reachable_closure(fw, omega_star)?.members,
    };
    Ok(join
        .cells()
        .iter()
        .filter(|cell| cell.iter().all(|&s| region.contains(s)))
        .all(|cell| conditional(fw, cell) == own))
}
