//! Backward-induction construction of a framework that reproduces a given
//! finite dialogue.
//!
//! The last opinion is realized by a one- or two-state base framework. Each
//! earlier opinion `b` is then prepended by giving every cell of the new
//! opener's partition two fresh states, one inside the event and one outside,
//! with masses chosen so that the opener says `b` on every cell. That first
//! announcement carries no information, and the listener's reply on the old
//! states is the inner dialogue's first announcement. Any reply other than
//! 0 or 1 rules out the fresh states, so the rest of the dialogue at the
//! fixed state is the inner one.

use std::fmt;

use thiserror::Error;

use crate::engine::{opinion_function, run_dialogue, EngineError};
use crate::model::{Agent, Dialogue, Framework, FrameworkParts, ModelError, StateId};
use crate::rational::Rational;

/// Position (0-based) of an opinion of 0 or 1 that the next speaker did not
/// repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertaintyViolation {
    pub index: usize,
}

impl fmt::Display for CertaintyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "certainty acquiescence violated at t={}", self.index + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalizeError {
    #[error("{0}")]
    Acquiescence(CertaintyViolation),
    #[error("opinion {0} is outside [0,1]")]
    OutOfRange(Rational),
    #[error("opening opinion {0} is certain; extension needs 0 < b < 1")]
    CertainOpening(Rational),
    #[error("cell mass must be positive with 0 <= event mass <= cell mass (got {a} of {p})")]
    BadCellMass { a: Rational, p: Rational },
    #[error("silence at position {index} has no opinion two turns earlier")]
    EarlySilence { index: usize },
    #[error("student opinion {value} at position {index} must lie strictly between 0 and 1")]
    StudentValue { index: usize, value: Rational },
    #[error("expert is certain at {expert}; student opinion {value} at position {index} would break acquiescence")]
    CertainExpert {
        expert: Rational,
        index: usize,
        value: Rational,
    },
    #[error(
        "constructed framework diverges at step {step}: expected {expected}, simulated {found}"
    )]
    Mismatch {
        step: usize,
        expected: Rational,
        found: Rational,
    },
    #[error("constructed framework reaches consensus at step {found}, after step {bound}")]
    LateConsensus { bound: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Returns the first `t` with `b_t` certain and `b_{t+1} != b_t`.
pub fn check_certainty_acquiescence(opinions: &[Rational]) -> Result<(), CertaintyViolation> {
    match opinions
        .windows(2)
        .position(|w| w[0].is_certain() && w[1] != w[0])
    {
        Some(index) => Err(CertaintyViolation { index }),
        None => Ok(()),
    }
}

/// Masses of the two states added to one cell of the opener's partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddedMasses {
    pub y_mass: Rational,
    pub n_mass: Rational,
}

/// Solves `b1 = (a + y) / (p + y + n)` for `y, n > 0`, where `a` is the
/// event mass of the cell and `p` its total mass.
///
/// With `s = a/b1 + (p - a)/(1 - b1)` the choice `y = b1 (p + s) - a`,
/// `n = s - y` gives `y >= b1 p` and `n >= (1 - b1) p`, both positive.
pub fn choose_added_masses(
    b1: &Rational,
    a: &Rational,
    p: &Rational,
) -> Result<AddedMasses, RationalizeError> {
    if !b1.in_open_unit_interval() {
        return Err(RationalizeError::CertainOpening(b1.clone()));
    }
    if !p.is_positive() || a.is_negative() || a > p {
        return Err(RationalizeError::BadCellMass {
            a: a.clone(),
            p: p.clone(),
        });
    }
    let one = Rational::one();
    let s = a / b1 + (p - a) / (&one - b1);
    let y_mass = b1 * (p + &s) - a;
    let n_mass = &s - &y_mass;
    assert!(y_mass.is_positive() && n_mass.is_positive());
    assert_eq!(&(a + &y_mass) / &(p + &y_mass + &n_mass), b1.clone());
    Ok(AddedMasses { y_mass, n_mass })
}

/// One level of the backward induction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionLevel {
    /// Length of the dialogue suffix realized after this level.
    pub prefix_length: usize,
    pub opener: Agent,
    pub opening_opinion: Rational,
    pub states_before: usize,
    pub states_after: usize,
    /// Cells of the opener's partition that received fresh states (0 for
    /// the base level).
    pub opener_cells: usize,
    pub added: Vec<AddedMasses>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalizationResult {
    pub framework: Framework,
    pub omega_star: StateId,
    /// Base level first, then one entry per prepended opinion.
    pub construction_log: Vec<ConstructionLevel>,
}

/// Framework whose dialogue at the fixed state is constantly `b`, whichever
/// agent opens.
pub fn rationalize_base(
    b: &Rational,
    opener: Agent,
) -> Result<RationalizationResult, RationalizeError> {
    if !b.in_unit_interval() {
        return Err(RationalizeError::OutOfRange(b.clone()));
    }
    let labels = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let (parts, omega_star) = if b.is_one() {
        (
            FrameworkParts {
                labels: labels(&["y"]),
                prior: vec![Rational::one()],
                event: vec![0],
                partition_p: vec![vec![0]],
                partition_q: vec![vec![0]],
                opener,
            },
            0,
        )
    } else if b.is_zero() {
        let half = Rational::new(1, 2);
        (
            FrameworkParts {
                labels: labels(&["y", "n"]),
                prior: vec![half.clone(), half],
                event: vec![0],
                partition_p: vec![vec![0], vec![1]],
                partition_q: vec![vec![0], vec![1]],
                opener,
            },
            1,
        )
    } else {
        (
            FrameworkParts {
                labels: labels(&["y", "n"]),
                prior: vec![b.clone(), Rational::one() - b],
                event: vec![0],
                partition_p: vec![vec![0, 1]],
                partition_q: vec![vec![0, 1]],
                opener,
            },
            0,
        )
    };
    let framework = parts.build()?;
    let states = framework.size();
    Ok(RationalizationResult {
        framework,
        omega_star,
        construction_log: vec![ConstructionLevel {
            prefix_length: 1,
            opener,
            opening_opinion: b.clone(),
            states_before: 0,
            states_after: states,
            opener_cells: 0,
            added: Vec::new(),
        }],
    })
}

/// Prepends the opinion `b1`, spoken by the agent who listens first in
/// `inner`.
pub fn extend_with_opening_opinion(
    inner: RationalizationResult,
    b1: &Rational,
) -> Result<RationalizationResult, RationalizeError> {
    if !b1.in_open_unit_interval() {
        return Err(RationalizeError::CertainOpening(b1.clone()));
    }
    let RationalizationResult {
        framework,
        omega_star,
        mut construction_log,
    } = inner;
    let opener = framework.opener().other();
    let listener = opener.other();
    let level = construction_log.last().map_or(1, |l| l.prefix_length) + 1;

    let mut parts = framework.to_parts();
    let base = parts.labels.len();
    let opener_cells = framework.partition(opener).cells().to_vec();
    let mut added = Vec::with_capacity(opener_cells.len());
    let mut new_opener_cells = Vec::with_capacity(opener_cells.len());
    let mut all_y = Vec::with_capacity(opener_cells.len());
    let mut all_n = Vec::with_capacity(opener_cells.len());
    for (c, cell) in opener_cells.into_iter().enumerate() {
        let a = framework
            .prior()
            .mass_of(cell.iter().filter(|&&s| framework.event().contains(s)));
        let p = framework.prior().mass_of(&cell);
        let masses = choose_added_masses(b1, &a, &p)?;
        let y = base + 2 * c;
        let n = y + 1;
        parts.labels.push(format!("y{level}_{c}"));
        parts.labels.push(format!("n{level}_{c}"));
        parts.prior.push(masses.y_mass.clone());
        parts.prior.push(masses.n_mass.clone());
        parts.event.push(y);
        let mut extended = cell;
        extended.extend([y, n]);
        new_opener_cells.push(extended);
        all_y.push(y);
        all_n.push(n);
        added.push(masses);
    }
    let cell_count = new_opener_cells.len();
    let (opener_slot, listener_slot) = match opener {
        Agent::P => (&mut parts.partition_p, &mut parts.partition_q),
        Agent::Q => (&mut parts.partition_q, &mut parts.partition_p),
    };
    *opener_slot = new_opener_cells;
    listener_slot.push(all_y);
    listener_slot.push(all_n);
    debug_assert_eq!(listener, framework.opener());
    parts.opener = opener;

    let extended = parts.build()?;
    assert_eq!(extended.size(), base + 2 * cell_count);
    let announced = opinion_function(&extended, opener);
    assert!(announced.values().iter().all(|v| v == b1));

    construction_log.push(ConstructionLevel {
        prefix_length: level,
        opener,
        opening_opinion: b1.clone(),
        states_before: base,
        states_after: extended.size(),
        opener_cells: cell_count,
        added,
    });
    Ok(RationalizationResult {
        framework: extended,
        omega_star,
        construction_log,
    })
}

/// Builds a framework and fixed state whose dialogue starts with `d` and
/// stays at its last opinion from step `|d|` on. The result is checked by
/// simulation before it is returned.
pub fn rationalize(d: &Dialogue) -> Result<RationalizationResult, RationalizeError> {
    let result = construct(d)?;
    verify_reproduction(&result, d)?;
    Ok(result)
}

/// The backward induction alone, without the simulation check.
pub fn construct(d: &Dialogue) -> Result<RationalizationResult, RationalizeError> {
    let opinions = d.opinions();
    check_certainty_acquiescence(opinions).map_err(RationalizeError::Acquiescence)?;
    // Past the first certain opinion the dialogue is constant.
    let effective = opinions
        .iter()
        .position(Rational::is_certain)
        .map_or(opinions.len(), |k| k + 1);
    let speaker_at = |i: usize| {
        if i.is_multiple_of(2) {
            d.opener()
        } else {
            d.opener().other()
        }
    };

    let mut result = rationalize_base(&opinions[effective - 1], speaker_at(effective - 1))?;
    for b in opinions[..effective - 1].iter().rev() {
        result = extend_with_opening_opinion(result, b)?;
    }
    debug_assert_eq!(result.framework.opener(), d.opener());
    Ok(result)
}

fn verify_reproduction(
    result: &RationalizationResult,
    d: &Dialogue,
) -> Result<(), RationalizeError> {
    let trace = run_dialogue(
        &result.framework,
        result.omega_star,
        2 * result.framework.size() + 2,
    )?;
    for (i, expected) in d.opinions().iter().enumerate() {
        let found = trace.announcement(i + 1);
        if found != expected {
            return Err(RationalizeError::Mismatch {
                step: i + 1,
                expected: expected.clone(),
                found: found.clone(),
            });
        }
    }
    if trace.consensus_step > d.len() {
        return Err(RationalizeError::LateConsensus {
            bound: d.len(),
            found: trace.consensus_step,
        });
    }
    Ok(())
}

/// One position of a recorded tape: an opinion, or silence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TapeEntry {
    Opinion(Rational),
    Silence,
}

/// Replaces each silence by the opinion the same speaker gave two turns
/// earlier.
pub fn expand_silence(tape: &[TapeEntry], opener: Agent) -> Result<Dialogue, RationalizeError> {
    let mut out: Vec<Rational> = Vec::with_capacity(tape.len());
    for (i, entry) in tape.iter().enumerate() {
        let value = match entry {
            TapeEntry::Opinion(b) => b.clone(),
            TapeEntry::Silence if i >= 2 => out[i - 2].clone(),
            TapeEntry::Silence => return Err(RationalizeError::EarlySilence { index: i }),
        };
        out.push(value);
    }
    Ok(Dialogue::new(out, opener)?)
}

/// Interleaves a constant expert opinion with the student's replies:
/// `(e, s1, e, s2, ..., e)`, expert first.
///
/// Student replies must lie strictly between 0 and 1. An expert who is
/// certain admits only replies equal to its own value.
pub fn make_didactic_dialogue(
    expert_value: &Rational,
    student_values: &[Rational],
) -> Result<Dialogue, RationalizeError> {
    if !expert_value.in_unit_interval() {
        return Err(RationalizeError::OutOfRange(expert_value.clone()));
    }
    for (index, value) in student_values.iter().enumerate() {
        if expert_value.is_certain() {
            if value != expert_value {
                return Err(RationalizeError::CertainExpert {
                    expert: expert_value.clone(),
                    index,
                    value: value.clone(),
                });
            }
        } else if !value.in_open_unit_interval() {
            return Err(RationalizeError::StudentValue {
                index,
                value: value.clone(),
            });
        }
    }
    let mut opinions = Vec::with_capacity(2 * student_values.len() + 1);
    opinions.push(expert_value.clone());
    for s in student_values {
        opinions.push(s.clone());
        opinions.push(expert_value.clone());
    }
    let d = Dialogue::new(opinions, Agent::P)?;
    check_certainty_acquiescence(d.opinions()).map_err(RationalizeError::Acquiescence)?;
    Ok(d)
}
