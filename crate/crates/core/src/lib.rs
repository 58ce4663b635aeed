//! Exact simulation of two-agent Bayesian dialogues over finite partition
//! models, and construction of models that reproduce any finite dialogue in
//! which certainty is always acquiesced to.
//!
//! - [`model`]: states, priors, events, partitions, frameworks, dialogues.
//! - [`engine`]: opinions, announcement refinement, simulation to the fixed
//!   point, common knowledge and expertise.
//! - [`rationalizer`]: backward-induction construction of a framework for a
//!   given dialogue.
//! - [`matrix_io`]: grid notation, JSON export, dialogue parsing and the
//!   built-in fixtures.

#![allow(clippy::result_large_err)]

pub mod engine;
pub mod matrix_io;
pub mod model;
pub mod rational;
pub mod rationalizer;

pub use engine::{run_dialogue, DialogueTrace, EngineError};
pub use model::{Agent, Dialogue, Framework, FrameworkParts, ModelError, Partition, StateId};
pub use rational::Rational;
pub use rationalizer::{rationalize, RationalizationResult, RationalizeError};

/// Step limit used when no explicit limit is given.
pub const DEFAULT_MAX_STEPS: usize = 10_000;
