//! Seeded generators, independent oracles and batch runners used by the
//! property and acceptance suites.
//!
//! Batches fan out over rayon when the `parallel` feature is enabled (the
//! default); [`Execution::Sequential`] forces a single-threaded run either
//! way, so both paths can be compared.

mod exec;
pub mod generate;
pub mod oracle;
pub mod sweep;

pub use exec::Execution;
pub use generate::{
    alternating, case_config, gen_random_dialogue, gen_random_framework, near_certain_oscillation,
    GeneratorConfig,
};
pub use oracle::{perturb_outside_closure, roundtrip_check, RoundtripReport};
pub use sweep::{
    exhaustive_consensus, perturbation_batch, roundtrip_batch, BatchSummary, CaseFailure,
    SweepSummary,
};
