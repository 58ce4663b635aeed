use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use dialogue_testkit::{
    exhaustive_consensus, perturbation_batch, roundtrip_batch, Execution, GeneratorConfig,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Roundtrip,
    Perturbation,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Sequential,
    Parallel,
}

/// Runs a seeded property suite and prints a JSON summary.
#[derive(Debug, Parser)]
#[command(name = "dialogue-harness")]
struct Args {
    #[arg(long, value_enum, default_value = "roundtrip")]
    suite: Suite,
    #[arg(long, default_value_t = 1000)]
    cases: u64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
    max_denominator: u32,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_dialogue_length: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "parallel")]
    mode: Mode,
    /// Adds the wall-clock time to the summary.
    #[arg(long)]
    stats: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = GeneratorConfig {
        max_states: args.max_states as usize,
        max_denominator: args.max_denominator,
        max_dialogue_length: args.max_dialogue_length as usize,
        seed: args.seed,
    };
    let exec = match args.mode {
        Mode::Sequential => Execution::Sequential,
        Mode::Parallel => Execution::Parallel,
    };
    let start = Instant::now();
    let (mut summary, ok) = match args.suite {
        Suite::Roundtrip => {
            let s = roundtrip_batch(&cfg, args.cases, exec);
            (serde_json::to_value(&s), s.all_passed())
        }
        Suite::Perturbation => {
            let s = perturbation_batch(&cfg, args.cases, exec);
            (serde_json::to_value(&s), s.all_passed())
        }
        Suite::Exhaustive => {
            let s = exhaustive_consensus(cfg.max_states, i64::from(cfg.max_denominator), exec);
            (serde_json::to_value(&s), s.all_passed())
        }
    };
    let summary = summary.as_mut().expect("summaries serialize");
    if args.stats {
        summary["elapsed_ms"] = (start.elapsed().as_millis() as u64).into();
    }
    summary["ok"] = ok.into();
    println!(
        "{}",
        serde_json::to_string_pretty(summary).expect("json value")
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
