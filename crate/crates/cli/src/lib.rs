//! The `ratdial` command line: simulate grids, rationalize dialogues,
//! verify one against the other, and print the built-in fixtures.
//!
//! Exit status is 0 on success, 1 for unusable input and 2 when a
//! simulated transcript does not match the expected dialogue.

mod source;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dialogue_core::engine::DialogueTrace;
use dialogue_core::matrix_io::{
    emit_document, emit_matrix, export_framework, matrix_to_framework, parse_dialogue, parse_matrix,
};
use dialogue_core::rationalizer::{construct, rationalize, RationalizeError};
use dialogue_core::{
    run_dialogue, Agent, Dialogue, Framework, Rational, StateId, DEFAULT_MAX_STEPS,
};
use serde_json::json;

pub use source::FIXTURE_DIR_VAR;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ratdial",
    version,
    about = "Exact Bayesian dialogues on finite partition frameworks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the dialogue of a grid at its starred state.
    Simulate(SimulateArgs),
    /// Build a grid whose dialogue reproduces the given opinions.
    Rationalize(RationalizeArgs),
    /// Check that a grid's dialogue starts with the given opinions and then
    /// stays at the last one.
    Verify(VerifyArgs),
    /// List or print the built-in grids.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Grid file, fixture name, or grid text.
    matrix: String,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Print both partitions after every announcement.
    #[arg(long)]
    trace: bool,
    /// Print the framework and transcript as JSON.
    #[arg(long)]
    json: bool,
    /// Report the simulation time.
    #[arg(long)]
    stats: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpenerArg {
    P,
    Q,
}

impl From<OpenerArg> for Agent {
    fn from(a: OpenerArg) -> Agent {
        match a {
            OpenerArg::P => Agent::P,
            OpenerArg::Q => Agent::Q,
        }
    }
}

#[derive(Debug, Args)]
struct RationalizeArgs {
    /// Opinions separated by spaces or commas, or a file holding them.
    dialogue: String,
    #[arg(long, value_enum, default_value = "p")]
    opener: OpenerArg,
    /// Write the grid here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-simulate the result before writing it (the default).
    #[arg(long, overrides_with = "no_verify")]
    verify: bool,
    #[arg(long)]
    no_verify: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Grid file, fixture name, or grid text.
    matrix: String,
    /// Expected opinions, or a file holding them.
    dialogue: String,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("which").required(true).args(["list", "name"])))]
struct FixturesArgs {
    #[arg(long)]
    list: bool,
    #[arg(long)]
    name: Option<String>,
    /// Print the canonical grid text.
    #[arg(long, requires = "name")]
    print: bool,
}

/// Runs one command line. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a, out),
        Command::Rationalize(a) => rationalize_cmd(&a, out),
        Command::Verify(a) => verify(&a, out),
        Command::Fixtures(a) => fixtures(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn mismatch(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_MISMATCH,
        message: message.into(),
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    input(format!("write failed: {e}"))
}

fn load(arg: &str) -> Result<(Framework, StateId), Failure> {
    let doc = source::load_matrix(arg).map_err(input)?;
    matrix_to_framework(&doc).map_err(|e| input(format!("{arg}: {e}")))
}

fn load_dialogue(arg: &str) -> Result<Dialogue, Failure> {
    let (text, origin) = source::resolve(arg).map_err(input)?;
    parse_dialogue(&text).map_err(|e| input(format!("{origin}: {e}")))
}

fn join(values: &[Rational]) -> String {
    values
        .iter()
        .map(Rational::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn cells(fw: &Framework, cells: &[Vec<StateId>]) -> String {
    let blocks: Vec<String> = cells
        .iter()
        .map(|c| {
            let names: Vec<&str> = c.iter().map(|&s| fw.states().label(s)).collect();
            format!("{{{}}}", names.join(" "))
        })
        .collect();
    blocks.join(" ")
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (fw, star) = load(&a.matrix)?;
    let start = Instant::now();
    let trace = run_dialogue(&fw, star, a.max_steps).map_err(|e| input(e.to_string()))?;
    let elapsed = start.elapsed();
    if a.json {
        let mut doc = json!({
            "framework": export_framework(&fw, star),
            "transcript": trace.transcript().iter().map(Rational::to_string).collect::<Vec<_>>(),
            "consensus": trace.consensus_value.to_string(),
            "consensus_step": trace.consensus_step,
            "fixed_point_step": trace.fixed_point_step,
        });
        if a.trace {
            doc["steps"] = trace
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "step": s.step,
                        "speaker": s.speaker,
                        "opinion": s.opinion.to_string(),
                        "partition_p": s.partition_p.cells(),
                        "partition_q": s.partition_q.cells(),
                    })
                })
                .collect();
        }
        if a.stats {
            doc["elapsed_us"] = (elapsed.as_micros() as u64).into();
        }
        let text = serde_json::to_string_pretty(&doc).expect("json value");
        writeln!(out, "{text}").map_err(io_failure)?;
        return Ok(());
    }
    write_transcript(&fw, &trace, a, out).map_err(io_failure)?;
    if a.stats {
        writeln!(out, "elapsed_us={}", elapsed.as_micros()).map_err(io_failure)?;
    }
    Ok(())
}

fn write_transcript(
    fw: &Framework,
    trace: &DialogueTrace,
    a: &SimulateArgs,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    if a.trace {
        for s in trace.steps.iter() {
            writeln!(
                out,
                "step {} {} says {} | P: {} | Q: {}",
                s.step,
                s.speaker,
                s.opinion,
                cells(fw, s.partition_p.cells()),
                cells(fw, s.partition_q.cells())
            )?;
        }
    }
    writeln!(out, "{}", join(&trace.transcript()))?;
    writeln!(
        out,
        "consensus={} at step {}",
        trace.consensus_value, trace.consensus_step
    )
}

fn rationalize_cmd(a: &RationalizeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let d = load_dialogue(&a.dialogue)?.with_opener(a.opener.into());
    let built = if a.no_verify {
        construct(&d)
    } else {
        rationalize(&d)
    };
    let result = built.map_err(|e| match e {
        RationalizeError::Mismatch { .. }
        | RationalizeError::LateConsensus { .. }
        | RationalizeError::Engine(_) => mismatch(format!("self-check failed: {e}")),
        other => input(other.to_string()),
    })?;
    let text = emit_matrix(&result.framework, result.omega_star);
    match &a.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))?
        }
        None => out.write_all(text.as_bytes()).map_err(io_failure)?,
    }
    Ok(())
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (fw, star) = load(&a.matrix)?;
    let d = load_dialogue(&a.dialogue)?;
    let trace = run_dialogue(&fw, star, a.max_steps).map_err(|e| mismatch(e.to_string()))?;
    let expected = d.opinions();
    let last = d.last();
    // Past the recorded steps the announcements stay at the consensus.
    let horizon = trace.steps.len().max(expected.len()) + 1;
    for t in 1..=horizon {
        let want = expected.get(t - 1).unwrap_or(last);
        let found = trace.announcement(t);
        if found != want {
            return Err(mismatch(format!(
                "diverges at step {t}: expected {want}, simulated {found}"
            )));
        }
    }
    writeln!(out, "ok: {} reproduced, consensus={}", join(expected), last).map_err(io_failure)
}

fn fixtures(a: &FixturesArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.list {
        return writeln!(out, "{}", source::fixture_names().join(" ")).map_err(io_failure);
    }
    let name = a.name.as_deref().expect("clap requires --list or --name");
    let text = source::fixture_source(name)
        .ok_or_else(|| input(format!("unknown fixture `{name}`")))?
        .map_err(input)?;
    let doc = parse_matrix(&text).map_err(|e| input(format!("{name}: {e}")))?;
    if a.print {
        out.write_all(emit_document(&doc).as_bytes())
            .map_err(io_failure)
    } else {
        let (fw, _) = matrix_to_framework(&doc).map_err(|e| input(format!("{name}: {e}")))?;
        writeln!(
            out,
            "{name}: {}x{} grid, {} states, opener {}",
            doc.height(),
            doc.width(),
            fw.size(),
            fw.opener()
        )
        .map_err(io_failure)
    }
}
