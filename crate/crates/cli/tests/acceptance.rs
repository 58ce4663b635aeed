//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dialogue_core::engine::{is_expert, run_dialogue, ExpertScope};
use dialogue_core::matrix_io::{
    emit_document, emit_matrix, fixture, matrix_to_framework, parse_matrix, FIXTURE_NAMES,
};
use dialogue_core::rational::ratio;
use dialogue_core::rationalizer::rationalize;
use dialogue_core::{Agent, Dialogue, Rational};
use dialogue_testkit::{
    alternating, case_config, exhaustive_consensus, gen_random_framework, perturbation_batch,
    roundtrip_batch, roundtrip_check, Execution, GeneratorConfig,
};

const FIXTURE_LIMIT: Duration = Duration::from_secs(1);
const ROUNDTRIP_LIMIT: Duration = Duration::from_secs(60);
const SWEEP_LIMIT: Duration = Duration::from_secs(300);
const ROUNDTRIP_CASES: u64 = 1000;
const PERTURBATION_CASES: u64 = 100;
const FORMAT_CASES: u64 = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn simulate(name: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ratdial"))
        .args(["simulate", name])
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn fixture_reproduction() -> Outcome {
    let start = Instant::now();
    let stdout = simulate("example-5x5")?;
    within(start.elapsed(), FIXTURE_LIMIT)?;
    let expected = "1/4 1/4 1/4 1/4 3/4 3/4\nconsensus=3/4 at step 5\n";
    check(stdout == expected, || format!("got {stdout:?}"))?;
    Ok(format!("transcript matches in {:?}", start.elapsed()))
}

fn didactic_fixture() -> Outcome {
    let start = Instant::now();
    let stdout = simulate("didactic-5x5")?;
    let (fw, star) = matrix_to_framework(&fixture("didactic-5x5").map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let expert = is_expert(&fw, Agent::P, star, ExpertScope::OwnCell).map_err(|e| e.to_string())?;
    within(start.elapsed(), FIXTURE_LIMIT)?;
    let expected = "3/4 1/4 3/4 1/4 3/4 3/4\nconsensus=3/4 at step 5\n";
    check(stdout == expected, || format!("got {stdout:?}"))?;
    check(expert, || "p is not an expert at the starred state".into())?;
    Ok(format!(
        "transcript matches, p is expert, {:?}",
        start.elapsed()
    ))
}

fn staged_construction() -> Outcome {
    let stages = [
        ("example-stage-1", vec![(3, 4), (3, 4)]),
        ("example-stage-2", vec![(1, 4), (3, 4), (3, 4)]),
        ("example-stage-3", vec![(1, 4), (1, 4), (3, 4), (3, 4)]),
    ];
    for (name, pairs) in stages {
        let doc = fixture(name).map_err(|e| e.to_string())?;
        let (fw, star) = matrix_to_framework(&doc).map_err(|e| e.to_string())?;
        let trace = run_dialogue(&fw, star, 100).map_err(|e| e.to_string())?;
        let expected: Vec<Rational> = pairs.iter().map(|&(n, d)| ratio(n, d)).collect();
        check(trace.transcript() == expected, || {
            format!("{name}: got {:?}", trace.transcript())
        })?;
    }
    Ok("three stages match".into())
}

fn random_round_trip() -> Outcome {
    let cfg = GeneratorConfig {
        max_states: 12,
        max_denominator: 12,
        max_dialogue_length: 8,
        seed: 0x5eed,
    };
    let start = Instant::now();
    let summary = roundtrip_batch(&cfg, ROUNDTRIP_CASES, Execution::default());
    within(start.elapsed(), ROUNDTRIP_LIMIT)?;
    check(
        summary.all_passed() && summary.cases == ROUNDTRIP_CASES,
        || {
            format!(
                "{} of {} failed, first {:?}",
                summary.failures.len(),
                summary.cases,
                summary.failures.first()
            )
        },
    )?;
    Ok(format!(
        "{} dialogues in {:?}",
        summary.cases,
        start.elapsed()
    ))
}

fn exhaustive_consensus_sweep() -> Outcome {
    let start = Instant::now();
    let summary = exhaustive_consensus(4, 3, Execution::default());
    within(start.elapsed(), SWEEP_LIMIT)?;
    check(summary.all_passed(), || {
        format!(
            "{} failures, first {:?}",
            summary.failures.len(),
            summary.failures.first()
        )
    })?;
    check(summary.worst_fixed_point_ratio <= ratio(2, 1), || {
        format!("fixed point ratio {}", summary.worst_fixed_point_ratio)
    })?;
    Ok(format!(
        "{} frameworks, {} runs, worst fixed point {}|Ω|, {:?}",
        summary.frameworks,
        summary.runs,
        summary.worst_fixed_point_ratio,
        start.elapsed()
    ))
}

fn obstinate_alternations() -> Outcome {
    let mut sizes = Vec::new();
    for n in 1..=6 {
        let d = Dialogue::new(alternating(&ratio(1, 3), &ratio(2, 3), n), Agent::P)
            .map_err(|e| e.to_string())?;
        let result = rationalize(&d).map_err(|e| format!("n={n}: {e}"))?;
        let report = roundtrip_check(&d);
        check(report.passed(), || format!("n={n}: {report:?}"))?;
        let log = &result.construction_log;
        check(log.len() == d.len(), || {
            format!("n={n}: {} levels", log.len())
        })?;
        for level in log.iter().skip(1) {
            check(
                level.states_after == level.states_before + 2 * level.opener_cells,
                || format!("n={n}: level {level:?}"),
            )?;
        }
        for pair in log.windows(2) {
            check(pair[1].states_before == pair[0].states_after, || {
                format!("n={n}: levels do not chain")
            })?;
        }
        let last = log.last().expect("at least the base level");
        check(last.states_after == result.framework.size(), || {
            format!("n={n}: final size {}", result.framework.size())
        })?;
        sizes.push(result.framework.size().to_string());
    }
    Ok(format!("state counts {}", sizes.join(", ")))
}

fn closure_independence() -> Outcome {
    let cfg = GeneratorConfig::default().with_seed(0xc105);
    let summary = perturbation_batch(&cfg, PERTURBATION_CASES, Execution::default());
    check(
        summary.all_passed() && summary.cases == PERTURBATION_CASES,
        || format!("first failure {:?}", summary.failures.first()),
    )?;
    Ok(format!("{} perturbations", summary.cases))
}

fn format_stability() -> Outcome {
    for name in FIXTURE_NAMES {
        let doc = fixture(name).map_err(|e| e.to_string())?;
        let once = emit_document(&doc);
        let again = parse_matrix(&once).map_err(|e| format!("{name}: {e}"))?;
        check(again == doc && emit_document(&again) == once, || {
            format!("{name} drifts")
        })?;
    }
    let base = GeneratorConfig::default().with_seed(0xf0f0);
    for i in 0..FORMAT_CASES {
        let cfg = case_config(&base, i);
        let fw = gen_random_framework(&cfg);
        let star = (cfg.seed % fw.size() as u64) as usize;
        let text = emit_matrix(&fw, star);
        check(emit_matrix(&fw, star) == text, || {
            format!("case {i}: emission not deterministic")
        })?;
        let doc = parse_matrix(&text).map_err(|e| format!("case {i}: {e}"))?;
        let round = emit_document(&doc);
        let doc2 = parse_matrix(&round).map_err(|e| format!("case {i}: {e}"))?;
        check(round == text && doc2 == doc, || {
            format!("case {i}: {text:?} became {round:?}")
        })?;
    }
    Ok(format!(
        "{} fixtures and {FORMAT_CASES} random grids",
        FIXTURE_NAMES.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("fixture reproduction", fixture_reproduction),
        ("didactic fixture", didactic_fixture),
        ("staged construction", staged_construction),
        ("round trip", random_round_trip),
        ("exhaustive consensus", exhaustive_consensus_sweep),
        ("obstinate alternations", obstinate_alternations),
        ("closure independence", closure_independence),
        ("format stability", format_stability),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
