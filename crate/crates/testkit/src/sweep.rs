//! Batch runners behind the property suites and the harness binary.

use crate::exec::Execution;
use crate::generate::{case_config, gen_random_dialogue, gen_random_framework, GeneratorConfig};
use crate::oracle::{announcement_table, final_opinions, perturb_outside_closure, roundtrip_check};
use dialogue_core::engine::{run_dialogue, run_dialogue_all};
use dialogue_core::model::FrameworkParts;
use dialogue_core::rational::ratio;
use dialogue_core::rationalizer::check_certainty_acquiescence;
use dialogue_core::{Agent, Framework, Rational, StateId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub index: u64,
    pub seed: u64,
    pub detail: String,
}

/// Pass/fail tally of a seeded batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub suite: String,
    pub config: GeneratorConfig,
    pub cases: u64,
    pub passed: u64,
    pub failures: Vec<CaseFailure>,
}

impl BatchSummary {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passed == self.cases
    }

    fn collect(suite: &str, config: GeneratorConfig, results: Vec<Option<CaseFailure>>) -> Self {
        let cases = results.len() as u64;
        let failures: Vec<CaseFailure> = results.into_iter().flatten().collect();
        BatchSummary {
            suite: suite.to_string(),
            config,
            cases,
            passed: cases - failures.len() as u64,
            failures,
        }
    }
}

/// Round-trips `cases` seeded random dialogues through the rationalizer.
pub fn roundtrip_batch(base: &GeneratorConfig, cases: u64, exec: Execution) -> BatchSummary {
    let results = exec.map((0..cases).collect(), |i| {
        let cfg = case_config(base, i);
        let d = gen_random_dialogue(&cfg);
        let report = roundtrip_check(&d);
        (!report.passed()).then(|| CaseFailure {
            index: i,
            seed: cfg.seed,
            detail: format!("{d} (opener {}): {report:?}", d.opener()),
        })
    });
    BatchSummary::collect("roundtrip", *base, results)
}

/// Joins two frameworks side by side; no cell of either spans both.
fn disjoint_union(a: &Framework, b: &Framework) -> Framework {
    let mut parts = a.to_parts();
    let other = b.to_parts();
    let offset = a.size();
    let shift = |cells: Vec<Vec<StateId>>| -> Vec<Vec<StateId>> {
        cells
            .into_iter()
            .map(|c| c.into_iter().map(|s| s + offset).collect())
            .collect()
    };
    parts
        .labels
        .extend(other.labels.into_iter().map(|l| format!("{l}'")));
    parts.prior.extend(other.prior);
    parts
        .event
        .extend(other.event.into_iter().map(|s| s + offset));
    parts.partition_p.extend(shift(other.partition_p));
    parts.partition_q.extend(shift(other.partition_q));
    parts.build().expect("disjoint union of valid frameworks")
}

/// Perturbs frameworks outside the closure of a fixed state and compares
/// transcripts. Each case is a random framework placed beside a second one,
/// so the closure is always a proper subset.
pub fn perturbation_batch(base: &GeneratorConfig, cases: u64, exec: Execution) -> BatchSummary {
    let results = exec.map((0..cases).collect(), |i| {
        let cfg = case_config(base, i);
        let near = gen_random_framework(&cfg);
        let far = gen_random_framework(&case_config(&cfg, u64::MAX));
        let fw = disjoint_union(&near, &far);
        let star = (cfg.seed % near.size() as u64) as StateId;
        let moved = perturb_outside_closure(&fw, star, cfg.seed.rotate_left(17));
        let failure = |detail: String| {
            Some(CaseFailure {
                index: i,
                seed: cfg.seed,
                detail,
            })
        };
        if moved == fw {
            return failure("perturbation changed nothing".into());
        }
        let (before, after) = match (
            run_dialogue(&fw, star, 10_000),
            run_dialogue(&moved, star, 10_000),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => return failure(format!("simulation failed: {:?} / {:?}", a.err(), b.err())),
        };
        let horizon = before.steps.len().max(after.steps.len()) + 2;
        if before.prefix(horizon) != after.prefix(horizon)
            || before.consensus_step != after.consensus_step
        {
            return failure(format!(
                "transcripts differ: {:?} vs {:?}",
                before.transcript(),
                after.transcript()
            ));
        }
        None
    });
    BatchSummary::collect("perturbation", *base, results)
}

/// Totals of the exhaustive small-space consensus sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_states: usize,
    pub mass_grid: Vec<Rational>,
    pub frameworks: u64,
    pub runs: u64,
    /// Longest `fixed_point_step / |Ω|` seen, as a fraction.
    pub worst_fixed_point_ratio: Rational,
    pub failures: Vec<String>,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Positive masses with denominator at most `max_den`, up to 1. Opinions
/// depend only on mass ratios, so larger numerators add nothing new.
pub fn mass_grid(max_den: i64) -> Vec<Rational> {
    let mut grid: Vec<Rational> = (1..=max_den)
        .flat_map(|d| (1..=d).map(move |k| ratio(k, d)))
        .collect();
    grid.sort();
    grid.dedup();
    grid
}

/// Every set partition of `0..n` as cell lists.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<StateId>>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<Vec<StateId>>>) {
        if prefix.len() == n {
            let blocks = prefix.iter().max().map_or(0, |m| m + 1);
            let mut cells = vec![Vec::new(); blocks];
            for (s, &b) in prefix.iter().enumerate() {
                cells[b].push(s);
            }
            out.push(cells);
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

struct SweepCell {
    frameworks: u64,
    runs: u64,
    worst: Rational,
    failures: Vec<String>,
}

fn check_framework(fw: &Framework, cell: &mut SweepCell) {
    let n = fw.size();
    cell.frameworks += 1;
    let table = announcement_table(fw, 2 * n + 2);
    let traces = match run_dialogue_all(fw, 2 * n + 2) {
        Ok(t) => t,
        Err(e) => {
            cell.runs += n as u64;
            cell.failures.push(format!("{fw:?}: {e}"));
            return;
        }
    };
    for (star, trace) in traces.into_iter().enumerate() {
        cell.runs += 1;
        let context = || format!("{fw:?} at {star}");
        if trace.fixed_point_step > 2 * n {
            cell.failures.push(format!(
                "{}: fixed point at step {}",
                context(),
                trace.fixed_point_step
            ));
        }
        let ratio_seen = ratio(trace.fixed_point_step as i64, n as i64);
        if ratio_seen > cell.worst {
            cell.worst = ratio_seen;
        }
        let said: Vec<Rational> = trace.steps.iter().map(|s| s.opinion.clone()).collect();
        if check_certainty_acquiescence(&said).is_err() {
            cell.failures
                .push(format!("{}: acquiescence broken", context()));
        }
        // Independent recount: announcements and final opinions.
        if said.iter().zip(&table).any(|(v, row)| *v != row[star]) {
            cell.failures
                .push(format!("{}: oracle disagrees", context()));
        }
        let (p, q) = final_opinions(&table, fw.opener(), star, 2 * n);
        if p != q || p != trace.consensus_value {
            cell.failures
                .push(format!("{}: final opinions {p} and {q}", context()));
        }
    }
}

/// Checks consensus on every framework with at most `max_states` states,
/// masses from [`mass_grid`], any event, any pair of partitions, either
/// opener and every fixed state.
pub fn exhaustive_consensus(max_states: usize, max_den: i64, exec: Execution) -> SweepSummary {
    let grid = mass_grid(max_den);
    let mut jobs = Vec::new();
    for n in 1..=max_states {
        let partitions = set_partitions(n);
        let mut masses = vec![0usize; n];
        loop {
            jobs.push((n, masses.clone(), partitions.clone()));
            // Odometer over the mass grid.
            let mut i = 0;
            while i < n && masses[i] + 1 == grid.len() {
                masses[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            masses[i] += 1;
        }
    }
    let cells = exec.map(jobs, |(n, masses, partitions)| {
        let mut cell = SweepCell {
            frameworks: 0,
            runs: 0,
            worst: Rational::zero(),
            failures: Vec::new(),
        };
        let prior: Vec<Rational> = masses.iter().map(|&m| grid[m].clone()).collect();
        for bits in 0..(1u32 << n) {
            let event: Vec<StateId> = (0..n).filter(|s| bits >> s & 1 == 1).collect();
            for p in &partitions {
                for q in &partitions {
                    for opener in [Agent::P, Agent::Q] {
                        let fw = FrameworkParts {
                            labels: (0..n).map(|s| s.to_string()).collect(),
                            prior: prior.clone(),
                            event: event.clone(),
                            partition_p: p.clone(),
                            partition_q: q.clone(),
                            opener,
                        }
                        .build()
                        .expect("enumerated frameworks are valid");
                        check_framework(&fw, &mut cell);
                    }
                }
            }
        }
        cell
    });
    let mut summary = SweepSummary {
        max_states,
        mass_grid: grid,
        frameworks: 0,
        runs: 0,
        worst_fixed_point_ratio: Rational::zero(),
        failures: Vec::new(),
    };
    for cell in cells {
        summary.frameworks += cell.frameworks;
        summary.runs += cell.runs;
        if cell.worst > summary.worst_fixed_point_ratio {
            summary.worst_fixed_point_ratio = cell.worst;
        }
        summary.failures.extend(cell.failures);
    }
    summary
}
