//! Oracles that check the library against independently coded reference
//! computations.

use dialogue_core::engine::{reachable_closure, run_dialogue};
use dialogue_core::rationalizer::{check_certainty_acquiescence, construct};
use dialogue_core::{Agent, Dialogue, Framework, Rational, StateId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Announcements at `omega_star` for steps `1..=steps`, computed by
/// relabelling states rather than through the engine's partitions.
pub fn announcements(fw: &Framework, omega_star: StateId, steps: usize) -> Vec<Rational> {
    announcement_table(fw, steps)
        .into_iter()
        .map(|mut row| row.swap_remove(omega_star))
        .collect()
}

/// Row `t` holds the speaker's opinion at every state on step `t + 1`.
///
/// Each agent's knowledge is a label per state; two states are
/// indistinguishable to an agent iff their labels agree. After an
/// announcement the listener's label becomes the pair (old label, speaker's
/// opinion at that state).
pub fn announcement_table(fw: &Framework, steps: usize) -> Vec<Vec<Rational>> {
    let n = fw.size();
    let mut labels = [
        (0..n)
            .map(|s| fw.partition_p().cell_of(s))
            .collect::<Vec<_>>(),
        (0..n)
            .map(|s| fw.partition_q().cell_of(s))
            .collect::<Vec<_>>(),
    ];
    let index = |a: Agent| usize::from(a == Agent::Q);
    let mut speaker = fw.opener();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let own = &labels[index(speaker)];
        let values = opinions_by_label(fw, own);
        out.push(own.iter().map(|&l| values[l].clone()).collect());
        let listener = &labels[index(speaker.other())];
        let mut seen: Vec<(usize, &Rational)> = Vec::new();
        let mut relabelled = Vec::with_capacity(n);
        for s in 0..n {
            let key = (listener[s], &values[own[s]]);
            let id = seen.iter().position(|k| *k == key).unwrap_or_else(|| {
                seen.push(key);
                seen.len() - 1
            });
            relabelled.push(id);
        }
        labels[index(speaker.other())] = relabelled;
        speaker = speaker.other();
    }
    out
}

/// Both agents' opinions at `omega_star` after `steps` announcements, read
/// off a table of at least `steps + 2` rows.
pub fn final_opinions(
    table: &[Vec<Rational>],
    opener: Agent,
    omega_star: StateId,
    steps: usize,
) -> (Rational, Rational) {
    let first = table[steps][omega_star].clone();
    let second = table[steps + 1][omega_star].clone();
    // Step `steps + 1` is spoken by the opener iff `steps` is even.
    if steps.is_multiple_of(2) == (opener == Agent::P) {
        (first, second)
    } else {
        (second, first)
    }
}

fn opinions_by_label(fw: &Framework, labels: &[usize]) -> Vec<Rational> {
    let cells = labels.iter().max().map_or(0, |m| m + 1);
    let mut hit = vec![Rational::zero(); cells];
    let mut all = vec![Rational::zero(); cells];
    for (s, &l) in labels.iter().enumerate() {
        let m = fw.prior().mass(s);
        all[l] = &all[l] + m;
        if fw.event().contains(s) {
            hit[l] = &hit[l] + m;
        }
    }
    hit.into_iter().zip(all).map(|(h, a)| h / a).collect()
}

/// Outcome of a rationalization round trip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RoundtripReport {
    Pass {
        states: usize,
        consensus_step: usize,
    },
    /// The input violates certainty acquiescence; nothing was built.
    Rejected { index: usize },
    /// The construction itself failed.
    ConstructionFailed { detail: String },
    /// Announcement `step` (1-based) differs from the dialogue.
    Diverged {
        step: usize,
        expected: Rational,
        found: Rational,
    },
    /// The transcript leaves the last opinion at or after `step`.
    TailNotConstant { step: usize, found: Rational },
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        matches!(self, RoundtripReport::Pass { .. })
    }
}

/// Builds a framework for `d` and checks, by simulation, that its dialogue
/// starts with `d` and never leaves `b_T` from step `T` on.
pub fn roundtrip_check(d: &Dialogue) -> RoundtripReport {
    if let Err(v) = check_certainty_acquiescence(d.opinions()) {
        return RoundtripReport::Rejected { index: v.index + 1 };
    }
    let built = match construct(d) {
        Ok(r) => r,
        Err(e) => {
            return RoundtripReport::ConstructionFailed {
                detail: e.to_string(),
            }
        }
    };
    let fw = &built.framework;
    let star = built.omega_star;
    let t = d.len();

    let head = announcements(fw, star, t + 2);
    for (i, expected) in d.opinions().iter().enumerate() {
        if &head[i] != expected {
            return RoundtripReport::Diverged {
                step: i + 1,
                expected: expected.clone(),
                found: head[i].clone(),
            };
        }
    }

    let trace = match run_dialogue(fw, star, 2 * fw.size() + 2) {
        Ok(trace) => trace,
        Err(e) => {
            return RoundtripReport::ConstructionFailed {
                detail: e.to_string(),
            }
        }
    };
    let last = d.last();
    let horizon = trace.steps.len().max(t) + 2;
    for step in t..=horizon {
        let found = trace.announcement(step);
        if found != last {
            return RoundtripReport::TailNotConstant {
                step,
                found: found.clone(),
            };
        }
    }
    // The engine and the relabelling oracle must agree on the overlap.
    for (i, v) in head.iter().enumerate() {
        if trace.announcement(i + 1) != v {
            return RoundtripReport::Diverged {
                step: i + 1,
                expected: v.clone(),
                found: trace.announcement(i + 1).clone(),
            };
        }
    }
    RoundtripReport::Pass {
        states: fw.size(),
        consensus_step: trace.consensus_step,
    }
}

/// Re-draws the masses and both partitions on the states outside the
/// common-knowledge closure of `omega_star`. Returns `fw` unchanged when
/// the closure is everything.
pub fn perturb_outside_closure(fw: &Framework, omega_star: StateId, seed: u64) -> Framework {
    let closure = reachable_closure(fw, omega_star)
        .expect("fixed state within the framework")
        .members;
    if closure.len() == fw.size() {
        return fw.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = fw.to_parts();
    let mut outside: Vec<StateId> = (0..fw.size()).filter(|&s| !closure.contains(s)).collect();
    for &s in &outside {
        let den = rng.random_range(1..=12i64);
        parts.prior[s] = Rational::new(rng.random_range(1..=24i64), den);
    }
    let inside_cells = |cells: &[Vec<StateId>]| -> Vec<Vec<StateId>> {
        cells
            .iter()
            .filter(|c| closure.contains(c[0]))
            .cloned()
            .collect()
    };
    let mut p = inside_cells(fw.partition_p().cells());
    let mut q = inside_cells(fw.partition_q().cells());
    for cells in [&mut p, &mut q] {
        outside.shuffle(&mut rng);
        let mut rest = outside.as_slice();
        while !rest.is_empty() {
            let take = rng.random_range(1..=rest.len());
            cells.push(rest[..take].to_vec());
            rest = &rest[take..];
        }
    }
    parts.partition_p = p;
    parts.partition_q = q;
    parts
        .build()
        .expect("closure is a union of cells of both partitions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use dialogue_core::rational::ratio;
    use dialogue_core::rationalizer::rationalize_base;

    #[test]
    fn oracle_matches_a_two_state_hand_computation() {
        let r = rationalize_base(&ratio(1, 3), Agent::P).unwrap();
        assert_eq!(
            announcements(&r.framework, r.omega_star, 3),
            vec![ratio(1, 3); 3]
        );
    }

    #[test]
    fn acquiescence_violations_are_rejected() {
        let d = Dialogue::new(vec![ratio(1, 2), ratio(1, 1), ratio(1, 2)], Agent::P).unwrap();
        assert_eq!(roundtrip_check(&d), RoundtripReport::Rejected { index: 2 });
    }

    #[test]
    fn full_closure_is_left_alone() {
        let r = rationalize_base(&ratio(1, 2), Agent::P).unwrap();
        assert_eq!(
            perturb_outside_closure(&r.framework, r.omega_star, 7),
            r.framework
        );
    }

    #[test]
    fn singleton_closure_keeps_certain_denial() {
        let r = rationalize_base(&ratio(0, 1), Agent::P).unwrap();
        let before = announcements(&r.framework, r.omega_star, 4);
        assert_eq!(before, vec![Rational::zero(); 4]);
        for seed in 0..20 {
            let moved = perturb_outside_closure(&r.framework, r.omega_star, seed);
            assert_eq!(
                moved.prior().mass(r.omega_star),
                r.framework.prior().mass(r.omega_star)
            );
            assert_eq!(announcements(&moved, r.omega_star, 4), before);
        }
    }
}
