use dialogue_core::engine::{opinion, run_dialogue};
use dialogue_core::matrix_io::{emit_matrix, matrix_to_framework, parse_matrix};
use dialogue_core::model::{join_partitions, normalize_measure, FrameworkParts, Partition};
use dialogue_core::rational::ratio;
use dialogue_core::rationalizer::{check_certainty_acquiescence, rationalize};
use dialogue_core::{Agent, Dialogue, Framework, Rational};
use proptest::prelude::*;

/// Every set partition of `0..n`, via restricted growth strings.
fn all_partitions(n: usize) -> Vec<Partition> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            let blocks = prefix.iter().max().map_or(0, |m| m + 1);
            let mut cells = vec![Vec::new(); blocks];
            for (s, &b) in prefix.iter().enumerate() {
                cells[b].push(s);
            }
            out.push(Partition::new(n, cells).unwrap());
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

#[test]
fn partition_enumeration_counts_are_bell_numbers() {
    let counts: Vec<usize> = (1..=6).map(|n| all_partitions(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 5, 15, 52, 203]);
}

#[test]
fn join_is_the_coarsest_common_refinement() {
    for n in 1..=6 {
        let parts = all_partitions(n);
        for a in &parts {
            for b in &parts {
                let j = join_partitions(a, b).unwrap();
                assert!(j.refines(a) && j.refines(b));
                // Pairwise characterization: same join cell iff same cell in both.
                for s in 0..n {
                    for t in 0..n {
                        let together = a.cell_of(s) == a.cell_of(t) && b.cell_of(s) == b.cell_of(t);
                        assert_eq!(j.cell_of(s) == j.cell_of(t), together);
                    }
                }
                if n <= 5 {
                    for c in parts.iter().filter(|c| c.refines(a) && c.refines(b)) {
                        assert!(c.refines(&j));
                    }
                }
            }
        }
    }
}

fn cells_from_labels(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (s, &l) in labels.iter().enumerate() {
        let id = *index.entry(l).or_insert_with(|| {
            cells.push(Vec::new());
            cells.len() - 1
        });
        cells[id].push(s);
    }
    cells
}

prop_compose! {
    fn arb_framework(max_states: usize)(n in 1..=max_states)(
        masses in prop::collection::vec((1i64..=9, 1i64..=6), n),
        p_labels in prop::collection::vec(0..n, n),
        q_labels in prop::collection::vec(0..n, n),
        event in prop::collection::vec(any::<bool>(), n),
        q_opens in any::<bool>(),
    ) -> Framework {
        FrameworkParts {
            labels: (0..masses.len()).map(|s| format!("s{s}")).collect(),
            prior: masses.iter().map(|&(a, b)| ratio(a, b)).collect(),
            event: event.iter().enumerate().filter_map(|(s, &e)| e.then_some(s)).collect(),
            partition_p: cells_from_labels(&p_labels),
            partition_q: cells_from_labels(&q_labels),
            opener: if q_opens { Agent::Q } else { Agent::P },
        }
        .build()
        .unwrap()
    }
}

fn arb_dialogue() -> impl Strategy<Value = Dialogue> {
    (
        prop::collection::vec((0i64..=12, 1i64..=12), 1..=7),
        any::<bool>(),
    )
        .prop_map(|(raw, q_opens)| {
            let mut values: Vec<Rational> = raw.iter().map(|&(a, b)| ratio(a.min(b), b)).collect();
            if let Some(k) = values.iter().position(Rational::is_certain) {
                let v = values[k].clone();
                for x in &mut values[k..] {
                    *x = v.clone();
                }
            }
            Dialogue::new(values, if q_opens { Agent::Q } else { Agent::P }).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalization_preserves_opinions(fw in arb_framework(8)) {
        let normalized = normalize_measure(fw.prior()).unwrap();
        prop_assert_eq!(normalized.total(), Rational::one());
        let factor = normalized.mass(0).clone() / fw.prior().mass(0).clone();
        let scaled = fw.with_scaled_prior(&factor);
        prop_assert_eq!(scaled.prior(), &normalized);
        for s in 0..fw.size() {
            for agent in [Agent::P, Agent::Q] {
                prop_assert_eq!(opinion(&fw, agent, s).unwrap(), opinion(&scaled, agent, s).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn traces_are_monotone_and_agree(fw in arb_framework(10)) {
        let n = fw.size();
        for star in 0..n {
            let trace = run_dialogue(&fw, star, 10_000).unwrap();
            prop_assert!(trace.fixed_point_step <= 2 * n);
            prop_assert!(trace.consensus_step <= trace.fixed_point_step);
            let mut prev_p = fw.partition_p().clone();
            let mut prev_q = fw.partition_q().clone();
            for (i, step) in trace.steps.iter().enumerate() {
                prop_assert_eq!(step.step, i + 1);
                prop_assert_eq!(step.speaker, trace.speaker(i + 1));
                prop_assert!(step.partition_p.refines(&prev_p));
                prop_assert!(step.partition_q.refines(&prev_q));
                prop_assert!(step.partition_p.len() <= n && step.partition_q.len() <= n);
                prev_p = step.partition_p.clone();
                prev_q = step.partition_q.clone();
            }
            let announced: Vec<Rational> = trace.steps.iter().map(|s| s.opinion.clone()).collect();
            prop_assert!(check_certainty_acquiescence(&announced).is_ok());
            prop_assert!(check_certainty_acquiescence(&trace.transcript()).is_ok());
        }
    }

    #[test]
    fn traces_depend_only_on_measure_ratios(fw in arb_framework(8), a in 1i64..20, b in 1i64..20) {
        let scaled = fw.with_scaled_prior(&ratio(a, b));
        for star in 0..fw.size() {
            prop_assert_eq!(
                run_dialogue(&fw, star, 1000).unwrap(),
                run_dialogue(&scaled, star, 1000).unwrap()
            );
        }
    }

    #[test]
    fn emitted_grids_reparse_canonically(fw in arb_framework(9), star_seed in 0usize..100) {
        let star = star_seed % fw.size();
        let text = emit_matrix(&fw, star);
        let (again, again_star) = matrix_to_framework(&parse_matrix(&text).unwrap()).unwrap();
        prop_assert_eq!(emit_matrix(&again, again_star), text);
        prop_assert_eq!(again.size(), fw.size());
        prop_assert_eq!(
            run_dialogue(&fw, star, 1000).unwrap().transcript(),
            run_dialogue(&again, again_star, 1000).unwrap().transcript()
        );
    }

    #[test]
    fn rationalize_reproduces_dialogues(d in arb_dialogue()) {
        let result = rationalize(&d).unwrap();
        prop_assert!(result.framework.validate().is_ok());
        prop_assert!(result.framework.prior().masses().iter().all(Rational::is_positive));
        let trace = run_dialogue(&result.framework, result.omega_star, 10_000).unwrap();
        prop_assert_eq!(trace.prefix(d.len()), d.opinions().to_vec());
        prop_assert!(trace.consensus_step <= d.len());
        prop_assert_eq!(&trace.consensus_value, d.last());
        for level in result.construction_log.iter().skip(1) {
            prop_assert_eq!(level.states_after, level.states_before + 2 * level.opener_cells);
        }
        prop_assert_eq!(rationalize(&d).unwrap(), result);
    }
}
