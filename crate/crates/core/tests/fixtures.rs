//! Built-in grids: transcripts, refinement narrative, closure and expertise.

use dialogue_core::engine::{
    dialogue_step, is_common_knowledge, is_expert, opinion, reachable_closure, run_dialogue,
    ExpertScope,
};
use dialogue_core::matrix_io::{
    emit_document, emit_matrix, fixture, matrix_to_framework, parse_matrix, FIXTURE_NAMES,
};
use dialogue_core::model::{join_partitions, normalize_measure, EventSet};
use dialogue_core::rational::ratio;
use dialogue_core::{Agent, Framework, Rational, StateId};

fn load(name: &str) -> (Framework, StateId) {
    matrix_to_framework(&fixture(name).unwrap()).unwrap()
}

fn values(pairs: &[(i64, i64)]) -> Vec<Rational> {
    pairs.iter().map(|&(n, d)| ratio(n, d)).collect()
}

/// Label of the state in a given 1-based row and column, first entry.
fn at(fw: &Framework, row: usize, col: usize) -> StateId {
    fw.states()
        .labels()
        .iter()
        .position(|l| l[1..] == format!("{row}.{col}"))
        .unwrap_or_else(|| panic!("no state at {row},{col}"))
}

#[test]
fn example_transcript() {
    let (fw, star) = load("example-5x5");
    let trace = run_dialogue(&fw, star, 100).unwrap();
    assert_eq!(
        trace.transcript(),
        values(&[(1, 4), (1, 4), (1, 4), (1, 4), (3, 4), (3, 4)])
    );
    assert_eq!(trace.consensus_value, ratio(3, 4));
    assert_eq!(trace.consensus_step, 5);
}

#[test]
fn example_first_announcement() {
    let (fw, star) = load("example-5x5");
    // (3/4) / (3/4 + 1/4 + 2)
    assert_eq!(opinion(&fw, Agent::P, star).unwrap(), ratio(1, 4));
    assert_eq!(opinion(&fw, Agent::Q, star).unwrap(), ratio(1, 4));
}

#[test]
fn didactic_transcript_and_expert() {
    let (fw, star) = load("didactic-5x5");
    assert_eq!(opinion(&fw, Agent::P, star).unwrap(), ratio(3, 4));
    let trace = run_dialogue(&fw, star, 100).unwrap();
    assert_eq!(
        trace.transcript(),
        values(&[(3, 4), (1, 4), (3, 4), (1, 4), (3, 4), (3, 4)])
    );
    assert!(is_expert(&fw, Agent::P, star, ExpertScope::OwnCell).unwrap());
    assert!(!is_expert(&fw, Agent::Q, star, ExpertScope::OwnCell).unwrap());
}

#[test]
fn example_p_is_not_expert() {
    let (fw, star) = load("example-5x5");
    assert!(!is_expert(&fw, Agent::P, star, ExpertScope::OwnCell).unwrap());
}

#[test]
fn staged_construction() {
    let expected = [
        ("example-stage-1", values(&[(3, 4), (3, 4)])),
        ("example-stage-2", values(&[(1, 4), (3, 4), (3, 4)])),
        ("example-stage-3", values(&[(1, 4), (1, 4), (3, 4), (3, 4)])),
    ];
    for (name, transcript) in expected {
        let (fw, star) = load(name);
        let trace = run_dialogue(&fw, star, 100).unwrap();
        assert_eq!(trace.transcript(), transcript, "{name}");
    }
}

#[test]
fn example_positive_states_and_total_mass() {
    let doc = fixture("example-5x5").unwrap();
    // Independent count and sum over the parsed grid.
    let positive: Vec<Rational> = doc
        .entries()
        .map(|(_, _, e)| e.mass.clone())
        .filter(Rational::is_positive)
        .collect();
    let total: Rational = positive.iter().sum();
    assert_eq!(positive.len(), 12);
    assert_eq!(total, ratio(44, 3));

    let (fw, _) = load("example-5x5");
    assert_eq!(fw.size(), 12);
    assert_eq!(fw.prior().total(), ratio(44, 3));
    let normalized = normalize_measure(fw.prior()).unwrap();
    assert_eq!(normalized.total(), Rational::one());
    assert_eq!(normalized.mass(0), &(ratio(3, 4) / ratio(44, 3)));
}

#[test]
fn example_join_has_one_two_state_cell() {
    let (fw, star) = load("example-5x5");
    let join = join_partitions(fw.partition_p(), fw.partition_q()).unwrap();
    let big: Vec<&Vec<StateId>> = join.cells().iter().filter(|c| c.len() > 1).collect();
    assert_eq!(big.len(), 1);
    assert!(big[0].contains(&star));
    assert_eq!(join.len(), 11);
}

#[test]
fn example_refinement_narrative() {
    let (fw, star) = load("example-5x5");
    let step1 = dialogue_step(&fw);
    // p's first announcement is 1/4 on every row.
    assert_eq!(step1.partition_q(), fw.partition_q());

    let step2 = dialogue_step(&step1);
    // q's reply separates the last two columns from the first three.
    let row1: Vec<StateId> = step2.partition_p().cell_containing(star).to_vec();
    assert_eq!(row1, fw.partition_p().cell_containing(star));
    let row4_col3 = at(&fw, 4, 3);
    let row4_col5 = at(&fw, 4, 5);
    assert_ne!(
        step2.partition_p().cell_of(row4_col3),
        step2.partition_p().cell_of(row4_col5)
    );
    let row5_col4 = at(&fw, 5, 4);
    let row5_col2 = at(&fw, 5, 2);
    assert_ne!(
        step2.partition_p().cell_of(row5_col4),
        step2.partition_p().cell_of(row5_col2)
    );

    let step3 = dialogue_step(&step2);
    // p's second 1/4 separates the bottom two rows inside the first column
    // block: q's first column loses nothing (rows 4 and 5 are empty there)
    // but columns 2 and 3 split off their bottom-row states.
    let col2_row5 = at(&fw, 5, 2);
    let col2_row2 = at(&fw, 2, 2);
    assert_ne!(
        step3.partition_q().cell_of(col2_row5),
        step3.partition_q().cell_of(col2_row2)
    );
    let col3_row4 = at(&fw, 4, 3);
    let col3_row1 = at(&fw, 1, 3);
    assert_ne!(
        step3.partition_q().cell_of(col3_row4),
        step3.partition_q().cell_of(col3_row1)
    );
    assert_eq!(opinion(&step3, Agent::Q, star).unwrap(), ratio(1, 4));

    let step4 = dialogue_step(&step3);
    // q's third 1/4 rules out columns 2 and 3 for p's top row.
    let p_cell = step4.partition_p().cell_containing(star);
    assert_eq!(p_cell.len(), 2);
    assert_eq!(opinion(&step4, Agent::P, star).unwrap(), ratio(3, 4));
}

#[test]
fn example_closure_and_common_knowledge() {
    let (fw, star) = load("example-5x5");
    let closure = reachable_closure(&fw, star).unwrap();
    assert_eq!(closure.members.len(), 12);
    assert!(is_common_knowledge(&fw, &closure.members, star));
    assert!(is_common_knowledge(&fw, &EventSet::full(fw.size()), star));
    let top_left = EventSet::from_states(fw.size(), [at(&fw, 1, 1), at(&fw, 1, 1) + 1]);
    assert!(!is_common_knowledge(&fw, &top_left, star));
}

#[test]
fn fixtures_validate_and_round_trip() {
    for name in FIXTURE_NAMES {
        let doc = fixture(name).unwrap();
        let canonical = emit_document(&doc);
        let reparsed = parse_matrix(&canonical).unwrap();
        assert_eq!(reparsed, doc, "{name}");
        assert_eq!(emit_document(&reparsed), canonical, "{name}");
        let (fw, star) = matrix_to_framework(&doc).unwrap();
        assert!(fw.validate().is_ok(), "{name}");

        let emitted = emit_matrix(&fw, star);
        let (again, again_star) = matrix_to_framework(&parse_matrix(&emitted).unwrap()).unwrap();
        assert_eq!(emit_matrix(&again, again_star), emitted, "{name}");
        for s in 0..fw.size() {
            let a = run_dialogue(&fw, s, 100).unwrap();
            let b = run_dialogue(&again, s, 100).unwrap();
            assert_eq!(a.transcript(), b.transcript(), "{name} state {s}");
        }
    }
}

#[test]
fn canonical_example_text() {
    let doc = fixture("example-5x5").unwrap();
    assert_eq!(
        emit_document(&doc),
        "*y[3/4],n[1/4] | y[0] | n[2] | y[0] | n[0]\n\
         y[0] | y[1/4] | n[3/4] | y[0] | n[0]\n\
         n[2] | y[2/3] | n[0] | y[0] | n[0]\n\
         y[0] | y[0] | y[1] | y[0] | n[3]\n\
         n[0] | n[11/4] | n[1/4] | y[1] | n[0]\n"
    );
}
