//! Seeded generators. Every output is a pure function of the
//! [`GeneratorConfig`], seed included.

use dialogue_core::model::FrameworkParts;
use dialogue_core::rational::ratio;
use dialogue_core::{Agent, Dialogue, Framework, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub max_states: usize,
    pub max_denominator: u32,
    pub max_dialogue_length: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_states: 12,
            max_denominator: 12,
            max_dialogue_length: 8,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        GeneratorConfig { seed, ..self }
    }

    fn rng(&self) -> ChaCha8Rng {
        assert!(
            self.max_states >= 1 && self.max_denominator >= 1 && self.max_dialogue_length >= 1,
            "generator bounds must be at least 1"
        );
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// SplitMix64 finalizer; spreads consecutive case indices over the seed
/// space.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Configuration for case `index` of a batch seeded with `base.seed`.
pub fn case_config(base: &GeneratorConfig, index: u64) -> GeneratorConfig {
    base.with_seed(mix(base.seed ^ mix(index)))
}

fn random_partition(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for s in 0..n {
        let label = rng.random_range(0..n);
        if slot[label] == usize::MAX {
            slot[label] = cells.len();
            cells.push(Vec::new());
        }
        cells[slot[label]].push(s);
    }
    cells
}

/// A valid framework with at most `max_states` states and positive masses
/// `k/d`, `1 <= k, d <= max_denominator`.
pub fn gen_random_framework(cfg: &GeneratorConfig) -> Framework {
    let mut rng = cfg.rng();
    let n = rng.random_range(1..=cfg.max_states);
    let den = i64::from(cfg.max_denominator);
    let prior = (0..n)
        .map(|_| ratio(rng.random_range(1..=den), rng.random_range(1..=den)))
        .collect();
    let event = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    let partition_p = random_partition(&mut rng, n);
    let partition_q = random_partition(&mut rng, n);
    let opener = if rng.random_bool(0.5) {
        Agent::P
    } else {
        Agent::Q
    };
    FrameworkParts {
        labels: (0..n).map(|s| format!("s{s}")).collect(),
        prior,
        event,
        partition_p,
        partition_q,
        opener,
    }
    .build()
    .expect("generated frameworks are valid by construction")
}

/// `(c, d, c, d, ...)` for `n` entries, then `(c, c)`.
pub fn alternating(c: &Rational, d: &Rational, n: usize) -> Vec<Rational> {
    let mut out: Vec<Rational> = (0..n)
        .map(|i| if i % 2 == 0 { c.clone() } else { d.clone() })
        .collect();
    out.extend([c.clone(), c.clone()]);
    out
}

/// `(1-e, e, 1-e, ...)` of length `len`.
pub fn near_certain_oscillation(epsilon: &Rational, len: usize) -> Vec<Rational> {
    let high = Rational::one() - epsilon;
    (0..len)
        .map(|i| {
            if i % 2 == 0 {
                high.clone()
            } else {
                epsilon.clone()
            }
        })
        .collect()
}

fn random_opinion(rng: &mut impl Rng, max_den: i64) -> Rational {
    let d = rng.random_range(1..=max_den);
    ratio(rng.random_range(0..=d), d)
}

fn random_interior(rng: &mut impl Rng, max_den: i64) -> Rational {
    if max_den < 2 {
        // No interior value has denominator 1.
        return ratio(1, 2);
    }
    let d = rng.random_range(2..=max_den);
    ratio(rng.random_range(1..d), d)
}

/// A dialogue satisfying certainty acquiescence. One in five samples comes
/// from a boundary family: constant, obstinate alternation, or near-certain
/// oscillation.
pub fn gen_random_dialogue(cfg: &GeneratorConfig) -> Dialogue {
    let mut rng = cfg.rng();
    let max_den = i64::from(cfg.max_denominator);
    let max_len = cfg.max_dialogue_length;
    let opener = if rng.random_bool(0.5) {
        Agent::P
    } else {
        Agent::Q
    };
    let values = if rng.random_bool(0.2) {
        match rng.random_range(0..3) {
            0 => {
                let len = rng.random_range(1..=max_len);
                vec![random_opinion(&mut rng, max_den); len]
            }
            1 if max_len >= 3 => {
                let c = random_interior(&mut rng, max_den);
                let d = random_interior(&mut rng, max_den);
                let n = rng.random_range(1..=max_len - 2);
                alternating(&c, &d, n)
            }
            _ => {
                let len = rng.random_range(1..=max_len);
                near_certain_oscillation(&ratio(1, max_den.max(2)), len)
            }
        }
    } else {
        let len = rng.random_range(1..=max_len);
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            let next = match values.last() {
                Some(prev) if Rational::is_certain(prev) => Rational::clone(prev),
                _ => random_opinion(&mut rng, max_den),
            };
            values.push(next);
        }
        values
    };
    Dialogue::new(values, opener).expect("generated opinions lie in [0,1]")
}
