use thiserror::Error;

use super::{parse_matrix, MatrixDocument};

/// Names of the built-in grids, in catalog order.
pub const FIXTURE_NAMES: [&str; 5] = [
    "example-5x5",
    "didactic-5x5",
    "example-stage-1",
    "example-stage-2",
    "example-stage-3",
];

// Dialogue (1/4, 1/4, 1/4, 1/4, 3/4, 3/4) with p opening.
const EXAMPLE_5X5: &str = "\
*y[3/4],n[1/4] | y[0] | n[2] | y[0] | n[0]
y[0] | y[1/4] | n(3/4) | y[0] | n[0]
n[2] | y[2/3] | n[0] | y[0] | n[0]
y[0] | y[0] | y[1] | y[0] | n[3]
n[0] | n[11/4] | n[1/4] | y[1] | n[0]
";

// p is the expert: (3/4, 1/4, 3/4, 1/4, 3/4, 3/4).
const DIDACTIC_5X5: &str = "\
*y[3/4],n[1/4] | y[0] | n[0] | y[0] | n[0]
y[0] | y[3/4] | n(1/4) | y[0] | n[0]
n[2] | y[6] | n[0] | y[0] | n[0]
y[0] | y[0] | y[1/12] | y[0] | n[1/36]
n[0] | n[81/4] | n[0] | y[243/4] | n[0]
";

// The top-left cell alone: (3/4, 3/4).
const EXAMPLE_STAGE_1: &str = "\
*y[3/4],n[1/4]
";

// First column; q opens: (1/4, 3/4, 3/4).
const EXAMPLE_STAGE_2: &str = "\
# opener: q
*y[3/4],n[1/4]
y[0]
n[2]
";

// First three rows and columns: (1/4, 1/4, 3/4, 3/4).
const EXAMPLE_STAGE_3: &str = "\
*y[3/4],n[1/4] | y[0] | n[2]
y[0] | y[1/4] | n(3/4)
n[2] | y[2/3] | n[0]
";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fixture `{0}`")]
pub struct UnknownFixture(pub String);

/// Raw text of a built-in grid, as transcribed.
pub fn fixture_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "example-5x5" => EXAMPLE_5X5,
        "didactic-5x5" => DIDACTIC_5X5,
        "example-stage-1" => EXAMPLE_STAGE_1,
        "example-stage-2" => EXAMPLE_STAGE_2,
        "example-stage-3" => EXAMPLE_STAGE_3,
        _ => return None,
    })
}

pub fn fixture(name: &str) -> Result<MatrixDocument, UnknownFixture> {
    let text = fixture_text(name).ok_or_else(|| UnknownFixture(name.to_string()))?;
    Ok(parse_matrix(text).expect("built-in fixtures parse"))
}

pub fn builtin_fixtures() -> Vec<(&'static str, MatrixDocument)> {
    FIXTURE_NAMES
        .iter()
        .map(|&name| (name, fixture(name).expect("catalog names resolve")))
        .collect()
}
