//! Resolution of command-line inputs: files, fixture names and inline text.

use std::fs;
use std::path::{Path, PathBuf};

use dialogue_core::matrix_io::{fixture_text, parse_matrix, MatrixDocument, FIXTURE_NAMES};

/// Directory whose `<name>.txt` files shadow and extend the built-in
/// fixtures.
pub const FIXTURE_DIR_VAR: &str = "RATDIAL_FIXTURE_DIR";

fn override_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURE_DIR_VAR).map(PathBuf::from)
}

fn override_path(name: &str) -> Option<PathBuf> {
    let valid = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !valid {
        return None;
    }
    let path = override_dir()?.join(format!("{name}.txt"));
    path.is_file().then_some(path)
}

/// Fixture names, built-ins first, then extra files from the override
/// directory in lexical order.
pub fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> = FIXTURE_NAMES.iter().map(|s| s.to_string()).collect();
    if let Some(dir) = override_dir() {
        let mut extra: Vec<String> = fs::read_dir(dir)
            .into_iter()
            .flatten()
            .flatten()
            .filter_map(|e| {
                let path = e.path();
                (path.extension()? == "txt")
                    .then(|| path.file_stem()?.to_str().map(str::to_string))
                    .flatten()
            })
            .filter(|n| !names.contains(n))
            .collect();
        extra.sort();
        names.extend(extra);
    }
    names
}

/// Text of a named fixture, if there is one.
pub fn fixture_source(name: &str) -> Option<Result<String, String>> {
    if let Some(path) = override_path(name) {
        return Some(read(&path));
    }
    fixture_text(name).map(|t| Ok(t.to_string()))
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Input text and a name for diagnostics. An existing file wins, then a
/// fixture name, and anything else is taken as the text itself.
pub fn resolve(arg: &str) -> Result<(String, String), String> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok((read(path)?, arg.to_string()));
    }
    if let Some(text) = fixture_source(arg) {
        return Ok((text?, arg.to_string()));
    }
    Ok((arg.to_string(), "<inline>".to_string()))
}

pub fn load_matrix(arg: &str) -> Result<MatrixDocument, String> {
    let (text, origin) = resolve(arg)?;
    parse_matrix(&text).map_err(|e| {
        if origin == "<inline>" && !arg.contains(['[', '(']) {
            format!("`{arg}` is not a file, a fixture name or a grid")
        } else {
            format!("{origin}: {e}")
        }
    })
}
