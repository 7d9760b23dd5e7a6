//! Scenarios shipped with the binary.

use std::path::Path;

use crate::error::CliError;
use crate::scenario::Scenario;

pub const BUNDLED: [(&str, &str); 18] = [
    ("s2-rotation", include_str!("../scenarios/s2-rotation.json")),
    ("s2-height", include_str!("../scenarios/s2-height.json")),
    ("s2-radius-3", include_str!("../scenarios/s2-radius-3.json")),
    ("s4-round", include_str!("../scenarios/s4-round.json")),
    ("flat-torus-constant", include_str!("../scenarios/flat-torus-constant.json")),
    ("embedded-torus-gradient", include_str!("../scenarios/embedded-torus-gradient.json")),
    ("disk-radial-out", include_str!("../scenarios/disk-radial-out.json")),
    ("disk-radial-in", include_str!("../scenarios/disk-radial-in.json")),
    ("disk-rotation", include_str!("../scenarios/disk-rotation.json")),
    ("disk-constant-field", include_str!("../scenarios/disk-constant-field.json")),
    ("disk-saddle", include_str!("../scenarios/disk-saddle.json")),
    ("ball4-radial-out", include_str!("../scenarios/ball4-radial-out.json")),
    ("ball4-radial-in", include_str!("../scenarios/ball4-radial-in.json")),
    ("ball4-rotation", include_str!("../scenarios/ball4-rotation.json")),
    ("excision-three-zeros", include_str!("../scenarios/excision-three-zeros.json")),
    ("ball4-quaternion-square", include_str!("../scenarios/ball4-quaternion-square.json")),
    ("hedgehog-k1", include_str!("../scenarios/hedgehog-k1.json")),
    ("hedgehog-k2", include_str!("../scenarios/hedgehog-k2.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Option<Result<Scenario, CliError>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_json(text))
}

pub fn all() -> Result<Vec<Scenario>, CliError> {
    BUNDLED.iter().map(|(_, text)| Scenario::from_json(text)).collect()
}

/// A scenario argument: an existing file path, otherwise a bundled name.
pub fn resolve(arg: &str) -> Result<Scenario, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        return Scenario::from_json(&text);
    }
    get(arg).unwrap_or_else(|| Err(CliError::UnknownScenario(arg.to_string())))
}
