//! Scenario files: JSON documents with `region`, `tasks`, `uavs`, `gcss`,
//! `nfzs` and `dependencies` sections. Unknown fields are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scenario::{validate_scenario, MissionScenario, ScenarioIssue};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {}", summary(.0))]
    Invalid(Vec<ScenarioIssue>),
}

fn summary(issues: &[ScenarioIssue]) -> String {
    issues
        .iter()
        .map(|i| i.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<MissionScenario, IoError> {
    let scenario: MissionScenario = serde_json::from_str(text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let issues = validate_scenario(&scenario);
    if issues.is_empty() {
        Ok(scenario)
    } else {
        Err(IoError::Invalid(issues))
    }
}

/// Pretty JSON with a trailing newline.
pub fn scenario_to_string(scenario: &MissionScenario) -> String {
    let mut s = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    s.push('\n');
    s
}

pub fn load_scenario(path: &Path) -> Result<MissionScenario, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn save_scenario(path: &Path, scenario: &MissionScenario) -> Result<(), IoError> {
    fs::write(path, scenario_to_string(scenario)).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}
