//! Scenario files, presets and run artifacts.

mod artifacts;
mod presets;

use std::path::Path;

use thiserror::Error;

use crate::sim::{ConfigError, Scenario};

pub use artifacts::{emit_artifacts, format_sig, manifest_text, RunArtifacts};
pub use presets::{desk, desk_coverage_limited, heavy_traffic, preset, PRESETS};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ConfigError),
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a scenario document.
pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        ScenarioError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

/// Full scenario document with every default spelled out.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario is always representable")
}
