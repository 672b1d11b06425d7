use std::io::Write;

use anyhow::{Context, Result};
use cpmaps::{Seed, Tolerances};
use serde::Serialize;

use crate::config::{Command, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Debug, Default)]
pub struct Checks(Vec<Check>);

impl Checks {
    pub fn add(&mut self, name: &'static str, passed: bool) {
        self.0.push(Check { name, passed });
    }

    pub fn all_passed(&self) -> bool {
        self.0.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.0.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn into_vec(self) -> Vec<Check> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violation,
}

impl Status {
    pub fn from_pass(passed: bool) -> Self {
        if passed {
            Status::Ok
        } else {
            Status::Violation
        }
    }
}

/// Common wrapper around every command's report.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub command: Command,
    pub status: Status,
    pub seed: Seed,
    pub tolerances: Tolerances,
    pub input_digest: Option<String>,
    pub checks: Vec<Check>,
    pub report: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(cfg: &RunConfig, digest: Option<String>, checks: Checks, report: T) -> Self {
        Envelope {
            command: cfg.command,
            status: Status::from_pass(checks.all_passed()),
            seed: cfg.seed,
            tolerances: cfg.tolerances,
            input_digest: digest,
            checks: checks.into_vec(),
            report,
        }
    }
}

/// Writes `value` as pretty JSON to `--output`, or to stdout when no path is given.
pub fn emit(cfg: &RunConfig, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
