//! File IO that remembers what it touched, and the run manifest written at exit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<stadisc::Error> for CliError {
    fn from(e: stadisc::Error) -> Self {
        use stadisc::Error::*;
        match e {
            Divergence { .. }
            | UnderResolved(_)
            | ContinuationFailure { .. }
            | DegenerateFibration { .. }
            | SingularDifferential { .. }
            | NotOnFibration(_)
            | NormalMisalignment(_)
            | Domain { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Inputs, outputs and residuals of one invocation.
#[derive(Debug, Default)]
pub struct Run {
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    residuals: BTreeMap<String, f64>,
}

impl Run {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), hex(&bytes));
        Ok(bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(path, bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(path, text.as_bytes())
    }

    /// Writes a CSV file with a header row.
    pub fn write_csv(&mut self, path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        self.write(path, &bytes)
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    pub fn manifest(&self, command: &str, seed: u64, options: serde_json::Value, outcome: &Result<(), CliError>) -> Manifest {
        let joined: String = self.inputs.values().map(|h| format!("{h}\n")).collect();
        Manifest {
            command: command.to_string(),
            seed,
            options,
            inputs: self.inputs.clone(),
            inputs_hash: hex(joined.as_bytes()),
            outputs: self.outputs.clone(),
            versions: BTreeMap::from([("stadisc-cli", env!("CARGO_PKG_VERSION")), ("stadisc-core", stadisc::VERSION)]),
            residuals: self.residuals.clone(),
            status: match outcome {
                Ok(()) => "ok".to_string(),
                Err(e) => e.to_string(),
            },
            exit_code: outcome.as_ref().err().map_or(0, CliError::exit_code),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub options: serde_json::Value,
    /// SHA-256 of every file read.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of the per-file digests in path order.
    pub inputs_hash: String,
    pub outputs: Vec<String>,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub residuals: BTreeMap<String, f64>,
    pub status: String,
    pub exit_code: i32,
}
