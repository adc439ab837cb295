//! JSON manifest written next to every run's artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST_FORMAT: &str = "tiltwalk-manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// A file read or written by the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub role: String,
    /// `-` for standard output.
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheInfo {
    /// `hit`, `miss`, `corrupt` or `disabled`.
    pub status: String,
    pub key: String,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    /// Resolved configuration; rerunning it reproduces every output.
    pub config: RunConfig,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub cache: Option<CacheInfo>,
    pub timings: Vec<Timing>,
    pub verdicts: Vec<Verdict>,
    /// Which oriented-tree numerator the enumeration selected, when checked.
    pub oriented_verdict: Option<serde_json::Value>,
    pub summary: serde_json::Value,
    pub exit_code: i32,
}

impl Manifest {
    pub fn new(command: crate::Command, config: RunConfig) -> Self {
        Manifest {
            format: MANIFEST_FORMAT.into(),
            format_version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.name().into(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            cache: None,
            timings: Vec::new(),
            verdicts: Vec::new(),
            oriented_verdict: None,
            summary: serde_json::Value::Null,
            exit_code: 0,
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if m.format != MANIFEST_FORMAT || m.format_version != MANIFEST_VERSION {
            return Err(CliError::Usage(format!(
                "{} is not a version {MANIFEST_VERSION} manifest",
                path.display()
            )));
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn verdict(&mut self, name: &str, passed: bool) {
        self.verdicts.push(Verdict {
            name: name.into(),
            passed,
        });
    }

    pub fn failed(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|v| !v.passed)
            .map(|v| v.name.as_str())
            .collect()
    }

    /// Run `f` and record its wall-clock time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing {
            stage: stage.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn output(&self, role: &str) -> Option<&FileHash> {
        self.outputs.iter().find(|o| o.role == role)
    }
}
