//! Artifact writers that hash what they write.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::manifest::FileHash;

/// Bump when a CSV schema changes incompatibly.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub struct Artifact {
    role: String,
    path: Option<PathBuf>,
    sink: Box<dyn Write>,
    hasher: Sha256,
    bytes: u64,
}

impl Artifact {
    /// Write to `path`, or to standard output when `None`.
    pub fn create(role: &str, path: Option<&Path>) -> io::Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                Box::new(BufWriter::new(File::create(p)?))
            }
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Artifact {
            role: role.into(),
            path: path.map(Path::to_path_buf),
            sink,
            hasher: Sha256::new(),
            bytes: 0,
        })
    }

    pub fn finish(mut self) -> io::Result<FileHash> {
        self.sink.flush()?;
        Ok(FileHash {
            role: self.role,
            path: self.path.unwrap_or_else(|| PathBuf::from("-")),
            sha256: hex::encode(self.hasher.finalize()),
            bytes: self.bytes,
        })
    }
}

impl Write for Artifact {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.sink.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.sink.flush()
    }
}

/// A CSV artifact whose first line names the schema and its version.
pub struct CsvArtifact {
    writer: csv::Writer<Artifact>,
}

impl CsvArtifact {
    pub fn create(
        schema: &str,
        path: Option<&Path>,
        header: &[&str],
    ) -> Result<Self, crate::CliError> {
        let mut artifact = Artifact::create(schema, path)?;
        writeln!(artifact, "# tiltwalk-csv {schema} {CSV_SCHEMA_VERSION}")?;
        let mut writer = csv::Writer::from_writer(artifact);
        writer.write_record(header)?;
        Ok(CsvArtifact { writer })
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<(), crate::CliError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(self) -> Result<FileHash, crate::CliError> {
        let artifact = self
            .writer
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))?;
        Ok(artifact.finish()?)
    }
}

/// Pretty JSON artifact.
pub fn write_json(
    role: &str,
    path: &Path,
    value: &impl serde::Serialize,
) -> Result<FileHash, crate::CliError> {
    let mut artifact = Artifact::create(role, Some(path))?;
    serde_json::to_writer_pretty(&mut artifact, value).map_err(io::Error::from)?;
    writeln!(artifact)?;
    Ok(artifact.finish()?)
}

/// Hash of a file read as input.
pub fn hash_input(role: &str, path: &Path, bytes: &[u8]) -> FileHash {
    FileHash {
        role: role.into(),
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(bytes)),
        bytes: bytes.len() as u64,
    }
}
