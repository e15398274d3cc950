use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

pub const TOOL: &str = "crandim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block carried by every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Meta {
    /// Hash of the canonical JSON of `effective`, which should hold the
    /// parsed config and every flag that can change the outputs.
    pub fn new(command: &'static str, effective: &serde_json::Value, seed: Option<u64>) -> Self {
        // serde_json maps are ordered by key, so this text is canonical.
        let canonical = serde_json::to_string(effective).expect("JSON value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        Meta {
            tool: TOOL,
            version: VERSION,
            command,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
        }
    }

    fn csv_comments(&self) -> String {
        let mut s = format!(
            "# tool: {}\n# version: {}\n# command: {}\n# config_sha256: {}\n",
            self.tool, self.version, self.command, self.config_sha256
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    result: &'a T,
}

/// Output directory whose files are each written to a temporary sibling and
/// renamed into place.
pub struct OutputDir {
    dir: PathBuf,
    meta: Meta,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn new(dir: &Path, meta: Meta) -> Self {
        OutputDir {
            dir: dir.to_path_buf(),
            meta,
            written: Vec::new(),
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// `result` must serialize as a JSON object; `meta` is added as a field.
    pub fn write_json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(&Envelope {
            meta: &self.meta,
            result,
        })
        .map_err(|e| CliError::io(format!("serializing {name}: {e}")))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// CSV preceded by `#` comment lines carrying the meta block.
    pub fn write_csv(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let mut bytes = self.meta.csv_comments().into_bytes();
        body(&mut bytes).map_err(|e| CliError::io(format!("formatting {name}: {e}")))?;
        self.write_bytes(name, &bytes)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let fail =
            |e: &dyn std::fmt::Display| CliError::io(format!("writing {}: {e}", path.display()));
        fs::create_dir_all(&self.dir).map_err(|e| fail(&e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| fail(&e))?;
        tmp.write_all(bytes).map_err(|e| fail(&e))?;
        tmp.as_file().sync_all().map_err(|e| fail(&e))?;
        tmp.persist(&path).map_err(|e| fail(&e.error))?;
        self.written.push(path);
        Ok(())
    }
}
