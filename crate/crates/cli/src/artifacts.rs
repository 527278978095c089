//! Output directory, input digests and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

fn digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects inputs, parameters and written files of one run.
pub struct Artifacts {
    out: PathBuf,
    command: String,
    inputs: Vec<Value>,
    outputs: Vec<Value>,
    params: Map<String, Value>,
}

impl Artifacts {
    pub fn new(out: &Path, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Self { out: out.to_path_buf(), command: command.into(), inputs: Vec::new(), outputs: Vec::new(), params: Map::new() })
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(json!({ "path": path.display().to_string(), "sha256": digest(&bytes) }));
        String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not valid UTF-8", path.display())))
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.into(), value.into());
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(json!({ "file": name, "sha256": digest(content.as_bytes()) }));
        Ok(())
    }

    /// Writes `manifest.json`.
    pub fn finish(self, pass: bool) -> Result<(), CliError> {
        let m = json!({
            "artifact": "quasiline",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "parameters": Value::Object(self.params),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "status": if pass { "pass" } else { "fail" },
        });
        let path = self.out.join("manifest.json");
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
