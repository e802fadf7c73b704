//! Run manifests: what was run, on which inputs, and how long each phase took.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct Manifest {
    command: String,
    inputs: Vec<String>,
    seed: Option<u64>,
    id: String,
    phases: Vec<(String, f64)>,
    started: Instant,
}

impl Manifest {
    /// The id hashes the command, the input bytes and the seed, so reruns
    /// with the same inputs share it.
    pub fn new(command: &str, inputs: Vec<String>, content: &[u8], seed: Option<u64>) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(content);
        h.update(seed.unwrap_or(0).to_le_bytes());
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        let digest = h.finalize();
        let id = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Manifest { command: command.into(), inputs, seed, id, phases: Vec::new(), started: Instant::now() }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn phase<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.phases.push((name.into(), t.elapsed().as_secs_f64()));
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "versions": { "mmroute": env!("CARGO_PKG_VERSION") },
            "timings_s": self.phases.iter().map(|(n, t)| json!({ "phase": n, "seconds": t })).collect::<Vec<_>>(),
            "total_s": self.started.elapsed().as_secs_f64(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// `results.csv` -> `results.manifest.json`.
pub fn path_for(out: &Path) -> std::path::PathBuf {
    out.with_extension("manifest.json")
}
