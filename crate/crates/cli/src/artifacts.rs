//! Output directory bookkeeping: artifacts, JSON sidecars and the manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const OUT_ENV: &str = "THINNS_OUT";
pub const DEFAULT_ROOT: &str = "thinns-out";

/// `--out` when given, else `$THINNS_OUT/<scenario>`, else
/// `thinns-out/<scenario>`.
pub fn output_dir(flag: Option<&Path>, scenario: &str) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_ROOT), PathBuf::from);
            root.join(scenario)
        }
    }
}

pub fn config_hash(canonical: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(canonical.as_bytes())))
}

/// Canonical `key = value` text as a JSON object.
pub fn config_json(canonical: &str) -> Value {
    let mut m = Map::new();
    for line in canonical.lines() {
        if let Some((k, v)) = line.split_once('=') {
            m.insert(k.trim().to_string(), Value::String(v.trim().to_string()));
        }
    }
    Value::Object(m)
}

pub struct Artifacts {
    dir: PathBuf,
    scenario: String,
    config: String,
    written: Vec<String>,
    started: Instant,
    started_unix: u64,
}

impl Artifacts {
    pub fn create(dir: PathBuf, scenario: &str, canonical_config: String) -> io::Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            scenario: scenario.to_string(),
            config: canonical_config,
            written: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<()> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &Value) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(v).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `name` plus a sidecar `name` with `.json` in place of `.csv`
    /// holding the full config and `extra`.
    pub fn write_csv(&mut self, name: &str, csv: &str, extra: Value) -> io::Result<()> {
        self.write(name, csv.as_bytes())?;
        let mut side = json!({
            "artifact": name,
            "scenario": self.scenario,
            "config": config_json(&self.config),
        });
        if let (Value::Object(s), Value::Object(e)) = (&mut side, extra) {
            s.extend(e);
        }
        let sidecar = match name.strip_suffix(".csv") {
            Some(stem) => format!("{stem}.json"),
            None => format!("{name}.json"),
        };
        self.write_json(&sidecar, &side)
    }

    /// Manifest with the config hash, versions and wall time. The only
    /// file whose bytes vary between identical runs.
    pub fn finish(mut self, status: &str, exit_code: i32) -> io::Result<PathBuf> {
        let manifest = json!({
            "scenario": self.scenario,
            "status": status,
            "exit_code": exit_code,
            "config_hash": config_hash(&self.config),
            "config": config_json(&self.config),
            "versions": {
                "thinns": thinns::VERSION,
                "thinns-cli": env!("CARGO_PKG_VERSION"),
            },
            "started_unix": self.started_unix,
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "artifacts": self.written,
        });
        let p = self.path("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)? + "\n";
        fs::write(&p, text)?;
        self.written.clear();
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        let h = config_hash("a = 1\n");
        assert!(h.starts_with("sha256:") && h.len() == 7 + 64);
        assert_eq!(h, config_hash("a = 1\n"));
        assert_ne!(h, config_hash("a = 2\n"));
    }

    #[test]
    fn config_becomes_object() {
        assert_eq!(config_json("a = 1\nb = x, y\n"), json!({"a": "1", "b": "x, y"}));
    }
}
