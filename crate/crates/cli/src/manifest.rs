use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acceptance {
    pub accepted: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

/// Everything needed to repeat a run with the same build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Fully resolved arguments; `rerun` feeds them back unchanged.
    pub parameters: serde_json::Value,
    pub master_seed: Option<u64>,
    pub timestamps: Timestamps,
    pub output_files: Vec<PathBuf>,
    pub acceptance: Option<Acceptance>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_path(Path::new("out/run.csv")), PathBuf::from("out/run.csv.manifest.json"));
    }

    #[test]
    fn roundtrip() {
        let m = RunManifest {
            tool_version: "0.1.0".into(),
            command: "trajectories".into(),
            parameters: serde_json::json!({"q": 0.25, "seed": 7}),
            master_seed: Some(7),
            timestamps: Timestamps { started_unix_ms: 1, finished_unix_ms: 2 },
            output_files: vec![PathBuf::from("a.csv")],
            acceptance: Some(Acceptance { accepted: 3, total: 10 }),
        };
        let dir = std::env::temp_dir().join(format!("hl-manifest-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("m.json");
        m.write(&p).unwrap();
        assert_eq!(RunManifest::read(&p).unwrap(), m);
        fs::remove_dir_all(dir).unwrap();
    }
}
