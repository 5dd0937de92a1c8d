use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Record of one invocation, sufficient to repeat it.
///
/// `argv` is replayed verbatim and `seed` is the seed actually used, so a
/// replay ignores `TGV1D_SEED`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub parameters: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_s: f64,
    pub exit_code: u8,
}

/// `<path>.manifest.json` next to a primary output.
pub fn default_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
