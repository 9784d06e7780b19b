use misoifc_core::environment::EnvConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

impl Artifact {
    pub fn new(path: &str, contents: &[u8]) -> Self {
        Artifact {
            path: path.to_string(),
            sha256: hex(&Sha256::digest(contents)),
            bytes: contents.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvEcho {
    pub n_t: usize,
    pub sigma_n2: f64,
    pub snr_db: f64,
}

/// Wall-clock data; the only part of a run that is not reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Content hash of `config`; every JSON artifact of the run carries it.
    pub manifest_hash: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub env: EnvEcho,
    pub episodes_run: usize,
    pub artifacts: Vec<Artifact>,
    pub wall_clock: WallClock,
}

impl RunManifest {
    pub fn new(
        config: RunConfig,
        env: &EnvConfig,
        artifacts: Vec<Artifact>,
        episodes_run: usize,
        started_unix_s: f64,
        elapsed_s: f64,
    ) -> Self {
        RunManifest {
            manifest_hash: config.content_hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            env: EnvEcho {
                n_t: env.n_t(),
                sigma_n2: env.sigma_n2(),
                snr_db: config.snr_db,
            },
            config,
            episodes_run,
            artifacts,
            wall_clock: WallClock {
                started_unix_s,
                elapsed_s,
            },
        }
    }
}
