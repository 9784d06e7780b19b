//! Resolved run configuration, its content hash and the `key = value`
//! config-file format.

use std::collections::BTreeMap;

use misoifc_core::environment::EnvConfig;
use misoifc_core::madrl::{Activation, OptimizerKind, TrainingConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Every setting that influences a training run's artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub nt: usize,
    pub snr_db: f64,
    pub episodes: usize,
    pub steps: usize,
    pub pae: bool,
    pub seed: u64,
    pub sigma_p2: f64,
    pub decay: f64,
    pub test_size: usize,
    pub test_seed: u64,
    pub gamma: f64,
    pub eta_c: f64,
    pub eta_a: f64,
    pub optimizer: String,
    pub batch: usize,
    pub replay: bool,
    pub replay_capacity: usize,
    pub targets: bool,
    pub tau: f64,
    pub norm_penalty: f64,
    pub hidden: [usize; 3],
    pub activation: String,
    /// Stop once the test ratio to the SLNR baseline reaches this value.
    pub stop_at_ratio: Option<f64>,
}

impl RunConfig {
    /// Defaults for everything except the reward weight.
    pub fn with_alpha(alpha: f64) -> Self {
        let t = TrainingConfig::default();
        RunConfig {
            alpha,
            nt: 3,
            snr_db: 10.0,
            episodes: t.episodes,
            steps: t.steps_per_episode,
            pae: t.use_pae,
            seed: t.seed,
            sigma_p2: t.sigma_p2_init,
            decay: t.sigma_p2_decay,
            test_size: t.test_size,
            test_seed: t.test_seed,
            gamma: t.gamma,
            eta_c: t.eta_c,
            eta_a: t.eta_a,
            optimizer: t.optimizer.name().to_string(),
            batch: t.batch_size,
            replay: t.use_replay,
            replay_capacity: t.replay_capacity,
            targets: t.use_target_networks,
            tau: t.tau,
            norm_penalty: t.action_norm_penalty,
            hidden: t.hidden,
            activation: t.activation.name().to_string(),
            stop_at_ratio: None,
        }
    }

    pub fn env(&self) -> Result<EnvConfig> {
        if !self.snr_db.is_finite() {
            return Err(CliError::Usage("--snr-db must be finite".into()));
        }
        EnvConfig::from_snr_db(self.nt, self.snr_db).map_err(|e| CliError::Usage(format!("--nt/--snr-db: {e}")))
    }

    pub fn training(&self) -> Result<TrainingConfig> {
        let optimizer = OptimizerKind::from_name(&self.optimizer)
            .ok_or_else(|| CliError::Usage(format!("--optimizer: unknown optimizer {:?}", self.optimizer)))?;
        let activation = Activation::from_name(&self.activation)
            .ok_or_else(|| CliError::Usage(format!("--activation: unknown activation {:?}", self.activation)))?;
        Ok(TrainingConfig {
            alpha: self.alpha,
            gamma: self.gamma,
            eta_c: self.eta_c,
            eta_a: self.eta_a,
            optimizer,
            sigma_p2_init: self.sigma_p2,
            sigma_p2_decay: self.decay,
            episodes: self.episodes,
            steps_per_episode: self.steps,
            batch_size: self.batch,
            replay_capacity: self.replay_capacity,
            use_replay: self.replay,
            use_pae: self.pae,
            use_target_networks: self.targets,
            tau: self.tau,
            action_norm_penalty: self.norm_penalty,
            hidden: self.hidden,
            activation,
            seed: self.seed,
            test_seed: self.test_seed,
            test_size: self.test_size,
        })
    }

    /// Checks every field, naming the offending flag on failure.
    pub fn validate(&self) -> Result<()> {
        let bad = |flag: &str, msg: &str| Err(CliError::Usage(format!("--{flag}: {msg}")));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", "must lie in [0, 1]");
        }
        if self.nt == 0 {
            return bad("nt", "must be at least 1");
        }
        self.env()?;
        let checks: [(&str, bool, &str); 15] = [
            ("episodes", self.episodes > 0, "must be positive"),
            ("steps", self.steps > 0, "must be positive"),
            ("sigma-p2", self.sigma_p2 > 0.0 && self.sigma_p2.is_finite(), "must be positive"),
            ("decay", self.decay > 0.0 && self.decay <= 1.0, "must lie in (0, 1]"),
            ("test-size", self.test_size > 0, "must be positive"),
            ("gamma", (0.0..1.0).contains(&self.gamma), "must lie in [0, 1)"),
            ("eta-c", self.eta_c > 0.0 && self.eta_c.is_finite(), "must be positive"),
            ("eta-a", self.eta_a > 0.0 && self.eta_a.is_finite(), "must be positive"),
            ("batch", self.batch > 0, "must be positive"),
            ("replay-capacity", self.replay_capacity > 0, "must be positive"),
            (
                "batch",
                !self.replay || self.batch <= self.replay_capacity,
                "must not exceed --replay-capacity",
            ),
            ("tau", self.tau > 0.0 && self.tau <= 1.0, "must lie in (0, 1]"),
            (
                "norm-penalty",
                self.norm_penalty >= 0.0 && self.norm_penalty.is_finite(),
                "must be non-negative",
            ),
            ("hidden", self.hidden.iter().all(|&h| h > 0), "widths must be positive"),
            (
                "stop-at-ratio",
                self.stop_at_ratio.is_none_or(|r| r > 0.0 && r.is_finite()),
                "must be positive",
            ),
        ];
        for (flag, ok, msg) in checks {
            if !ok {
                return bad(flag, msg);
            }
        }
        self.training()?.validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Git-style content hash: SHA-256 over `"config <len>\0"` followed by
    /// the compact JSON of the configuration.
    pub fn content_hash(&self) -> String {
        let body = serde_json::to_string(self).expect("configuration serializes");
        let mut h = Sha256::new();
        h.update(format!("config {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// ignored; keys must be unique.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key or value", no + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {k:?}", no + 1)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_parse() {
        let m = parse_key_values("# comment\n\nalpha = 0.5\n snr-db=10 \n").unwrap();
        assert_eq!(m["alpha"], "0.5");
        assert_eq!(m["snr-db"], "10");
        assert!(parse_key_values("alpha").is_err());
        assert!(parse_key_values("alpha = 1\nalpha = 2").is_err());
        assert!(parse_key_values("alpha =").is_err());
    }

    #[test]
    fn validation_names_the_flag() {
        let mut c = RunConfig::with_alpha(1.5);
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("--alpha"), "{msg}");
        c.alpha = 0.5;
        assert!(c.validate().is_ok());
        c.decay = 0.0;
        assert!(c.validate().unwrap_err().to_string().contains("--decay"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::with_alpha(0.5);
        let mut b = a.clone();
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed = 1;
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
