//! On-disk formats: channel JSON, checkpoints, reports and CSV tables.
//!
//! JSON numbers use the shortest text that parses back to the same `f64`;
//! CSV numbers use 17 significant digits. Both are exact round trips.

use std::fs;
use std::io::Write;
use std::path::Path;

use misoifc_core::environment::{ChannelRealization, RatePair};
use misoifc_core::harness::{BaselineAverages, EvaluationReport, RegionRow};
use misoifc_core::madrl::{
    Activation, ActorPolicy, CriticNetwork, DenseLayer, EpisodeRecord, MlpParams, TrainedModel,
};
use misoifc_core::numerics::ComplexVec;
use misoifc_core::precoders::SweepPoint;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::format("serializing JSON", e))?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// Channels

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    h1: Vec<[f64; 2]>,
    g1: Vec<[f64; 2]>,
    h2: Vec<[f64; 2]>,
    g2: Vec<[f64; 2]>,
}

fn to_pairs(v: &ComplexVec) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> ComplexVec {
    let pairs: Vec<(f64, f64)> = v.iter().map(|p| (p[0], p[1])).collect();
    ComplexVec::from_pairs(&pairs)
}

/// `{"h1": [[re, im], ...], "g1": ..., "h2": ..., "g2": ...}`.
pub fn channel_to_json(ch: &ChannelRealization) -> Result<String> {
    to_json(&ChannelJson {
        h1: to_pairs(&ch.h1),
        g1: to_pairs(&ch.g1),
        h2: to_pairs(&ch.h2),
        g2: to_pairs(&ch.g2),
    })
}

pub fn channel_from_json(text: &str) -> Result<ChannelRealization> {
    let c: ChannelJson = serde_json::from_str(text).map_err(|e| CliError::format("parsing channel JSON", e))?;
    Ok(ChannelRealization::new(
        from_pairs(&c.h1),
        from_pairs(&c.g1),
        from_pairs(&c.h2),
        from_pairs(&c.g2),
    )?)
}

// ---------------------------------------------------------------------------
// Checkpoints

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerJson {
    /// One inner array per output unit.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    activation: String,
    layers: Vec<LayerJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointJson {
    version: u32,
    config_hash: String,
    config: RunConfig,
    actor1: NetworkJson,
    actor2: NetworkJson,
    critic: NetworkJson,
}

fn network_to_json(p: &MlpParams) -> NetworkJson {
    NetworkJson {
        activation: p.hidden_activation().name().to_string(),
        layers: p
            .layers()
            .iter()
            .map(|l| LayerJson {
                weights: (0..l.outputs()).map(|o| l.weight_row(o).to_vec()).collect(),
                biases: l.biases().to_vec(),
            })
            .collect(),
    }
}

fn network_from_json(n: NetworkJson) -> std::result::Result<MlpParams, String> {
    let activation = Activation::from_name(&n.activation).ok_or_else(|| format!("unknown activation {:?}", n.activation))?;
    let mut layers = Vec::with_capacity(n.layers.len());
    for (k, l) in n.layers.into_iter().enumerate() {
        let outputs = l.weights.len();
        let inputs = l.weights.first().map_or(0, Vec::len);
        if l.weights.iter().any(|row| row.len() != inputs) {
            return Err(format!("layer {k}: ragged weight rows"));
        }
        let weights = l.weights.into_iter().flatten().collect();
        layers.push(DenseLayer::from_parts(inputs, outputs, weights, l.biases).map_err(|e| format!("layer {k}: {e}"))?);
    }
    MlpParams::from_layers(layers, activation).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub config: RunConfig,
    pub model: TrainedModel,
}

pub fn checkpoint_to_json(config: &RunConfig, config_hash: &str, model: &TrainedModel) -> Result<String> {
    to_json(&CheckpointJson {
        version: CHECKPOINT_VERSION,
        config_hash: config_hash.to_string(),
        config: config.clone(),
        actor1: network_to_json(model.actor1.params()),
        actor2: network_to_json(model.actor2.params()),
        critic: network_to_json(model.critic.params()),
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let fail = |reason: String| CliError::Checkpoint {
        path: path.to_path_buf(),
        reason,
    };
    let text = fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    let version = serde_json::from_str::<serde_json::Value>(&text)
        .map_err(|e| fail(format!("parse error: {e}")))?
        .get("version")
        .and_then(serde_json::Value::as_u64);
    if version != Some(u64::from(CHECKPOINT_VERSION)) {
        return Err(fail(format!(
            "unsupported version {version:?}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let c: CheckpointJson = serde_json::from_str(&text).map_err(|e| fail(format!("parse error: {e}")))?;
    c.config.validate().map_err(|e| fail(format!("config: {e}")))?;
    let n_t = c.config.nt;
    let actor = |net, name: &str| {
        let p = network_from_json(net).map_err(|e| fail(format!("{name}: {e}")))?;
        let a = ActorPolicy::from_params(p).map_err(|e| fail(format!("{name}: {e}")))?;
        if a.n_t() != n_t {
            return Err(fail(format!("{name}: built for n_t = {}, config says {n_t}", a.n_t())));
        }
        Ok(a)
    };
    let actor1 = actor(c.actor1, "actor1")?;
    let actor2 = actor(c.actor2, "actor2")?;
    let critic = network_from_json(c.critic)
        .and_then(|p| CriticNetwork::from_params(p).map_err(|e| e.to_string()))
        .map_err(|e| fail(format!("critic: {e}")))?;
    if critic.n_t() != n_t {
        return Err(fail(format!("critic: built for n_t = {}, config says {n_t}", critic.n_t())));
    }
    Ok(Checkpoint {
        config_hash: c.config_hash,
        config: c.config,
        model: TrainedModel {
            actor1,
            actor2,
            critic,
        },
    })
}

// ---------------------------------------------------------------------------
// Evaluation reports

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePairJson {
    pub r1: f64,
    pub r2: f64,
    pub sum: f64,
}

impl From<RatePair> for RatePairJson {
    fn from(rp: RatePair) -> Self {
        RatePairJson {
            r1: rp.r1,
            r2: rp.r2,
            sum: rp.sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselinesJson {
    pub mrt_mrt: RatePairJson,
    pub zf_zf: RatePairJson,
    pub slnr_slnr: RatePairJson,
    pub mrt_zf: RatePairJson,
    pub zf_mrt: RatePairJson,
}

impl From<&BaselineAverages> for BaselinesJson {
    fn from(b: &BaselineAverages) -> Self {
        BaselinesJson {
            mrt_mrt: b.mrt_mrt.into(),
            zf_zf: b.zf_zf.into(),
            slnr_slnr: b.slnr_slnr.into(),
            mrt_zf: b.mrt_zf.into(),
            zf_mrt: b.zf_mrt.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub manifest_hash: String,
    pub config: RunConfig,
    pub test_seed: u64,
    pub test_size: usize,
    pub samples: usize,
    pub avg_rate_pair: RatePairJson,
    pub avg_sum_rate: f64,
    pub ratio_to_slnr: f64,
    pub pct_of_slnr_baseline: f64,
    pub fallback_count: usize,
    pub baselines: BaselinesJson,
}

impl ReportJson {
    pub fn new(report: &EvaluationReport, config: &RunConfig, manifest_hash: &str) -> Self {
        ReportJson {
            manifest_hash: manifest_hash.to_string(),
            config: config.clone(),
            test_seed: config.test_seed,
            test_size: config.test_size,
            samples: report.samples,
            avg_rate_pair: report.avg_rate_pair.into(),
            avg_sum_rate: report.avg_sum_rate,
            ratio_to_slnr: report.ratio_to_slnr,
            pct_of_slnr_baseline: 100.0 * report.ratio_to_slnr,
            fallback_count: report.fallback_count,
            baselines: (&report.baselines).into(),
        }
    }
}

// ---------------------------------------------------------------------------
// CSV tables

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::format("writing CSV", e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::format("writing CSV", e))?;
    }
    w.into_inner().map_err(|e| CliError::format("writing CSV", e.into_error()))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const CURVE_HEADER: [&str; 6] = [
    "episode",
    "sigma_p2",
    "avg_r1",
    "avg_r2",
    "avg_sum_rate",
    "pct_of_slnr_baseline",
];

pub fn learning_curve_csv(curve: &[EpisodeRecord]) -> Result<Vec<u8>> {
    csv_bytes(
        &CURVE_HEADER,
        curve.iter().map(|r| {
            vec![
                r.episode.to_string(),
                fmt_f64(r.sigma_p2),
                fmt_f64(r.avg_rate_pair.r1),
                fmt_f64(r.avg_rate_pair.r2),
                fmt_f64(r.avg_sum_rate),
                fmt_f64(r.pct_of_slnr_baseline()),
            ]
        }),
    )
}

/// Raw sweep with a frontier-membership flag per grid point.
pub fn sweep_csv(points: &[SweepPoint], frontier: &[usize]) -> Result<Vec<u8>> {
    let mut on = vec![false; points.len()];
    for &i in frontier {
        on[i] = true;
    }
    csv_bytes(
        &["lambda1", "lambda2", "r1", "r2", "on_frontier"],
        points.iter().zip(on).map(|(p, f)| {
            vec![
                fmt_f64(p.lambda1),
                fmt_f64(p.lambda2),
                fmt_f64(p.rates.r1),
                fmt_f64(p.rates.r2),
                f.to_string(),
            ]
        }),
    )
}

/// Rate-region dataset; λ columns are empty for points that are not part
/// of the MRT/ZF sweep.
pub fn region_csv(rows: &[RegionRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["lambda1", "lambda2", "r1", "r2", "tag"],
        rows.iter().map(|r| {
            vec![
                opt(r.lambda1),
                opt(r.lambda2),
                fmt_f64(r.rates.r1),
                fmt_f64(r.rates.r2),
                r.tag.label(),
            ]
        }),
    )
}
