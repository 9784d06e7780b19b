//! Held-out evaluation, baseline references and the experiment drivers
//! that compare learned policies with the closed-form precoders and the
//! swept rate region.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::environment::{rate_pair, sample_channel, ChannelRealization, EnvConfig, RatePair};
use crate::features::write_observation;
use crate::madrl::agents::{action_to_precoder, ActorPolicy};
use crate::madrl::mlp::MlpWorkspace;
use crate::madrl::train::{train, EpisodeRecord, TrainingConfig, TrainingOutcome};
use crate::numerics::{ComplexVec, RngStream, StreamId};
use crate::precoders::{
    baseline_pair, max_weighted_objective, pareto_indices, sweep_rate_region, Baseline, PrecodingPair,
};
use crate::{Error, Result};

pub const DEFAULT_TEST_SIZE: usize = 5000;
pub const DEFAULT_AUDIT_SIZE: usize = 50;

/// Channels never seen during training: drawn from the dedicated test-set
/// stream, which no training component reads.
#[derive(Clone, Debug, PartialEq)]
pub struct TestSet {
    channels: Vec<ChannelRealization>,
    seed: u64,
    stream: u64,
}

impl TestSet {
    pub fn generate(seed: u64, size: usize, env: &EnvConfig) -> Self {
        Self::generate_on(seed, StreamId::TestSet, size, env)
    }

    /// Audit sets use their own stream so they differ from the test set even
    /// under the same seed.
    pub fn generate_audit(seed: u64, size: usize, env: &EnvConfig) -> Self {
        Self::generate_on(seed, StreamId::Audit, size, env)
    }

    fn generate_on(seed: u64, id: StreamId, size: usize, env: &EnvConfig) -> Self {
        let mut rng = RngStream::derive(seed, id);
        let channels = (0..size).map(|_| sample_channel(&mut rng, env)).collect();
        TestSet {
            channels,
            seed,
            stream: id as u64,
        }
    }

    pub fn from_channels(channels: Vec<ChannelRealization>, seed: u64) -> Self {
        TestSet {
            channels,
            seed,
            stream: StreamId::TestSet as u64,
        }
    }

    pub fn channels(&self) -> &[ChannelRealization] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

fn mean_rates(rates: &[RatePair]) -> RatePair {
    let n = rates.len() as f64;
    let (s1, s2) = rates.iter().fold((0.0, 0.0), |(a, b), r| (a + r.r1, b + r.r2));
    RatePair::new(s1 / n, s2 / n)
}

/// Test-set averages of the reference precoder pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineAverages {
    pub mrt_mrt: RatePair,
    pub zf_zf: RatePair,
    pub slnr_slnr: RatePair,
    pub mrt_zf: RatePair,
    pub zf_mrt: RatePair,
}

impl BaselineAverages {
    pub fn compute(ts: &TestSet, env: &EnvConfig) -> Result<Self> {
        if ts.is_empty() {
            return Err(Error::Empty("test set is empty"));
        }
        let avg = |b: Baseline| -> Result<RatePair> {
            let rates = ts
                .channels()
                .iter()
                .map(|ch| baseline_pair(ch, env, b)?.rates(ch, env))
                .collect::<Result<Vec<_>>>()?;
            Ok(mean_rates(&rates))
        };
        Ok(BaselineAverages {
            mrt_mrt: avg(Baseline::MrtMrt)?,
            zf_zf: avg(Baseline::ZfZf)?,
            slnr_slnr: avg(Baseline::SlnrSlnr)?,
            mrt_zf: avg(Baseline::MrtZf)?,
            zf_mrt: avg(Baseline::ZfMrt)?,
        })
    }

    pub fn get(&self, b: Baseline) -> RatePair {
        match b {
            Baseline::MrtMrt => self.mrt_mrt,
            Baseline::ZfZf => self.zf_zf,
            Baseline::SlnrSlnr => self.slnr_slnr,
            Baseline::MrtZf => self.mrt_zf,
            Baseline::ZfMrt => self.zf_mrt,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaluationReport {
    pub samples: usize,
    pub avg_rate_pair: RatePair,
    pub avg_sum_rate: f64,
    pub baselines: BaselineAverages,
    /// Average sum rate relative to the SLNR/SLNR average.
    pub ratio_to_slnr: f64,
    /// Channels where a degenerate action fell back to `[1, 0, ..., 0]`.
    pub fallback_count: usize,
}

/// Anything that maps a channel realization to a precoder pair.
pub trait JointPolicy {
    fn precoders(&self, ch: &ChannelRealization, env: &EnvConfig) -> Result<PrecodingPair>;

    /// Rates on every channel plus the number of fallback precoders used.
    fn rates_on(&self, channels: &[ChannelRealization], env: &EnvConfig) -> Result<(Vec<RatePair>, usize)> {
        let rates = channels
            .iter()
            .map(|ch| self.precoders(ch, env)?.rates(ch, env))
            .collect::<Result<Vec<_>>>()?;
        Ok((rates, 0))
    }
}

/// A closed-form reference pair used as a policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaselinePolicy(pub Baseline);

impl JointPolicy for BaselinePolicy {
    fn precoders(&self, ch: &ChannelRealization, env: &EnvConfig) -> Result<PrecodingPair> {
        baseline_pair(ch, env, self.0)
    }
}

/// Two trained actors deployed on local observations only.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedPolicy {
    pub actor1: ActorPolicy,
    pub actor2: ActorPolicy,
    pub use_pae: bool,
}

impl LearnedPolicy {
    pub fn new(actor1: ActorPolicy, actor2: ActorPolicy, use_pae: bool) -> Self {
        LearnedPolicy {
            actor1,
            actor2,
            use_pae,
        }
    }
}

/// Runs both actors on all channels in one batch per actor.
pub(crate) fn actor_rates(
    actors: [&ActorPolicy; 2],
    use_pae: bool,
    channels: &[ChannelRealization],
    env: &EnvConfig,
) -> Result<(Vec<RatePair>, usize)> {
    let n = env.n_t();
    for a in actors {
        if a.n_t() != n {
            return Err(Error::LengthMismatch {
                expected: 4 * n,
                actual: a.params().input_size(),
            });
        }
    }
    let len = channels.len();
    let mut raw: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut ws = MlpWorkspace::new();
    for agent in 0..2 {
        let mut obs = Vec::with_capacity(len * 4 * n);
        for ch in channels {
            let (h, g) = ch.local(agent);
            write_observation(h, g, use_pae, &mut obs)?;
        }
        actors[agent].params().forward_batch(&obs, len, &mut ws)?;
        raw[agent] = ws.output().to_vec();
    }
    let mut fallbacks = 0;
    let mut rates = Vec::with_capacity(len);
    for (k, ch) in channels.iter().enumerate() {
        let (w1, f1) = action_to_precoder(&raw[0][k * 2 * n..(k + 1) * 2 * n])?;
        let (w2, f2) = action_to_precoder(&raw[1][k * 2 * n..(k + 1) * 2 * n])?;
        fallbacks += f1 as usize + f2 as usize;
        rates.push(rate_pair(ch, &w1, &w2, env)?);
    }
    Ok((rates, fallbacks))
}

impl JointPolicy for LearnedPolicy {
    fn precoders(&self, ch: &ChannelRealization, _env: &EnvConfig) -> Result<PrecodingPair> {
        let mut w = [ComplexVec::zeros(0), ComplexVec::zeros(0)];
        for (agent, actor) in [&self.actor1, &self.actor2].into_iter().enumerate() {
            let (h, g) = ch.local(agent);
            let mut obs = Vec::with_capacity(4 * h.len());
            write_observation(h, g, self.use_pae, &mut obs)?;
            w[agent] = action_to_precoder(&actor.forward_raw(&obs)?)?.0;
        }
        let [w1, w2] = w;
        Ok(PrecodingPair::new(w1, w2))
    }

    fn rates_on(&self, channels: &[ChannelRealization], env: &EnvConfig) -> Result<(Vec<RatePair>, usize)> {
        actor_rates([&self.actor1, &self.actor2], self.use_pae, channels, env)
    }
}

fn report_from(rates: &[RatePair], fallbacks: usize, baselines: BaselineAverages) -> EvaluationReport {
    let avg = mean_rates(rates);
    EvaluationReport {
        samples: rates.len(),
        avg_rate_pair: avg,
        avg_sum_rate: avg.sum(),
        baselines,
        ratio_to_slnr: avg.sum() / baselines.slnr_slnr.sum(),
        fallback_count: fallbacks,
    }
}

/// Evaluates `policy` against precomputed baseline averages of `ts`.
pub fn evaluate_with_baselines<P: JointPolicy + ?Sized>(
    policy: &P,
    ts: &TestSet,
    env: &EnvConfig,
    baselines: BaselineAverages,
) -> Result<EvaluationReport> {
    if ts.is_empty() {
        return Err(Error::Empty("test set is empty"));
    }
    let (rates, fallbacks) = policy.rates_on(ts.channels(), env)?;
    Ok(report_from(&rates, fallbacks, baselines))
}

pub fn evaluate_policy<P: JointPolicy + ?Sized>(policy: &P, ts: &TestSet, env: &EnvConfig) -> Result<EvaluationReport> {
    let baselines = BaselineAverages::compute(ts, env)?;
    evaluate_with_baselines(policy, ts, env, baselines)
}

/// Noise-free evaluation of two actors on a test set.
pub fn evaluate(
    actors: [&ActorPolicy; 2],
    ts: &TestSet,
    env: &EnvConfig,
    use_pae: bool,
) -> Result<EvaluationReport> {
    let baselines = BaselineAverages::compute(ts, env)?;
    if ts.is_empty() {
        return Err(Error::Empty("test set is empty"));
    }
    let (rates, fallbacks) = actor_rates(actors, use_pae, ts.channels(), env)?;
    Ok(report_from(&rates, fallbacks, baselines))
}

/// Compares a policy's weighted objective with the best swept value on
/// each channel.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedAudit {
    pub alpha: f64,
    pub achieved: Vec<f64>,
    pub oracle: Vec<f64>,
    pub mean_achieved: f64,
    pub mean_oracle: f64,
}

impl WeightedAudit {
    /// `mean_achieved / mean_oracle`.
    pub fn ratio(&self) -> f64 {
        self.mean_achieved / self.mean_oracle
    }
}

pub fn weighted_objective_audit<P: JointPolicy + ?Sized>(
    policy: &P,
    channels: &[ChannelRealization],
    env: &EnvConfig,
    alpha: f64,
    grid_size: usize,
) -> Result<WeightedAudit> {
    if channels.is_empty() {
        return Err(Error::Empty("audit needs at least one channel"));
    }
    let (rates, _) = policy.rates_on(channels, env)?;
    let achieved: Vec<f64> = rates.iter().map(|r| r.weighted(alpha)).collect();
    let oracle = channels
        .iter()
        .map(|ch| max_weighted_objective(&sweep_rate_region(ch, env, grid_size)?, alpha))
        .collect::<Result<Vec<_>>>()?;
    let n = channels.len() as f64;
    Ok(WeightedAudit {
        alpha,
        mean_achieved: achieved.iter().sum::<f64>() / n,
        mean_oracle: oracle.iter().sum::<f64>() / n,
        achieved,
        oracle,
    })
}

/// Largest shortfall of the frontier below `rp`: zero when some frontier
/// point is at least as good as `rp` in both rates.
pub fn frontier_excess(frontier: &[RatePair], rp: &RatePair) -> f64 {
    frontier
        .iter()
        .map(|f| (rp.r1 - f.r1).max(rp.r2 - f.r2).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

/// One trained model of an α study.
#[derive(Clone, Debug)]
pub struct AlphaRun {
    pub alpha: f64,
    pub report: EvaluationReport,
    pub curve: Vec<EpisodeRecord>,
    pub policy: LearnedPolicy,
}

#[derive(Clone, Debug)]
pub struct AlphaStudy {
    pub references: BaselineAverages,
    pub runs: Vec<AlphaRun>,
}

/// Reward weights of the standard three-point α study.
pub const STUDY_ALPHAS: [f64; 3] = [0.5, 2.0 / 3.0, 0.75];

/// Trains one model per α on a shared environment and test set.
pub fn alpha_study(
    base: &TrainingConfig,
    alphas: &[f64],
    env: &EnvConfig,
    ts: &TestSet,
    observer: &mut dyn FnMut(f64, &EpisodeRecord),
) -> Result<AlphaStudy> {
    let references = BaselineAverages::compute(ts, env)?;
    let mut runs = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let cfg = TrainingConfig { alpha, ..base.clone() };
        let TrainingOutcome {
            model,
            curve,
            final_report,
            ..
        } = train(&cfg, env, ts, &mut |rec| {
            observer(alpha, rec);
            core::ops::ControlFlow::Continue(())
        })?;
        runs.push(AlphaRun {
            alpha,
            report: final_report,
            curve,
            policy: model.policy(cfg.use_pae),
        });
    }
    Ok(AlphaStudy { references, runs })
}

/// Row tag of a rate-region dataset.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionTag {
    Region,
    Frontier,
    MrtZf,
    ZfMrt,
    Slnr,
    Learned(f64),
}

impl RegionTag {
    pub fn label(&self) -> String {
        match self {
            RegionTag::Region => "region".into(),
            RegionTag::Frontier => "frontier".into(),
            RegionTag::MrtZf => "mrt_zf".into(),
            RegionTag::ZfMrt => "zf_mrt".into(),
            RegionTag::Slnr => "slnr".into(),
            RegionTag::Learned(alpha) => format!("learned_a{}", libm::round(alpha * 100.0) as i64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionRow {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub rates: RatePair,
    pub tag: RegionTag,
}

/// Swept region, its frontier and the reference points of one channel,
/// plus the pairs reached by any learned policies given as `(α, policy)`.
pub fn single_sample_figure(
    ch: &ChannelRealization,
    learned: &[(f64, &LearnedPolicy)],
    env: &EnvConfig,
    grid_size: usize,
) -> Result<Vec<RegionRow>> {
    let points = sweep_rate_region(ch, env, grid_size)?;
    let rates: Vec<RatePair> = points.iter().map(|p| p.rates).collect();
    let mut rows: Vec<RegionRow> = points
        .iter()
        .map(|p| RegionRow {
            lambda1: Some(p.lambda1),
            lambda2: Some(p.lambda2),
            rates: p.rates,
            tag: RegionTag::Region,
        })
        .collect();
    for i in pareto_indices(&rates) {
        rows.push(RegionRow {
            tag: RegionTag::Frontier,
            ..rows[i].clone()
        });
    }
    let refs = [
        (Baseline::MrtZf, RegionTag::MrtZf, Some(1.0), Some(0.0)),
        (Baseline::ZfMrt, RegionTag::ZfMrt, Some(0.0), Some(1.0)),
        (Baseline::SlnrSlnr, RegionTag::Slnr, None, None),
    ];
    for (b, tag, lambda1, lambda2) in refs {
        rows.push(RegionRow {
            lambda1,
            lambda2,
            rates: baseline_pair(ch, env, b)?.rates(ch, env)?,
            tag,
        });
    }
    for &(alpha, policy) in learned {
        rows.push(RegionRow {
            lambda1: None,
            lambda2: None,
            rates: policy.precoders(ch, env)?.rates(ch, env)?,
            tag: RegionTag::Learned(alpha),
        });
    }
    Ok(rows)
}

/// The sample channel printed with the reference rate-region figure.
pub fn reference_sample_channel() -> ChannelRealization {
    let h1 = ComplexVec::from_pairs(&[(-0.569, 0.227), (-0.018, 0.456), (-0.213, 0.254)]);
    let g1 = ComplexVec::from_pairs(&[(-0.054, -0.240), (0.298, -0.232), (0.334, -0.403)]);
    let h2 = ComplexVec::from_pairs(&[(-0.846, -0.287), (-0.129, 0.073), (-0.098, 0.499)]);
    let g2 = ComplexVec::from_pairs(&[(0.636, -0.493), (-0.167, -0.050), (0.204, 0.460)]);
    ChannelRealization { h1, g1, h2, g2 }
}
