//! Centralized training of the two actors and the shared critic.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::agents::{
    action_to_precoder, actors_update, critic_update, explore, td_targets, ActorPolicy, AgentMask,
    CriticNetwork, TargetNets, UpdateWorkspace,
};
use super::mlp::Activation;
use super::optim::{Optimizer, OptimizerKind};
use super::replay::{ReplayBuffer, Transition, TransitionBatch};
use crate::environment::{collective_reward, rate_pair, sample_channel, ChannelRealization, EnvConfig, RatePair};
use crate::features::write_observation;
use crate::harness::{actor_rates, BaselineAverages, EvaluationReport, LearnedPolicy, TestSet};
use crate::numerics::{RngStream, StreamId};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    /// Weight of UE 1 in the collective reward.
    pub alpha: f64,
    pub gamma: f64,
    pub eta_c: f64,
    pub eta_a: f64,
    pub optimizer: OptimizerKind,
    pub sigma_p2_init: f64,
    /// Multiplies the exploration variance after every episode.
    pub sigma_p2_decay: f64,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Without replay every update uses only the latest transition.
    pub use_replay: bool,
    pub use_pae: bool,
    pub use_target_networks: bool,
    pub tau: f64,
    /// Weight of the raw-action norm penalty in the actor objective.
    pub action_norm_penalty: f64,
    pub hidden: [usize; 3],
    pub activation: Activation,
    pub seed: u64,
    pub test_seed: u64,
    pub test_size: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            alpha: 0.5,
            gamma: 0.0,
            eta_c: 1e-3,
            eta_a: 1e-4,
            optimizer: OptimizerKind::Adam,
            sigma_p2_init: 0.1,
            sigma_p2_decay: 0.993,
            episodes: 200,
            steps_per_episode: 10_000,
            batch_size: 64,
            replay_capacity: 100_000,
            use_replay: true,
            use_pae: true,
            use_target_networks: false,
            tau: 0.005,
            action_norm_penalty: 1.0,
            hidden: [64, 64, 64],
            activation: Activation::Relu,
            seed: 0,
            test_seed: 1,
            test_size: crate::harness::DEFAULT_TEST_SIZE,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma must lie in [0, 1)"));
        }
        if !positive(self.eta_c) || !positive(self.eta_a) {
            return Err(Error::invalid("learning rates must be positive"));
        }
        if !positive(self.sigma_p2_init) {
            return Err(Error::invalid("exploration variance must be positive"));
        }
        if !positive(self.sigma_p2_decay) || self.sigma_p2_decay > 1.0 {
            return Err(Error::invalid("exploration decay must lie in (0, 1]"));
        }
        if self.episodes == 0 || self.steps_per_episode == 0 {
            return Err(Error::invalid("episodes and steps per episode must be positive"));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return Err(Error::invalid("batch size and replay capacity must be positive"));
        }
        if self.use_replay && self.batch_size > self.replay_capacity {
            return Err(Error::invalid("batch size exceeds replay capacity"));
        }
        if !positive(self.tau) || self.tau > 1.0 {
            return Err(Error::invalid("tau must lie in (0, 1]"));
        }
        if !(self.action_norm_penalty >= 0.0) || !self.action_norm_penalty.is_finite() {
            return Err(Error::invalid("action norm penalty must be non-negative"));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        if self.test_size == 0 {
            return Err(Error::invalid("test set size must be positive"));
        }
        Ok(())
    }

    /// Exploration variance in effect during episode `episode` (0-based).
    pub fn sigma_p2_at(&self, episode: usize) -> f64 {
        self.sigma_p2_init * libm::pow(self.sigma_p2_decay, episode as f64)
    }
}

/// One point of the learning curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub episode: usize,
    /// Exploration variance used during the episode.
    pub sigma_p2: f64,
    pub avg_rate_pair: RatePair,
    pub avg_sum_rate: f64,
    pub ratio_to_slnr: f64,
    pub mean_critic_loss: f64,
    /// Degenerate training actions replaced by the fallback precoder.
    pub train_fallbacks: usize,
}

impl EpisodeRecord {
    pub fn pct_of_slnr_baseline(&self) -> f64 {
        100.0 * self.ratio_to_slnr
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub actor1: ActorPolicy,
    pub actor2: ActorPolicy,
    pub critic: CriticNetwork,
}

impl TrainedModel {
    pub fn policy(&self, use_pae: bool) -> LearnedPolicy {
        LearnedPolicy::new(self.actor1.clone(), self.actor2.clone(), use_pae)
    }
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub model: TrainedModel,
    pub curve: Vec<EpisodeRecord>,
    pub final_report: EvaluationReport,
    pub total_fallbacks: usize,
}

struct Targets {
    actor1: ActorPolicy,
    actor2: ActorPolicy,
    critic: CriticNetwork,
}

/// Step-wise MA-DDPG trainer.
///
/// Every component draws from its own stream of the run seed: channels,
/// exploration noise, network initialization and replay sampling.
pub struct Trainer<'a> {
    cfg: TrainingConfig,
    env: EnvConfig,
    test_set: &'a TestSet,
    baselines: BaselineAverages,
    actor1: ActorPolicy,
    actor2: ActorPolicy,
    critic: CriticNetwork,
    targets: Option<Targets>,
    opt_actor1: Optimizer,
    opt_actor2: Optimizer,
    opt_critic: Optimizer,
    replay: ReplayBuffer,
    channel_rng: RngStream,
    noise_rng: RngStream,
    replay_rng: RngStream,
    ws: UpdateWorkspace,
    batch: TransitionBatch,
    channel: ChannelRealization,
    state: Vec<f64>,
    episode: usize,
    curve: Vec<EpisodeRecord>,
    total_fallbacks: usize,
}

fn global_state(ch: &ChannelRealization, use_pae: bool, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    write_observation(&ch.h1, &ch.g1, use_pae, out)?;
    write_observation(&ch.h2, &ch.g2, use_pae, out)
}

impl<'a> Trainer<'a> {
    pub fn new(cfg: &TrainingConfig, env: &EnvConfig, test_set: &'a TestSet) -> Result<Self> {
        cfg.validate()?;
        let n = env.n_t();
        let mut init_rng = RngStream::derive(cfg.seed, StreamId::Init);
        let actor1 = ActorPolicy::new_random(n, cfg.hidden, cfg.activation, &mut init_rng)?;
        let actor2 = ActorPolicy::new_random(n, cfg.hidden, cfg.activation, &mut init_rng)?;
        let critic = CriticNetwork::new_random(n, cfg.hidden, cfg.activation, &mut init_rng)?;
        let targets = cfg.use_target_networks.then(|| Targets {
            actor1: actor1.clone(),
            actor2: actor2.clone(),
            critic: critic.clone(),
        });
        let mut channel_rng = RngStream::derive(cfg.seed, StreamId::Channel);
        let channel = sample_channel(&mut channel_rng, env);
        let mut state = Vec::with_capacity(8 * n);
        global_state(&channel, cfg.use_pae, &mut state)?;
        Ok(Trainer {
            opt_actor1: Optimizer::new(cfg.optimizer, cfg.eta_a, actor1.params().param_count()),
            opt_actor2: Optimizer::new(cfg.optimizer, cfg.eta_a, actor2.params().param_count()),
            opt_critic: Optimizer::new(cfg.optimizer, cfg.eta_c, critic.params().param_count()),
            replay: ReplayBuffer::new(if cfg.use_replay { cfg.replay_capacity } else { 1 }, n)?,
            baselines: BaselineAverages::compute(test_set, env)?,
            cfg: cfg.clone(),
            env: *env,
            test_set,
            actor1,
            actor2,
            critic,
            targets,
            channel_rng,
            noise_rng: RngStream::derive(cfg.seed, StreamId::ExplorationNoise),
            replay_rng: RngStream::derive(cfg.seed, StreamId::Replay),
            ws: UpdateWorkspace::with_action_norm_penalty(cfg.action_norm_penalty),
            batch: TransitionBatch::with_n_t(n),
            channel,
            state,
            episode: 0,
            curve: Vec::new(),
            total_fallbacks: 0,
        })
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.cfg
    }

    pub fn baselines(&self) -> &BaselineAverages {
        &self.baselines
    }

    pub fn episodes_done(&self) -> usize {
        self.episode
    }

    pub fn curve(&self) -> &[EpisodeRecord] {
        &self.curve
    }

    pub fn actors(&self) -> [&ActorPolicy; 2] {
        [&self.actor1, &self.actor2]
    }

    pub fn critic(&self) -> &CriticNetwork {
        &self.critic
    }

    fn diverged(&self, step: usize, err: Error) -> Error {
        match err {
            Error::TrainingDiverged { reason, .. } => Error::TrainingDiverged {
                episode: self.episode + 1,
                step,
                reason,
            },
            other => other,
        }
    }

    /// One interaction plus one critic and one actor update per agent.
    /// Returns the critic loss, or `None` while the replay buffer is still
    /// shorter than a batch.
    fn step(&mut self, sigma_p2: f64) -> Result<(Option<f64>, usize)> {
        let n = self.env.n_t();
        let a1 = self.actor1.forward_raw(&self.state[..4 * n])?;
        let a2 = self.actor2.forward_raw(&self.state[4 * n..])?;
        let a1 = explore(&a1, sigma_p2, &mut self.noise_rng)?;
        let a2 = explore(&a2, sigma_p2, &mut self.noise_rng)?;
        let (w1, f1) = action_to_precoder(&a1)?;
        let (w2, f2) = action_to_precoder(&a2)?;
        let rates = rate_pair(&self.channel, &w1, &w2, &self.env)?;
        let reward = collective_reward(&rates, self.cfg.alpha)?;

        let next_channel = sample_channel(&mut self.channel_rng, &self.env);
        let mut next_state = Vec::with_capacity(8 * n);
        global_state(&next_channel, self.cfg.use_pae, &mut next_state)?;
        self.replay.push(Transition {
            state: core::mem::replace(&mut self.state, next_state.clone()),
            action1: a1,
            action2: a2,
            reward,
            next_state,
        })?;
        self.channel = next_channel;

        let loss = self.update()?;
        Ok((loss, f1 as usize + f2 as usize))
    }

    fn update(&mut self) -> Result<Option<f64>> {
        if self.cfg.use_replay {
            if self.replay.len() < self.cfg.batch_size {
                return Ok(None);
            }
            self.replay
                .sample_into(self.cfg.batch_size, &mut self.replay_rng, &mut self.batch)?;
        } else {
            self.batch.clear();
            let latest = self.replay.latest().ok_or(Error::Empty("no transition stored"))?;
            self.batch.push(latest)?;
        }

        let nets = match &self.targets {
            Some(t) => TargetNets {
                critic: &t.critic,
                actor1: &t.actor1,
                actor2: &t.actor2,
            },
            None => TargetNets {
                critic: &self.critic,
                actor1: &self.actor1,
                actor2: &self.actor2,
            },
        };
        let targets = td_targets(nets, &self.batch, self.cfg.gamma, &mut self.ws)?;
        let loss = critic_update(&mut self.critic, &mut self.opt_critic, &self.batch, &targets, &mut self.ws)?;
        actors_update(
            [&mut self.actor1, &mut self.actor2],
            [&mut self.opt_actor1, &mut self.opt_actor2],
            &self.critic,
            &self.batch.states,
            self.batch.len(),
            AgentMask::BOTH,
            &mut self.ws,
        )?;
        if let Some(t) = &mut self.targets {
            let tau = self.cfg.tau;
            t.critic.params_mut().soft_update_from(self.critic.params(), tau);
            t.actor1.params_mut().soft_update_from(self.actor1.params(), tau);
            t.actor2.params_mut().soft_update_from(self.actor2.params(), tau);
        }
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged {
                episode: 0,
                step: 0,
                reason: "non-finite critic loss",
            });
        }
        Ok(Some(loss))
    }

    /// Runs one episode and appends its test-set evaluation to the curve.
    pub fn run_episode(&mut self) -> Result<EpisodeRecord> {
        let sigma_p2 = self.cfg.sigma_p2_at(self.episode);
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        let mut fallbacks = 0;
        for step in 0..self.cfg.steps_per_episode {
            let (loss, fb) = self.step(sigma_p2).map_err(|e| self.diverged(step + 1, e))?;
            fallbacks += fb;
            if let Some(l) = loss {
                loss_sum += l;
                loss_count += 1;
            }
        }
        self.total_fallbacks += fallbacks;
        let report = self.evaluate()?;
        let rec = EpisodeRecord {
            episode: self.episode + 1,
            sigma_p2,
            avg_rate_pair: report.avg_rate_pair,
            avg_sum_rate: report.avg_sum_rate,
            ratio_to_slnr: report.ratio_to_slnr,
            mean_critic_loss: if loss_count > 0 {
                loss_sum / loss_count as f64
            } else {
                f64::NAN
            },
            train_fallbacks: fallbacks,
        };
        self.episode += 1;
        self.curve.push(rec);
        Ok(rec)
    }

    /// Noise-free evaluation of the current actors on the test set.
    pub fn evaluate(&self) -> Result<EvaluationReport> {
        let (rates, fallbacks) = actor_rates(
            [&self.actor1, &self.actor2],
            self.cfg.use_pae,
            self.test_set.channels(),
            &self.env,
        )?;
        let n = rates.len() as f64;
        let (s1, s2) = rates.iter().fold((0.0, 0.0), |(a, b), r| (a + r.r1, b + r.r2));
        let avg = RatePair::new(s1 / n, s2 / n);
        Ok(EvaluationReport {
            samples: rates.len(),
            avg_rate_pair: avg,
            avg_sum_rate: avg.sum(),
            baselines: self.baselines,
            ratio_to_slnr: avg.sum() / self.baselines.slnr_slnr.sum(),
            fallback_count: fallbacks,
        })
    }

    pub fn finish(self) -> Result<TrainingOutcome> {
        let final_report = self.evaluate()?;
        Ok(TrainingOutcome {
            model: TrainedModel {
                actor1: self.actor1,
                actor2: self.actor2,
                critic: self.critic,
            },
            curve: self.curve,
            final_report,
            total_fallbacks: self.total_fallbacks,
        })
    }
}

/// Trains for `cfg.episodes` episodes, reporting each learning-curve point
/// to `observer`, which may stop training early with `ControlFlow::Break`.
pub fn train(
    cfg: &TrainingConfig,
    env: &EnvConfig,
    test_set: &TestSet,
    observer: &mut dyn FnMut(&EpisodeRecord) -> ControlFlow<()>,
) -> Result<TrainingOutcome> {
    let mut trainer = Trainer::new(cfg, env, test_set)?;
    for _ in 0..cfg.episodes {
        let rec = trainer.run_episode()?;
        if observer(&rec).is_break() {
            break;
        }
    }
    trainer.finish()
}
