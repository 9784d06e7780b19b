//! Decentralized actors, the centralized critic and their update rules.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::mlp::{Activation, MlpParams, MlpWorkspace};
use super::optim::Optimizer;
use super::replay::{Transition, TransitionBatch};
use crate::features::AgentObservation;
use crate::numerics::{ComplexVec, RngStream, EPS_NORM};
use crate::{Error, Result};

/// Deterministic policy `a_i = μ(s_i)`: 4·n_t observation reals in,
/// 2·n_t interleaved action reals out.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorPolicy {
    params: MlpParams,
}

impl ActorPolicy {
    pub fn new_random(n_t: usize, hidden: [usize; 3], activation: Activation, rng: &mut RngStream) -> Result<Self> {
        let sizes = [4 * n_t, hidden[0], hidden[1], hidden[2], 2 * n_t];
        Ok(ActorPolicy {
            params: MlpParams::init_uniform(&sizes, activation, rng)?,
        })
    }

    pub fn from_params(params: MlpParams) -> Result<Self> {
        let (i, o) = (params.input_size(), params.output_size());
        if i % 4 != 0 || o * 2 != i {
            return Err(Error::invalid("actor must map 4·n_t inputs to 2·n_t outputs"));
        }
        Ok(ActorPolicy { params })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut MlpParams {
        &mut self.params
    }

    pub fn n_t(&self) -> usize {
        self.params.input_size() / 4
    }

    pub fn forward(&self, obs: &AgentObservation) -> Result<Vec<f64>> {
        self.forward_raw(obs.values())
    }

    pub fn forward_raw(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.params.forward(obs)
    }
}

/// `Q(s, a_1, a_2)` with input layout `[s_1, s_2, a_1, a_2]` (12·n_t reals).
#[derive(Clone, Debug, PartialEq)]
pub struct CriticNetwork {
    params: MlpParams,
}

impl CriticNetwork {
    pub fn new_random(n_t: usize, hidden: [usize; 3], activation: Activation, rng: &mut RngStream) -> Result<Self> {
        let sizes = [12 * n_t, hidden[0], hidden[1], hidden[2], 1];
        Ok(CriticNetwork {
            params: MlpParams::init_uniform(&sizes, activation, rng)?,
        })
    }

    pub fn from_params(params: MlpParams) -> Result<Self> {
        if params.input_size() % 12 != 0 || params.output_size() != 1 {
            return Err(Error::invalid("critic must map 12·n_t inputs to one output"));
        }
        Ok(CriticNetwork { params })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut MlpParams {
        &mut self.params
    }

    pub fn n_t(&self) -> usize {
        self.params.input_size() / 12
    }

    pub fn forward(&self, global_state: &[f64], a1: &[f64], a2: &[f64]) -> Result<f64> {
        let n = self.n_t();
        for (len, expected) in [(global_state.len(), 8 * n), (a1.len(), 2 * n), (a2.len(), 2 * n)] {
            if len != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    actual: len,
                });
            }
        }
        let mut input = Vec::with_capacity(12 * n);
        input.extend_from_slice(global_state);
        input.extend_from_slice(a1);
        input.extend_from_slice(a2);
        Ok(self.params.forward(&input)?[0])
    }
}

/// Interleaved raw action → unit-norm precoder. Returns `true` as the second
/// element when the raw action was degenerate and the `[1, 0, ..., 0]`
/// fallback was used.
pub fn action_to_precoder(raw: &[f64]) -> Result<(ComplexVec, bool)> {
    let v = ComplexVec::from_interleaved(raw)?;
    if v.is_empty() {
        return Err(Error::invalid("empty action"));
    }
    let norm = v.norm();
    if norm <= EPS_NORM || !norm.is_finite() {
        let mut e0 = vec![Complex64::new(0.0, 0.0); v.len()];
        e0[0] = Complex64::new(1.0, 0.0);
        return Ok((ComplexVec::new(e0), true));
    }
    Ok((v.scale_real(1.0 / norm), false))
}

/// Adds CN(0, σ_p²) noise to every complex action element.
pub fn explore(raw: &[f64], sigma_p2: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(sigma_p2 >= 0.0) {
        return Err(Error::invalid("exploration variance must be non-negative"));
    }
    let std = libm::sqrt(sigma_p2 / 2.0);
    Ok(raw.iter().map(|&a| a + std * rng.standard_normal()).collect())
}

/// Networks used to form TD targets: the live ones, or their target copies.
#[derive(Clone, Copy, Debug)]
pub struct TargetNets<'a> {
    pub critic: &'a CriticNetwork,
    pub actor1: &'a ActorPolicy,
    pub actor2: &'a ActorPolicy,
}

/// `Y = r + γ Q(s', μ_1(s'_1), μ_2(s'_2))` with noise-free next actions.
pub fn td_target(nets: TargetNets<'_>, t: &Transition, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(t.reward);
    }
    let n = nets.critic.n_t();
    let a1 = nets.actor1.forward_raw(&t.next_state[..4 * n])?;
    let a2 = nets.actor2.forward_raw(&t.next_state[4 * n..])?;
    Ok(t.reward + gamma * nets.critic.forward(&t.next_state, &a1, &a2)?)
}

/// Scratch space for the batched update rules.
#[derive(Clone, Debug, Default)]
pub struct UpdateWorkspace {
    critic: MlpWorkspace,
    actor1: MlpWorkspace,
    actor2: MlpWorkspace,
    input: Vec<f64>,
    obs1: Vec<f64>,
    obs2: Vec<f64>,
    grad_out: Vec<f64>,
    grad_in: Vec<f64>,
    grad_a: Vec<f64>,
    critic_grads: Option<MlpParams>,
    actor_grads: [Option<MlpParams>; 2],
    norm_penalty: f64,
}

impl UpdateWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Actor objectives become `Q − κ·mean_b (‖a_i‖² − 1)²`. The reward does
    /// not depend on the raw action scale, so without this term the critic's
    /// extrapolation lets the raw norm drift without bound.
    pub fn with_action_norm_penalty(kappa: f64) -> Self {
        UpdateWorkspace {
            norm_penalty: kappa,
            ..Self::default()
        }
    }

    pub fn action_norm_penalty(&self) -> f64 {
        self.norm_penalty
    }
}

fn stack_critic_input(states: &[f64], a1: &[f64], a2: &[f64], n: usize, batch: usize, out: &mut Vec<f64>) {
    out.clear();
    for b in 0..batch {
        out.extend_from_slice(&states[b * 8 * n..(b + 1) * 8 * n]);
        out.extend_from_slice(&a1[b * 2 * n..(b + 1) * 2 * n]);
        out.extend_from_slice(&a2[b * 2 * n..(b + 1) * 2 * n]);
    }
}

fn split_observations(states: &[f64], n: usize, batch: usize, obs1: &mut Vec<f64>, obs2: &mut Vec<f64>) {
    obs1.clear();
    obs2.clear();
    for b in 0..batch {
        let row = &states[b * 8 * n..(b + 1) * 8 * n];
        obs1.extend_from_slice(&row[..4 * n]);
        obs2.extend_from_slice(&row[4 * n..]);
    }
}

/// TD targets for a whole batch.
pub fn td_targets(nets: TargetNets<'_>, batch: &TransitionBatch, gamma: f64, ws: &mut UpdateWorkspace) -> Result<Vec<f64>> {
    if gamma == 0.0 {
        return Ok(batch.rewards.clone());
    }
    let n = nets.critic.n_t();
    let len = batch.len();
    split_observations(&batch.next_states, n, len, &mut ws.obs1, &mut ws.obs2);
    nets.actor1.params().forward_batch(&ws.obs1, len, &mut ws.actor1)?;
    nets.actor2.params().forward_batch(&ws.obs2, len, &mut ws.actor2)?;
    stack_critic_input(
        &batch.next_states,
        ws.actor1.output(),
        ws.actor2.output(),
        n,
        len,
        &mut ws.input,
    );
    nets.critic.params().forward_batch(&ws.input, len, &mut ws.critic)?;
    Ok(batch
        .rewards
        .iter()
        .zip(ws.critic.output())
        .map(|(r, q)| r + gamma * q)
        .collect())
}

/// One descent step on `½ mean (Y − Q)²`. Returns the mean squared TD error
/// measured before the step.
///
/// With batch size one and plain SGD this is exactly
/// `θ ← θ + η_c (Y − Q) ∇_θ Q`.
pub fn critic_update(
    critic: &mut CriticNetwork,
    optimizer: &mut Optimizer,
    batch: &TransitionBatch,
    targets: &[f64],
    ws: &mut UpdateWorkspace,
) -> Result<f64> {
    let len = batch.len();
    if len == 0 {
        return Err(Error::Empty("critic_update needs a non-empty batch"));
    }
    if targets.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: targets.len(),
        });
    }
    let n = critic.n_t();
    stack_critic_input(&batch.states, &batch.actions1, &batch.actions2, n, len, &mut ws.input);
    critic.params.forward_batch(&ws.input, len, &mut ws.critic)?;

    ws.grad_out.clear();
    let mut loss = 0.0;
    for (q, y) in ws.critic.output().iter().zip(targets) {
        let err = q - y;
        loss += err * err;
        ws.grad_out.push(err / len as f64);
    }
    let grads = ws.critic_grads.get_or_insert_with(|| critic.params.clone());
    critic.params.backward(&mut ws.critic, &ws.grad_out, Some(grads), None)?;
    if !grads.is_finite() {
        return Err(Error::TrainingDiverged {
            episode: 0,
            step: 0,
            reason: "non-finite critic gradient",
        });
    }
    optimizer.step(&mut critic.params, grads);
    Ok(loss / len as f64)
}

/// Which actors to update in [`actors_update`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AgentMask(pub [bool; 2]);

impl AgentMask {
    pub const BOTH: AgentMask = AgentMask([true, true]);

    pub fn only(agent: usize) -> Self {
        let mut m = [false; 2];
        m[agent] = true;
        AgentMask(m)
    }
}

/// Deterministic policy gradients `mean_b ∇_φ μ_i(s_i) ∇_{a_i} Q(s, a_1, a_2)`
/// evaluated at `a_j = μ_j(s_j)` for both agents, from one critic pass.
///
/// Returns the ascent direction for each selected agent together with the
/// batch-mean Q at the current policy outputs.
pub fn policy_gradients(
    actors: [&ActorPolicy; 2],
    critic: &CriticNetwork,
    states: &[f64],
    batch: usize,
    mask: AgentMask,
    ws: &mut UpdateWorkspace,
) -> Result<f64> {
    if batch == 0 {
        return Err(Error::Empty("actor update needs a non-empty batch"));
    }
    let n = critic.n_t();
    if states.len() != batch * 8 * n {
        return Err(Error::LengthMismatch {
            expected: batch * 8 * n,
            actual: states.len(),
        });
    }
    split_observations(states, n, batch, &mut ws.obs1, &mut ws.obs2);
    actors[0].params.forward_batch(&ws.obs1, batch, &mut ws.actor1)?;
    actors[1].params.forward_batch(&ws.obs2, batch, &mut ws.actor2)?;
    stack_critic_input(states, ws.actor1.output(), ws.actor2.output(), n, batch, &mut ws.input);
    critic.params.forward_batch(&ws.input, batch, &mut ws.critic)?;
    let mean_q = ws.critic.output().iter().sum::<f64>() / batch as f64;

    ws.grad_out.clear();
    ws.grad_out.resize(batch, 1.0 / batch as f64);
    critic.params.backward(&mut ws.critic, &ws.grad_out, None, Some(&mut ws.grad_in))?;

    for agent in 0..2 {
        if !mask.0[agent] {
            continue;
        }
        let offset = 8 * n + 2 * n * agent;
        ws.grad_a.clear();
        for b in 0..batch {
            let row = &ws.grad_in[b * 12 * n..(b + 1) * 12 * n];
            ws.grad_a.extend_from_slice(&row[offset..offset + 2 * n]);
        }
        if ws.norm_penalty != 0.0 {
            let out = if agent == 0 { ws.actor1.output() } else { ws.actor2.output() };
            let scale = 4.0 * ws.norm_penalty / batch as f64;
            for (g, a) in ws.grad_a.chunks_exact_mut(2 * n).zip(out.chunks_exact(2 * n)) {
                let excess = a.iter().map(|x| x * x).sum::<f64>() - 1.0;
                for (gk, ak) in g.iter_mut().zip(a) {
                    *gk -= scale * excess * ak;
                }
            }
        }
        let actor = actors[agent];
        let grads = ws.actor_grads[agent].get_or_insert_with(|| actor.params.clone());
        let actor_ws = if agent == 0 { &mut ws.actor1 } else { &mut ws.actor2 };
        actor.params.backward(actor_ws, &ws.grad_a, Some(grads), None)?;
        if !grads.is_finite() {
            return Err(Error::TrainingDiverged {
                episode: 0,
                step: 0,
                reason: "non-finite actor gradient",
            });
        }
    }
    Ok(mean_q)
}

impl UpdateWorkspace {
    /// Ascent direction computed by the last [`policy_gradients`] call.
    pub fn policy_gradient(&self, agent: usize) -> Option<&MlpParams> {
        self.actor_grads[agent].as_ref()
    }

    pub fn critic_gradient(&self) -> Option<&MlpParams> {
        self.critic_grads.as_ref()
    }
}

fn ascend(actor: &mut ActorPolicy, optimizer: &mut Optimizer, ascent: &MlpParams, scratch: &mut MlpParams) {
    for (s, g) in scratch.iter_mut().zip(ascent.iter()) {
        *s = -g;
    }
    optimizer.step(&mut actor.params, scratch);
}

/// Gradient ascent on `J(μ_i)` for both actors simultaneously: each actor's
/// gradient holds the other agent's action at its pre-update policy output.
/// Returns the batch-mean Q before the step.
pub fn actors_update(
    actors: [&mut ActorPolicy; 2],
    optimizers: [&mut Optimizer; 2],
    critic: &CriticNetwork,
    states: &[f64],
    batch: usize,
    mask: AgentMask,
    ws: &mut UpdateWorkspace,
) -> Result<f64> {
    let [a1, a2] = actors;
    let mean_q = policy_gradients([&*a1, &*a2], critic, states, batch, mask, ws)?;
    let [o1, o2] = optimizers;
    for (agent, actor, opt) in [(0usize, a1, o1), (1, a2, o2)] {
        if !mask.0[agent] {
            continue;
        }
        let ascent = ws.actor_grads[agent].take().ok_or(Error::invalid("missing actor gradient"))?;
        let mut scratch = ascent.clone();
        ascend(actor, opt, &ascent, &mut scratch);
        ws.actor_grads[agent] = Some(ascent);
    }
    Ok(mean_q)
}

/// Updates actor `agent` (0 or 1) against the critic, with the other agent
/// acting according to `other`.
pub fn actor_update(
    actor: &mut ActorPolicy,
    optimizer: &mut Optimizer,
    critic: &CriticNetwork,
    other: &ActorPolicy,
    states: &[f64],
    batch: usize,
    agent: usize,
    ws: &mut UpdateWorkspace,
) -> Result<f64> {
    if agent > 1 {
        return Err(Error::invalid("agent index must be 0 or 1"));
    }
    let actors = if agent == 0 { [&*actor, other] } else { [other, &*actor] };
    let mean_q = policy_gradients(actors, critic, states, batch, AgentMask::only(agent), ws)?;
    let ascent = ws.actor_grads[agent].take().ok_or(Error::invalid("missing actor gradient"))?;
    let mut scratch = ascent.clone();
    ascend(actor, optimizer, &ascent, &mut scratch);
    ws.actor_grads[agent] = Some(ascent);
    Ok(mean_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::madrl::optim::OptimizerKind;

    #[test]
    fn action_to_precoder_examples() {
        let (w, fb) = action_to_precoder(&[3.0, 0.0, 0.0, 4.0, 0.0, 0.0]).unwrap();
        assert!(!fb);
        assert!((w[0] - Complex64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((w[1] - Complex64::new(0.0, 0.8)).norm() < 1e-15);
        assert_eq!(w[2], Complex64::new(0.0, 0.0));

        let (w, fb) = action_to_precoder(&[0.0; 6]).unwrap();
        assert!(fb);
        assert_eq!(w, ComplexVec::from_pairs(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]));

        assert!(action_to_precoder(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn explore_without_noise_is_identity() {
        let raw = [0.1, -0.2, 0.3];
        let mut rng = RngStream::new(0, 2);
        assert_eq!(explore(&raw, 0.0, &mut rng).unwrap(), raw.to_vec());
        assert!(explore(&raw, -0.1, &mut rng).is_err());
    }

    fn small_nets(seed: u64) -> (ActorPolicy, ActorPolicy, CriticNetwork) {
        let mut rng = RngStream::new(seed, 3);
        let a1 = ActorPolicy::new_random(1, [4, 4, 4], Activation::Tanh, &mut rng).unwrap();
        let a2 = ActorPolicy::new_random(1, [4, 4, 4], Activation::Tanh, &mut rng).unwrap();
        let c = CriticNetwork::new_random(1, [5, 5, 5], Activation::Tanh, &mut rng).unwrap();
        (a1, a2, c)
    }

    fn transition(rng: &mut RngStream, reward: f64) -> Transition {
        let mut v = |k: usize| (0..k).map(|_| rng.standard_normal()).collect::<Vec<f64>>();
        Transition {
            state: v(8),
            action1: v(2),
            action2: v(2),
            reward,
            next_state: v(8),
        }
    }

    #[test]
    fn td_target_examples() {
        let (a1, a2, c) = small_nets(1);
        let nets = TargetNets {
            critic: &c,
            actor1: &a1,
            actor2: &a2,
        };
        let mut rng = RngStream::new(2, 0);
        let t = transition(&mut rng, 1.5);
        assert_eq!(td_target(nets, &t, 0.0).unwrap(), 1.5);

        let next_a1 = a1.forward_raw(&t.next_state[..4]).unwrap();
        let next_a2 = a2.forward_raw(&t.next_state[4..]).unwrap();
        let q = c.forward(&t.next_state, &next_a1, &next_a2).unwrap();
        let y = td_target(nets, &t, 0.9).unwrap();
        assert!((y - (1.5 + 0.9 * q)).abs() < 1e-14);

        let batch = TransitionBatch::from_transitions(&[t.clone(), t]).unwrap();
        let ys = td_targets(nets, &batch, 0.9, &mut UpdateWorkspace::new()).unwrap();
        assert!((ys[0] - y).abs() < 1e-14 && (ys[1] - y).abs() < 1e-14);
    }

    #[test]
    fn critic_at_target_does_not_move() {
        let (_, _, mut c) = small_nets(3);
        let mut rng = RngStream::new(4, 0);
        let t = transition(&mut rng, 1.0);
        let q = c.forward(&t.state, &t.action1, &t.action2).unwrap();
        c.params_mut().layers_mut().last_mut().unwrap().biases_mut()[0] += 1.0 - q;
        let batch = TransitionBatch::from_transitions(&[t.clone()]).unwrap();
        let before = c.clone();
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, c.params().param_count());
        let target = [c.forward(&t.state, &t.action1, &t.action2).unwrap()];
        critic_update(&mut c, &mut opt, &batch, &target, &mut UpdateWorkspace::new()).unwrap();
        assert!(c.params().distance_sqr(before.params()).sqrt() < 1e-12);
    }

    #[test]
    fn critic_loss_decreases_on_fixed_batch() {
        let (_, _, mut c) = small_nets(5);
        let mut rng = RngStream::new(6, 0);
        let items: Vec<Transition> = (0..16).map(|k| transition(&mut rng, k as f64 * 0.1)).collect();
        let batch = TransitionBatch::from_transitions(&items).unwrap();
        let mut opt = Optimizer::new(OptimizerKind::Adam, 1e-2, c.params().param_count());
        let mut ws = UpdateWorkspace::new();
        let first = critic_update(&mut c, &mut opt, &batch, &batch.rewards, &mut ws).unwrap();
        let mut last = first;
        for _ in 0..100 {
            last = critic_update(&mut c, &mut opt, &batch, &batch.rewards, &mut ws).unwrap();
        }
        assert!(last < first, "{last} !< {first}");
    }

    #[test]
    fn zero_actor_rate_is_a_no_op() {
        let (mut a1, a2, c) = small_nets(7);
        let before = a1.clone();
        let mut rng = RngStream::new(8, 0);
        let states: Vec<f64> = (0..8 * 4).map(|_| rng.standard_normal()).collect();
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.0, a1.params().param_count());
        actor_update(&mut a1, &mut opt, &c, &a2, &states, 4, 0, &mut UpdateWorkspace::new()).unwrap();
        assert_eq!(a1, before);
    }

    #[test]
    fn actor_step_does_not_decrease_mean_q() {
        let (mut a1, mut a2, c) = small_nets(9);
        let mut rng = RngStream::new(10, 0);
        let states: Vec<f64> = (0..8 * 32).map(|_| rng.standard_normal()).collect();
        let mut ws = UpdateWorkspace::new();
        for agent in 0..2 {
            let (actor, other) = if agent == 0 { (&mut a1, &a2) } else { (&mut a2, &a1) };
            let mut opt = Optimizer::new(OptimizerKind::Sgd, 1e-5, actor.params().param_count());
            let before = actor_update(actor, &mut opt, &c, other, &states, 32, agent, &mut ws).unwrap();
            let actors = if agent == 0 { [&*actor, other] } else { [other, &*actor] };
            let after = policy_gradients(actors, &c, &states, 32, AgentMask([false, false]), &mut ws).unwrap();
            assert!(after >= before, "agent {agent}: {after} < {before}");
        }
    }
}
