//! Multi-agent DDPG with a centralized critic.
//!
//! Each base station runs its own deterministic actor on local
//! observations. During training a single critic sees the global state and
//! both actions; at deployment only the actors are needed.

pub mod agents;
pub mod mlp;
pub mod optim;
pub mod replay;
pub mod train;

pub use agents::{
    action_to_precoder, actor_update, actors_update, critic_update, explore, policy_gradients, td_target, td_targets,
    ActorPolicy, AgentMask, CriticNetwork, TargetNets, UpdateWorkspace,
};
pub use mlp::{Activation, DenseLayer, MlpParams, MlpWorkspace};
pub use optim::{Optimizer, OptimizerKind};
pub use replay::{ReplayBuffer, Transition, TransitionBatch};
pub use train::{train, EpisodeRecord, TrainedModel, Trainer, TrainingConfig, TrainingOutcome};
