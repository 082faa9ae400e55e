//! Model-based generative adversarial imitation learning.
//!
//! The environment transition is known (append the action to the state), so
//! the critic learns `V(s)` rather than `Q(s, a)` and the actor is trained
//! through `Q(s, a) = R(s') + gamma * V(s')` with `s' = env_step(s, a)`.
//! The reward `R` is the logit of the discriminator's output on `s'`.

pub mod config;
pub mod objective;
pub mod rollout;
pub mod trainer;
pub mod update;

pub use config::{OptimizerKind, TrainingConfig};
pub use objective::{
    q_value, reward_bound, reward_of, ActorLoss, BellmanLoss, DiscriminatorLoss, Transition,
    REWARD_EPS,
};
pub use rollout::{rollout, rollout_with, Episode};
pub use trainer::{train_gail, GailModel, GailOutcome, MetricsRecord, RunManifest};
pub use update::{update_actor, update_critic, update_discriminator};
