//! Function approximators shared by the actor, critic, discriminator and the
//! prediction baseline.

pub mod checkpoint;
pub mod loss;
pub mod network;
pub mod optim;
pub mod params;

pub use loss::{loss_gradients, Loss, Scaled};
pub use network::{
    actor_forward, backward, critic_forward, discriminator_forward, discriminator_logit, forward,
    Activations,
};
pub use optim::{Optimizer, OptimizerConfig};
pub use params::{init_params, Head, NetworkSpec, ParameterSet, TensorInfo, CONV1_CHANNELS, CONV2_CHANNELS};
