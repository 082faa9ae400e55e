//! Single optimization steps for the three GAIL networks.
//!
//! Each update borrows the current parameters and returns new ones, so a
//! failed step leaves the caller's parameters untouched.

use crate::error::{Error, Result};
use crate::nn::{Loss, Optimizer, ParameterSet};
use crate::trajectory::State;

use super::objective::{ActorLoss, BellmanLoss, DiscriminatorLoss, Transition};

fn descend<L: Loss>(
    loss: &L,
    params: &ParameterSet,
    optimizer: &mut Optimizer,
    what: &str,
) -> Result<(ParameterSet, f64)> {
    let (value, grad) = loss.value_and_gradient(params)?;
    if !value.is_finite() || !grad.is_finite() {
        return Err(Error::NonFinite(format!("{what} loss {value}")));
    }
    let mut next = params.clone();
    optimizer.step(&mut next, &grad);
    if !next.is_finite() {
        return Err(Error::NonFinite(format!("{what} parameters after step")));
    }
    Ok((next, value))
}

/// One descent step on the discriminator's cross-entropy; returns the
/// pre-step loss.
pub fn update_discriminator(
    disc: &ParameterSet,
    real: &[State],
    fake: &[State],
    optimizer: &mut Optimizer,
) -> Result<(ParameterSet, f64)> {
    descend(&DiscriminatorLoss { real, fake }, disc, optimizer, "discriminator")
}

/// One descent step on the squared Bellman residual against the target
/// critic, followed by soft mixing of the target towards the new critic.
#[allow(clippy::too_many_arguments)]
pub fn update_critic(
    critic: &ParameterSet,
    target: &mut ParameterSet,
    disc: &ParameterSet,
    transitions: &[Transition],
    gamma: f64,
    tau: f64,
    optimizer: &mut Optimizer,
) -> Result<(ParameterSet, f64)> {
    let loss = BellmanLoss::new(disc, target, transitions, gamma)?;
    let (next, value) = descend(&loss, critic, optimizer, "critic")?;
    target.soft_update(&next, tau);
    Ok((next, value))
}

/// One ascent step on mean `Q(s, actor(s))`; returns the pre-step objective.
pub fn update_actor(
    actor: &ParameterSet,
    critic: &ParameterSet,
    disc: &ParameterSet,
    states: &[State],
    gamma: f64,
    optimizer: &mut Optimizer,
) -> Result<(ParameterSet, f64)> {
    let loss = ActorLoss {
        critic,
        disc,
        states,
        gamma,
    };
    let (next, neg) = descend(&loss, actor, optimizer, "actor")?;
    Ok((next, -neg))
}
