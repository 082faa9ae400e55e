use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::nn::{actor_forward, ParameterSet};
use crate::trajectory::{Action, State};

use super::objective::Transition;

/// Transitions from an initial state until the horizon is reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub transitions: Vec<Transition>,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn final_state(&self) -> Option<&State> {
        self.transitions.last().map(|t| &t.next)
    }
}

/// Runs the actor from `initial` to the horizon, perturbing every action by
/// clamped Gaussian noise of standard deviation `noise_scale`.
pub fn rollout_with<R: Rng>(
    actor: &ParameterSet,
    initial: &State,
    noise_scale: f64,
    rng: &mut R,
) -> Result<Episode> {
    if initial.is_full() {
        return Err(Error::EpisodeComplete {
            horizon: initial.horizon(),
        });
    }
    let noise = (noise_scale > 0.0)
        .then(|| Normal::new(0.0, noise_scale))
        .transpose()
        .map_err(|e| Error::invalid(format!("noise scale: {e}")))?;
    let mut transitions = Vec::with_capacity(initial.horizon() - initial.len());
    let mut state = initial.clone();
    while !state.is_full() {
        let a = actor_forward(actor, &state)?;
        let action = match &noise {
            Some(n) => Action::clamped(a.0.x + n.sample(rng), a.0.y + n.sample(rng)),
            None => a,
        };
        let tr = Transition::new(state, action)?;
        state = tr.next.clone();
        transitions.push(tr);
    }
    Ok(Episode { transitions })
}

/// [`rollout_with`] driven by a generator seeded from `seed`.
pub fn rollout(
    actor: &ParameterSet,
    initial: &State,
    noise_scale: f64,
    seed: u64,
) -> Result<Episode> {
    rollout_with(actor, initial, noise_scale, &mut ChaCha8Rng::seed_from_u64(seed))
}
