//! Learned reward, the one-step Q identity, and the three training losses.

use crate::error::{Error, Result};
use crate::nn::loss::accumulate;
use crate::nn::network::{backward, check_input, forward, sigmoid};
use crate::nn::{critic_forward, discriminator_forward, Head, Loss, ParameterSet};
use crate::trajectory::{env_step, Action, State};

/// Probability clamp applied before the logit.
pub const REWARD_EPS: f64 = 1e-6;

/// Largest reward magnitude: `ln((1 - eps) / eps)`.
pub fn reward_bound() -> f64 {
    logit_of_clamped(1.0)
}

fn logit_of_clamped(p: f64) -> f64 {
    let p = p.clamp(REWARD_EPS, 1.0 - REWARD_EPS);
    (p / (1.0 - p)).ln()
}

/// Reward and its derivative with respect to the discriminator logit.
///
/// `logit(sigmoid(z)) = z`, so the derivative is 1 unless the clamp is active.
fn reward_from_logit(z: f64) -> (f64, f64) {
    let p = sigmoid(z);
    let slope = if p > REWARD_EPS && p < 1.0 - REWARD_EPS {
        1.0
    } else {
        0.0
    };
    (logit_of_clamped(p), slope)
}

/// The learned reward for arriving at `next`: the logit of the clamped
/// discriminator output.
pub fn reward_of(disc: &ParameterSet, next: &State) -> Result<f64> {
    Ok(logit_of_clamped(discriminator_forward(disc, next)?))
}

/// `Q(s, a) = R(s') + gamma * V(s')` with `s' = env_step(s, a)`.
///
/// The value of a full successor state is still included: episodes end by
/// length, not by an absorbing failure.
pub fn q_value(
    critic: &ParameterSet,
    disc: &ParameterSet,
    state: &State,
    action: Action,
    gamma: f64,
) -> Result<f64> {
    let next = env_step(state, action)?;
    Ok(reward_of(disc, &next)? + gamma * critic_forward(critic, &next)?)
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean binary cross-entropy, expert states labelled 1 and generated 0.
pub struct DiscriminatorLoss<'a> {
    pub real: &'a [State],
    pub fake: &'a [State],
}

impl DiscriminatorLoss<'_> {
    fn labelled(&self) -> Vec<(&State, f64)> {
        self.real
            .iter()
            .map(|s| (s, 1.0))
            .chain(self.fake.iter().map(|s| (s, 0.0)))
            .collect()
    }

    fn check(&self, params: &ParameterSet) -> Result<()> {
        if self.real.is_empty() || self.fake.is_empty() {
            return Err(Error::invalid("discriminator batches must be non-empty"));
        }
        for s in self.real.iter().chain(self.fake) {
            check_input(params, s, Head::Discriminator)?;
        }
        Ok(())
    }
}

impl Loss for DiscriminatorLoss<'_> {
    fn value(&self, params: &ParameterSet) -> Result<f64> {
        self.check(params)?;
        let items = self.labelled();
        let n = items.len() as f64;
        Ok(items
            .iter()
            .map(|(s, y)| {
                let z = forward(params, &s.channels()).logits[0];
                softplus(z) - y * z
            })
            .sum::<f64>()
            / n)
    }

    fn value_and_gradient(&self, params: &ParameterSet) -> Result<(f64, ParameterSet)> {
        self.check(params)?;
        let items = self.labelled();
        let n = items.len() as f64;
        let (sum, grad) = accumulate(&items, params, |(s, y), g| {
            let acts = forward(params, &s.channels());
            let z = acts.logits[0];
            backward(params, &acts, &[(sigmoid(z) - y) / n], Some(g), None);
            softplus(z) - y * z
        });
        Ok((sum / n, grad))
    }
}

/// One environment transition `(s, a, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: Action,
    pub next: State,
}

impl Transition {
    pub fn new(state: State, action: Action) -> Result<Self> {
        let next = env_step(&state, action)?;
        Ok(Transition {
            state,
            action,
            next,
        })
    }
}

/// Mean squared Bellman residual `(V(s) - [R(s') + gamma * V_target(s')])^2`.
///
/// Targets are computed once at construction and treated as constants.
pub struct BellmanLoss<'a> {
    transitions: &'a [Transition],
    targets: Vec<f64>,
}

impl<'a> BellmanLoss<'a> {
    pub fn new(
        disc: &ParameterSet,
        target_critic: &ParameterSet,
        transitions: &'a [Transition],
        gamma: f64,
    ) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::invalid("critic batch must be non-empty"));
        }
        let targets = transitions
            .iter()
            .map(|tr| Ok(reward_of(disc, &tr.next)? + gamma * critic_forward(target_critic, &tr.next)?))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(bad) = targets.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("Bellman target {bad}")));
        }
        Ok(BellmanLoss {
            transitions,
            targets,
        })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn check(&self, params: &ParameterSet) -> Result<()> {
        for tr in self.transitions {
            check_input(params, &tr.state, Head::Critic)?;
        }
        Ok(())
    }
}

impl Loss for BellmanLoss<'_> {
    fn value(&self, params: &ParameterSet) -> Result<f64> {
        self.check(params)?;
        let n = self.transitions.len() as f64;
        let mut sum = 0.0;
        for (tr, y) in self.transitions.iter().zip(&self.targets) {
            let r = forward(params, &tr.state.channels()).logits[0] - y;
            sum += r * r;
        }
        Ok(sum / n)
    }

    fn value_and_gradient(&self, params: &ParameterSet) -> Result<(f64, ParameterSet)> {
        self.check(params)?;
        let n = self.transitions.len() as f64;
        let items: Vec<(&Transition, f64)> =
            self.transitions.iter().zip(self.targets.iter().copied()).collect();
        let (sum, grad) = accumulate(&items, params, |(tr, y), g| {
            let acts = forward(params, &tr.state.channels());
            let r = acts.logits[0] - y;
            backward(params, &acts, &[2.0 * r / n], Some(g), None);
            r * r
        });
        Ok((sum / n, grad))
    }
}

/// Negated mean `Q(s, actor(s))`, differentiated through the explicit
/// transition into both the reward and the successor value.
pub struct ActorLoss<'a> {
    pub critic: &'a ParameterSet,
    pub disc: &'a ParameterSet,
    pub states: &'a [State],
    pub gamma: f64,
}

impl ActorLoss<'_> {
    fn check(&self, params: &ParameterSet) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::invalid("actor batch must be non-empty"));
        }
        for s in self.states {
            check_input(params, s, Head::Actor)?;
            check_input(self.critic, s, Head::Critic)?;
            check_input(self.disc, s, Head::Discriminator)?;
            if s.is_full() {
                return Err(Error::EpisodeComplete {
                    horizon: s.horizon(),
                });
            }
        }
        Ok(())
    }

    /// `Q` for one state and, when `grad` is given, its contribution
    /// `-dQ/dtheta / n` accumulated into `grad`.
    fn sample(&self, params: &ParameterSet, s: &State, grad: Option<(&mut [f64], f64)>) -> f64 {
        let acts = forward(params, &s.channels());
        let (ax, ay) = (sigmoid(acts.logits[0]), sigmoid(acts.logits[1]));
        let next = env_step(s, Action::new(ax, ay)).expect("checked non-full, sigmoid in range");
        let input = next.channels();
        let d_acts = forward(self.disc, &input);
        let (reward, slope) = reward_from_logit(d_acts.logits[0]);
        let v_acts = forward(self.critic, &input);
        let q = reward + self.gamma * v_acts.logits[0];

        if let Some((g, n)) = grad {
            let t = s.horizon();
            let slot = s.len();
            let mut d_in = vec![0.0; input.len()];
            if slope != 0.0 {
                backward(self.disc, &d_acts, &[slope], None, Some(&mut d_in));
            }
            if self.gamma != 0.0 {
                backward(self.critic, &v_acts, &[self.gamma], None, Some(&mut d_in));
            }
            let (dqx, dqy) = (d_in[slot], d_in[t + slot]);
            let d_logits = [-dqx * ax * (1.0 - ax) / n, -dqy * ay * (1.0 - ay) / n];
            backward(params, &acts, &d_logits, Some(g), None);
        }
        q
    }
}

impl Loss for ActorLoss<'_> {
    fn value(&self, params: &ParameterSet) -> Result<f64> {
        self.check(params)?;
        let n = self.states.len() as f64;
        Ok(-self.states.iter().map(|s| self.sample(params, s, None)).sum::<f64>() / n)
    }

    fn value_and_gradient(&self, params: &ParameterSet) -> Result<(f64, ParameterSet)> {
        self.check(params)?;
        let n = self.states.len() as f64;
        let (sum, grad) = accumulate(self.states, params, |s, g| self.sample(params, s, Some((g, n))));
        Ok((-sum / n, grad))
    }
}
