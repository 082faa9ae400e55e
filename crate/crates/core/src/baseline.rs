//! Supervised next-point predictor used as the comparison model.
//!
//! Same architecture as the actor; trained by least squares on every
//! `(prefix, next point)` pair of the training set and rolled out by feeding
//! its own predictions back in.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gail::trainer::RunOutput;
use crate::gail::{RunManifest, TrainingConfig};
use crate::nn::checkpoint::{self, CheckpointManifest};
use crate::nn::loss::accumulate;
use crate::nn::network::{backward, check_input, forward, sigmoid};
use crate::nn::{actor_forward, init_params, Head, Loss, Optimizer, ParameterSet};
use crate::trajectory::{env_step, make_state, Point, State, Trajectory};

/// Mean squared distance between predicted and true next points.
pub struct PredictionLoss<'a> {
    pub pairs: &'a [(State, Point)],
}

impl Loss for PredictionLoss<'_> {
    fn value(&self, params: &ParameterSet) -> Result<f64> {
        Ok(self.value_and_gradient_inner(params, false)?.0)
    }

    fn value_and_gradient(&self, params: &ParameterSet) -> Result<(f64, ParameterSet)> {
        self.value_and_gradient_inner(params, true)
    }
}

impl PredictionLoss<'_> {
    fn value_and_gradient_inner(
        &self,
        params: &ParameterSet,
        with_grad: bool,
    ) -> Result<(f64, ParameterSet)> {
        if self.pairs.is_empty() {
            return Err(Error::invalid("prediction batch must be non-empty"));
        }
        for (s, _) in self.pairs {
            check_input(params, s, Head::Actor)?;
        }
        let n = self.pairs.len() as f64;
        let (sum, grad) = accumulate(self.pairs, params, |(s, target), g| {
            let acts = forward(params, &s.channels());
            let (px, py) = (sigmoid(acts.logits[0]), sigmoid(acts.logits[1]));
            let (ex, ey) = (px - target.x, py - target.y);
            if with_grad {
                let d = [
                    2.0 * ex * px * (1.0 - px) / n,
                    2.0 * ey * py * (1.0 - py) / n,
                ];
                backward(params, &acts, &d, Some(g), None);
            }
            ex * ex + ey * ey
        });
        Ok((sum / n, grad))
    }
}

/// Every `(prefix of length t, point t+1)` pair with `1 <= t < T`.
pub fn training_pairs(train_set: &Dataset) -> Result<Vec<(State, Point)>> {
    pair_indices(train_set)
        .into_iter()
        .map(|(i, t)| pair(train_set, i, t))
        .collect()
}

fn pair_indices(ds: &Dataset) -> Vec<(usize, usize)> {
    (0..ds.len())
        .flat_map(|i| (1..ds.horizon).map(move |t| (i, t)))
        .collect()
}

fn pair(ds: &Dataset, sample: usize, t: usize) -> Result<(State, Point)> {
    let pts = &ds.samples[sample].points;
    Ok((make_state(&pts[..t], ds.horizon)?, pts[t]))
}

/// Result of [`train_predictor`].
#[derive(Debug, Clone)]
pub struct PredictorOutcome {
    pub params: ParameterSet,
    /// Minibatch loss before each step.
    pub loss_curve: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PredictorRecord {
    step: u64,
    loss: f64,
    wall_seconds: f64,
}

fn store(dir: &Path, params: &ParameterSet, config: &TrainingConfig, step: u64) -> Result<()> {
    let manifest = CheckpointManifest::new("predictor", params, config.seed, step)
        .with_extra(serde_json::json!({ "config": config }));
    checkpoint::store(&dir.join("predictor.ckpt"), params, &manifest)
}

/// Trains the predictor for `config.total_steps` steps with the actor's
/// learning rate, its decay and the configured optimizer.
///
/// When `batch_size` covers every pair, each step is a full-batch step over
/// all pairs in a fixed order; otherwise pairs are drawn uniformly with
/// replacement.
pub fn train_predictor(
    config: &TrainingConfig,
    train_set: &Dataset,
    out_dir: Option<&Path>,
) -> Result<PredictorOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if train_set.horizon != config.horizon {
        return Err(Error::invalid(format!(
            "dataset horizon {} does not match configured horizon {}",
            train_set.horizon, config.horizon
        )));
    }
    train_set.validate()?;

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_params(&config.network(Head::Actor), config.seed.wrapping_add(1));
    let mut opt = Optimizer::new(config.actor_optimizer());
    let indices = pair_indices(train_set);
    let full_batch = if config.batch_size >= indices.len() {
        Some(training_pairs(train_set)?)
    } else {
        None
    };

    let mut output = match out_dir {
        Some(dir) => Some(RunOutput::create(
            dir,
            &RunManifest {
                model_kind: "predictor".into(),
                version: crate::VERSION.into(),
                seed: config.seed,
                data_fingerprint: train_set.fingerprint(),
                config: config.clone(),
            },
        )?),
        None => None,
    };
    if let Some(out) = &output {
        store(&out.checkpoint_dir(0), &params, config, 0)?;
    }

    let mut loss_curve = Vec::with_capacity(config.total_steps as usize);
    for step in 1..=config.total_steps {
        opt.set_lr(config.actor_lr * config.lr_scale(step));
        let sampled;
        let batch = match &full_batch {
            Some(all) => all.as_slice(),
            None => {
                sampled = (0..config.batch_size)
                    .map(|_| {
                        let (i, t) = indices[rng.random_range(0..indices.len())];
                        pair(train_set, i, t)
                    })
                    .collect::<Result<Vec<_>>>()?;
                sampled.as_slice()
            }
        };
        let (loss, grad) = PredictionLoss { pairs: batch }.value_and_gradient(&params)?;
        if !loss.is_finite() || !grad.is_finite() {
            return Err(Error::Training(format!("step {step}: non-finite loss {loss}")));
        }
        opt.step(&mut params, &grad);
        loss_curve.push(loss);

        if let Some(out) = output.as_mut() {
            if step % config.log_interval == 0 || step == config.total_steps {
                out.log(&PredictorRecord {
                    step,
                    loss,
                    wall_seconds: started.elapsed().as_secs_f64(),
                })?;
            }
            if step % config.checkpoint_interval == 0 || step == config.total_steps {
                store(&out.checkpoint_dir(step), &params, config, step)?;
            }
        }
    }
    Ok(PredictorOutcome { params, loss_curve })
}

/// Extends `prefix` to the horizon by repeatedly appending the predicted next point.
pub fn predict_rollout(params: &ParameterSet, prefix: &State) -> Result<Trajectory> {
    if prefix.is_full() {
        return Err(Error::EpisodeComplete {
            horizon: prefix.horizon(),
        });
    }
    let mut state = prefix.clone();
    while !state.is_full() {
        let next = actor_forward(params, &state)?;
        state = env_step(&state, next)?;
    }
    Ok(state.to_trajectory())
}
