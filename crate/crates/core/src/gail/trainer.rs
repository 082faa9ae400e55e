//! The model-based GAIL training loop.
//!
//! Each step rolls the actor out from expert prefixes, then updates the
//! discriminator (expert prefixes vs. generated states of equal length), the
//! critic (Bellman residual on replayed transitions) and the actor (ascent on
//! Q through the explicit transition), in that order.

use std::collections::VecDeque;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nn::checkpoint::{self, CheckpointManifest};
use crate::nn::{init_params, Head, Optimizer, ParameterSet};
use crate::trajectory::{make_state, State};

use super::config::TrainingConfig;
use super::objective::{reward_of, Transition};
use super::rollout::rollout_with;
use super::update::{update_actor, update_critic, update_discriminator};

/// One line of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub discriminator_loss: f64,
    pub critic_loss: f64,
    pub actor_objective: f64,
    /// Mean learned reward over the step's rollout transitions.
    pub mean_reward: f64,
    /// Mean distance between consecutive generated pen positions.
    pub mean_displacement: f64,
    pub wall_seconds: f64,
}

/// The four networks of a GAIL run.
#[derive(Debug, Clone, PartialEq)]
pub struct GailModel {
    pub actor: ParameterSet,
    pub critic: ParameterSet,
    pub critic_target: ParameterSet,
    pub discriminator: ParameterSet,
}

impl GailModel {
    /// Fresh networks; each gets its own seed derived from `seed`.
    pub fn init(config: &TrainingConfig) -> Self {
        let critic = init_params(&config.network(Head::Critic), config.seed.wrapping_add(2));
        GailModel {
            actor: init_params(&config.network(Head::Actor), config.seed.wrapping_add(1)),
            critic_target: critic.clone(),
            critic,
            discriminator: init_params(
                &config.network(Head::Discriminator),
                config.seed.wrapping_add(3),
            ),
        }
    }

    fn parts(&self) -> [(&'static str, &ParameterSet); 4] {
        [
            ("actor", &self.actor),
            ("critic", &self.critic),
            ("critic_target", &self.critic_target),
            ("discriminator", &self.discriminator),
        ]
    }

    /// Writes one checkpoint per network into `dir`.
    pub fn store(&self, dir: &Path, config: &TrainingConfig, step: u64) -> Result<()> {
        let extra = serde_json::json!({ "gamma": config.gamma, "config": config });
        for (kind, params) in self.parts() {
            let manifest =
                CheckpointManifest::new(kind, params, config.seed, step).with_extra(extra.clone());
            checkpoint::store(&dir.join(format!("{kind}.ckpt")), params, &manifest)?;
        }
        Ok(())
    }
}

/// Result of [`train_gail`].
#[derive(Debug, Clone)]
pub struct GailOutcome {
    pub model: GailModel,
    pub metrics: Vec<MetricsRecord>,
    /// Checkpoint directories in the order they were written.
    pub checkpoints: Vec<PathBuf>,
}

/// Run manifest written next to the metrics log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub model_kind: String,
    pub version: String,
    pub seed: u64,
    pub data_fingerprint: String,
    pub config: TrainingConfig,
}

pub(crate) struct RunOutput {
    dir: PathBuf,
    metrics: BufWriter<File>,
}

impl RunOutput {
    pub(crate) fn create(dir: &Path, manifest: &impl Serialize) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        checkpoint::write_atomic(&dir.join("run_manifest.json"), text.as_bytes())?;
        let path = dir.join("metrics.jsonl");
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            metrics: BufWriter::new(file),
        })
    }

    pub(crate) fn log(&mut self, record: &impl Serialize) -> Result<()> {
        let path = self.dir.join("metrics.jsonl");
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(self.metrics, "{line}")
            .and_then(|_| self.metrics.flush())
            .map_err(|e| Error::io(&path, e))
    }

    pub(crate) fn checkpoint_dir(&self, step: u64) -> PathBuf {
        self.dir.join("checkpoints").join(format!("step_{step:08}"))
    }
}

fn check_dataset(config: &TrainingConfig, train_set: &Dataset) -> Result<()> {
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
    train_set.validate()
}

fn expert_prefix(train_set: &Dataset, len: usize, rng: &mut impl Rng) -> Result<State> {
    let sample = &train_set.samples[rng.random_range(0..train_set.len())];
    make_state(&sample.points[..len], train_set.horizon)
}

/// Behavior cloning: the supervised predictor with the same seed, which
/// starts from the same initial actor weights.
fn pretrained_actor(config: &TrainingConfig, train_set: &Dataset) -> Result<ParameterSet> {
    let cfg = TrainingConfig {
        total_steps: config.pretrain_steps,
        actor_lr: config.pretrain_lr,
        final_lr_scale: 1.0,
        ..config.clone()
    };
    Ok(crate::baseline::train_predictor(&cfg, train_set, None)?.params)
}

/// Trains actor, critic and discriminator on `train_set`.
///
/// With `out_dir`, writes `run_manifest.json`, `metrics.jsonl` and a
/// checkpoint directory at step 0 and every `checkpoint_interval` steps.
/// Checkpoints are written atomically, so an aborted run leaves the last
/// completed one intact.
pub fn train_gail(
    config: &TrainingConfig,
    train_set: &Dataset,
    out_dir: Option<&Path>,
) -> Result<GailOutcome> {
    check_dataset(config, train_set)?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = GailModel::init(config);
    if config.pretrain_steps > 0 {
        model.actor = pretrained_actor(config, train_set)?;
    }
    let mut actor_opt = Optimizer::new(config.actor_optimizer());
    let mut critic_opt = Optimizer::new(config.critic_optimizer());
    let mut disc_opt = Optimizer::new(config.discriminator_optimizer());
    let mut replay: VecDeque<Transition> = VecDeque::with_capacity(config.replay_capacity);
    let mut metrics = Vec::new();
    let mut checkpoints = Vec::new();

    let mut output = match out_dir {
        Some(dir) => Some(RunOutput::create(
            dir,
            &RunManifest {
                model_kind: "gail".into(),
                version: crate::VERSION.into(),
                seed: config.seed,
                data_fingerprint: train_set.fingerprint(),
                config: config.clone(),
            },
        )?),
        None => None,
    };
    if let Some(out) = &output {
        let dir = out.checkpoint_dir(0);
        model.store(&dir, config, 0)?;
        checkpoints.push(dir);
    }

    let fail = |step: u64, e: Error| Error::Training(format!("step {step}: {e}"));

    for step in 1..=config.total_steps {
        let scale = config.lr_scale(step);
        actor_opt.set_lr(config.actor_lr * scale);
        critic_opt.set_lr(config.critic_lr * scale);
        disc_opt.set_lr(config.discriminator_lr * scale);

        // Rollouts.
        let mut fresh: Vec<Transition> = Vec::new();
        for _ in 0..config.rollouts_per_step {
            let p = rng.random_range(config.min_prefix..=config.max_prefix);
            let initial = expert_prefix(train_set, p, &mut rng).map_err(|e| fail(step, e))?;
            let episode = rollout_with(&model.actor, &initial, config.noise_scale, &mut rng)
                .map_err(|e| fail(step, e))?;
            fresh.extend(episode.transitions);
        }

        // Discriminator: generated successor states vs equal-length expert prefixes.
        let fake: Vec<State> = (0..config.discriminator_batch_size)
            .map(|_| fresh[rng.random_range(0..fresh.len())].next.clone())
            .collect();
        let real = fake
            .iter()
            .map(|s| expert_prefix(train_set, s.len(), &mut rng))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| fail(step, e))?;
        let (disc, d_loss) = update_discriminator(&model.discriminator, &real, &fake, &mut disc_opt)
            .map_err(|e| fail(step, e))?;
        model.discriminator = disc;

        let log_now = step % config.log_interval == 0 || step == config.total_steps;
        let (mean_reward, mean_displacement) = if log_now {
            let mut r = 0.0;
            let mut d = 0.0;
            for tr in &fresh {
                r += reward_of(&model.discriminator, &tr.next).map_err(|e| fail(step, e))?;
                d += tr.state.last_point().distance(&tr.action.point());
            }
            (r / fresh.len() as f64, d / fresh.len() as f64)
        } else {
            (0.0, 0.0)
        };

        for tr in fresh {
            if replay.len() == config.replay_capacity {
                replay.pop_front();
            }
            replay.push_back(tr);
        }

        // Critic.
        let batch: Vec<Transition> = (0..config.batch_size)
            .map(|_| replay[rng.random_range(0..replay.len())].clone())
            .collect();
        let (critic, c_loss) = update_critic(
            &model.critic,
            &mut model.critic_target,
            &model.discriminator,
            &batch,
            config.gamma,
            config.tau,
            &mut critic_opt,
        )
        .map_err(|e| fail(step, e))?;
        model.critic = critic;

        // Actor.
        let states: Vec<State> = (0..config.batch_size)
            .map(|_| replay[rng.random_range(0..replay.len())].state.clone())
            .collect();
        let (actor, objective) = update_actor(
            &model.actor,
            &model.critic,
            &model.discriminator,
            &states,
            config.gamma,
            &mut actor_opt,
        )
        .map_err(|e| fail(step, e))?;
        model.actor = actor;

        if log_now {
            let record = MetricsRecord {
                step,
                discriminator_loss: d_loss,
                critic_loss: c_loss,
                actor_objective: objective,
                mean_reward,
                mean_displacement,
                wall_seconds: started.elapsed().as_secs_f64(),
            };
            if let Some(out) = output.as_mut() {
                out.log(&record)?;
            }
            metrics.push(record);
        }
        if step % config.checkpoint_interval == 0 || step == config.total_steps {
            if let Some(out) = &output {
                let dir = out.checkpoint_dir(step);
                model.store(&dir, config, step)?;
                checkpoints.push(dir);
            }
        }
    }

    Ok(GailOutcome {
        model,
        metrics,
        checkpoints,
    })
}
