use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::params::{CONV1_CHANNELS, CONV2_CHANNELS};
use crate::nn::{Head, NetworkSpec, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Stochastic gradient descent with momentum 0.9.
    Momentum,
    Adam,
}

/// Everything that controls a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub horizon: usize,
    /// Discount applied to the successor value in `Q = R + gamma * V'`.
    pub gamma: f64,
    pub optimizer: OptimizerKind,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub discriminator_lr: f64,
    /// Transitions per critic and actor update.
    pub batch_size: usize,
    /// States per class (expert / generated) per discriminator update.
    pub discriminator_batch_size: usize,
    /// Episodes rolled out per training step.
    pub rollouts_per_step: usize,
    pub total_steps: u64,
    /// Every learning rate decays linearly to this fraction of its value by
    /// the last step; 1 keeps it constant.
    pub final_lr_scale: f64,
    /// Standard deviation of the Gaussian exploration noise on actions.
    pub noise_scale: f64,
    /// Target-critic mixing rate.
    pub tau: f64,
    pub seed: u64,
    pub checkpoint_interval: u64,
    pub log_interval: u64,
    /// Transitions kept for critic and actor batches.
    pub replay_capacity: usize,
    /// Expert prefix length used to seed rollouts, drawn uniformly from
    /// `min_prefix..=max_prefix`.
    pub min_prefix: usize,
    pub max_prefix: usize,
    pub conv1_channels: usize,
    pub conv2_channels: usize,
    /// Supervised next-point steps that initialize the actor before
    /// adversarial training; 0 starts from random weights.
    pub pretrain_steps: u64,
    pub pretrain_lr: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            horizon: 50,
            gamma: 0.9,
            optimizer: OptimizerKind::Momentum,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            discriminator_lr: 1e-3,
            batch_size: 32,
            discriminator_batch_size: 32,
            rollouts_per_step: 1,
            total_steps: 20_000,
            final_lr_scale: 1.0,
            noise_scale: 0.05,
            tau: 0.005,
            seed: 0,
            checkpoint_interval: 1_000,
            log_interval: 10,
            replay_capacity: 20_000,
            min_prefix: 1,
            max_prefix: 1,
            conv1_channels: CONV1_CHANNELS,
            conv2_channels: CONV2_CHANNELS,
            pretrain_steps: 0,
            pretrain_lr: 1e-3,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        if self.horizon < 2 {
            return fail(format!("horizon must be at least 2, got {}", self.horizon));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        for (name, lr) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("discriminator_lr", self.discriminator_lr),
            ("pretrain_lr", self.pretrain_lr),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return fail(format!("{name} must be positive, got {lr}"));
            }
        }
        if !(self.final_lr_scale > 0.0 && self.final_lr_scale <= 1.0) {
            return fail(format!("final_lr_scale must lie in (0, 1], got {}", self.final_lr_scale));
        }
        if self.batch_size == 0 || self.discriminator_batch_size == 0 || self.rollouts_per_step == 0
        {
            return fail("batch sizes and rollouts per step must be positive".into());
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return fail(format!("noise_scale must be nonnegative, got {}", self.noise_scale));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.checkpoint_interval == 0 || self.log_interval == 0 {
            return fail("checkpoint and log intervals must be positive".into());
        }
        if self.replay_capacity == 0 {
            return fail("replay_capacity must be positive".into());
        }
        if self.min_prefix == 0 || self.min_prefix > self.max_prefix || self.max_prefix >= self.horizon
        {
            return fail(format!(
                "prefix range {}..={} must satisfy 1 <= min <= max < horizon",
                self.min_prefix, self.max_prefix
            ));
        }
        if self.conv1_channels == 0 || self.conv2_channels == 0 {
            return fail("convolution widths must be positive".into());
        }
        Ok(())
    }

    /// Learning-rate multiplier applied at `step` (1-based).
    pub fn lr_scale(&self, step: u64) -> f64 {
        if self.total_steps <= 1 {
            return 1.0;
        }
        let progress = (step.saturating_sub(1)) as f64 / (self.total_steps - 1) as f64;
        1.0 + (self.final_lr_scale - 1.0) * progress.min(1.0)
    }

    pub fn network(&self, head: Head) -> NetworkSpec {
        NetworkSpec::new(head, self.horizon).with_widths(self.conv1_channels, self.conv2_channels)
    }

    fn optimizer_config(&self, lr: f64) -> OptimizerConfig {
        match self.optimizer {
            OptimizerKind::Momentum => OptimizerConfig::momentum(lr),
            OptimizerKind::Adam => OptimizerConfig::adam(lr),
        }
    }

    pub fn actor_optimizer(&self) -> OptimizerConfig {
        self.optimizer_config(self.actor_lr)
    }

    pub fn critic_optimizer(&self) -> OptimizerConfig {
        self.optimizer_config(self.critic_lr)
    }

    pub fn discriminator_optimizer(&self) -> OptimizerConfig {
        self.optimizer_config(self.discriminator_lr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TrainingConfig::default().validate().unwrap();
    }

    #[test]
    fn gamma_must_be_below_one() {
        let cfg = TrainingConfig {
            gamma: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn learning_rates_decay_linearly() {
        let cfg = TrainingConfig { total_steps: 11, final_lr_scale: 0.1, ..TrainingConfig::default() };
        assert_eq!(cfg.lr_scale(1), 1.0);
        assert!((cfg.lr_scale(6) - 0.55).abs() < 1e-12);
        assert!((cfg.lr_scale(11) - 0.1).abs() < 1e-12);
        assert_eq!(TrainingConfig::default().lr_scale(500), 1.0);
        let bad = TrainingConfig { final_lr_scale: 0.0, ..TrainingConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn prefix_range_checked() {
        let cfg = TrainingConfig {
            min_prefix: 3,
            max_prefix: 50,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_partial_toml() {
        let cfg: TrainingConfig = toml::from_str("gamma = 0.5\noptimizer = \"adam\"").unwrap();
        assert_eq!(cfg.gamma, 0.5);
        assert_eq!(cfg.optimizer, OptimizerKind::Adam);
        assert_eq!(cfg.horizon, 50);
        assert!(toml::from_str::<TrainingConfig>("gama = 0.5").is_err());
    }
}
