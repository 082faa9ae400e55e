//! Raw handwriting samples, preprocessing, and train/test datasets.

mod canonical;
mod unipen;

pub use canonical::{
    dataset_to_string, load_canonical, load_dataset, parse_canonical, parse_dataset,
    raw_to_string, write_canonical, write_dataset,
};
pub use unipen::{parse_unipen_subset, UnipenParse};

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::loss::map_ordered;
use crate::trajectory::{normalize_unit_square, resample_uniform, Point, Trajectory};

/// One handwritten sample in source coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub id: String,
    pub label: String,
    /// Pen-down strokes in temporal order.
    pub strokes: Vec<Vec<Point>>,
}

impl RawSample {
    /// All pen-down points in temporal order; pen-up gaps are dropped.
    pub fn concatenated(&self) -> Vec<Point> {
        self.strokes.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Fixed-length trajectories in the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub horizon: usize,
    pub split: Split,
    pub seed: u64,
    pub samples: Vec<Trajectory>,
}

impl Dataset {
    pub fn new(horizon: usize, split: Split, seed: u64, samples: Vec<Trajectory>) -> Result<Self> {
        let ds = Dataset {
            horizon,
            split,
            seed,
            samples,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Every sample has exactly `horizon` points, all inside the unit square.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.samples.iter().enumerate() {
            if s.len() != self.horizon {
                return Err(Error::invalid(format!(
                    "sample {i} has {} points, expected {}",
                    s.len(),
                    self.horizon
                )));
            }
            if let Some(p) = s.points.iter().find(|p| !p.is_finite() || !p.in_unit_square()) {
                return Err(Error::invalid(format!(
                    "sample {i} has point ({}, {}) outside the unit square",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization.
    pub fn fingerprint(&self) -> String {
        sha256_hex(dataset_to_string(self).unwrap_or_default().as_bytes())
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Train and test partitions plus the ids of samples that could not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDatasets {
    pub train: Dataset,
    pub test: Dataset,
    pub dropped: Vec<String>,
}

/// Concatenates strokes, normalizes into the unit square and resamples to
/// `horizon` points. Returns `None` for unusable samples.
pub fn preprocess(sample: &RawSample, horizon: usize) -> Option<Trajectory> {
    let points = sample.concatenated();
    if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
        return None;
    }
    let normalized = normalize_unit_square(&points);
    let resampled = resample_uniform(&normalized, horizon).ok()?;
    Some(Trajectory {
        points: resampled
            .into_iter()
            .map(|p| Point::new(p.x.clamp(0.0, 1.0), p.y.clamp(0.0, 1.0)))
            .collect(),
        label: Some(sample.label.clone()),
        id: Some(sample.id.clone()),
    })
}

/// Preprocesses every sample and splits them with a seeded shuffle: the first
/// `floor(train_fraction * N)` retained samples go to train, the rest to test.
pub fn build_dataset(
    raw: &[RawSample],
    horizon: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitDatasets> {
    if raw.is_empty() {
        return Err(Error::invalid("no samples to build a dataset from"));
    }
    if horizon < 2 {
        return Err(Error::invalid(format!("horizon must be at least 2, got {horizon}")));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let processed = map_ordered(raw, |s| preprocess(s, horizon));
    let mut dropped = Vec::new();
    let mut kept = Vec::with_capacity(raw.len());
    for (sample, traj) in raw.iter().zip(processed) {
        match traj {
            Some(t) => kept.push(t),
            None => dropped.push(sample.id.clone()),
        }
    }
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * kept.len() as f64).floor() as usize;
    let mut slots: Vec<Option<Trajectory>> = kept.into_iter().map(Some).collect();
    let mut take = |idx: &[usize]| -> Vec<Trajectory> {
        idx.iter().map(|&i| slots[i].take().expect("permutation")).collect()
    };
    let train = take(&order[..n_train]);
    let test = take(&order[n_train..]);
    Ok(SplitDatasets {
        train: Dataset::new(horizon, Split::Train, seed, train)?,
        test: Dataset::new(horizon, Split::Test, seed, test)?,
        dropped,
    })
}
