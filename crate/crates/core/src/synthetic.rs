//! Synthetic expert strokes: straight segments and constant-curvature arcs.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::RawSample;
use crate::error::{Error, Result};
use crate::trajectory::{Point, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub count: usize,
    pub horizon: usize,
    /// Probability that a sample is a straight segment rather than an arc.
    pub line_fraction: f64,
    pub min_length: f64,
    pub max_length: f64,
    /// Arc radii are drawn uniformly from this range.
    pub min_radius: f64,
    pub max_radius: f64,
    /// Distance kept from the unit-square border.
    pub margin: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            count: 500,
            horizon: 50,
            line_fraction: 0.7,
            min_length: 0.4,
            max_length: 0.8,
            min_radius: 0.35,
            max_radius: 0.8,
            margin: 0.05,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.horizon >= 2
            && (0.0..=1.0).contains(&self.line_fraction)
            && 0.0 < self.min_length
            && self.min_length <= self.max_length
            && self.max_length + 2.0 * self.margin < 1.0
            && 0.0 < self.min_radius
            && self.min_radius <= self.max_radius
            && (0.0..0.5).contains(&self.margin);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("inconsistent synthetic config: {self:?}")))
        }
    }
}

/// Draws `config.count` trajectories with equally spaced points.
///
/// Each shape is built around the origin with a random heading, then
/// translated to a random position where it fits inside the margin; shapes
/// that cannot fit are redrawn.
pub fn synthetic_experts(config: &SyntheticConfig, seed: u64) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(config.count);
    while out.len() < config.count {
        let is_line = rng.random::<f64>() < config.line_fraction;
        let length = rng.random_range(config.min_length..=config.max_length);
        let heading = rng.random_range(0.0..2.0 * PI);
        let mut pts = if is_line {
            line(config.horizon, length, heading)
        } else {
            let radius = rng.random_range(config.min_radius..=config.max_radius);
            let turn = if rng.random::<bool>() { 1.0 } else { -1.0 };
            arc(config.horizon, length, heading, radius * turn)
        };
        let (lo, hi) = bounds(&pts);
        let room = 1.0 - 2.0 * config.margin;
        if hi.x - lo.x > room || hi.y - lo.y > room {
            continue;
        }
        let ox = config.margin - lo.x + rng.random_range(0.0..=room - (hi.x - lo.x));
        let oy = config.margin - lo.y + rng.random_range(0.0..=room - (hi.y - lo.y));
        for p in &mut pts {
            p.x += ox;
            p.y += oy;
        }
        let mut t = Trajectory::new(pts);
        t.id = Some(format!("synthetic-{:05}", out.len()));
        t.label = Some(if is_line { "line" } else { "arc" }.to_string());
        out.push(t);
    }
    Ok(out)
}

/// The same shapes as single-stroke raw samples.
pub fn synthetic_raw(config: &SyntheticConfig, seed: u64) -> Result<Vec<RawSample>> {
    Ok(synthetic_experts(config, seed)?
        .into_iter()
        .map(|t| RawSample {
            id: t.id.unwrap_or_default(),
            label: t.label.unwrap_or_default(),
            strokes: vec![t.points],
        })
        .collect())
}

fn line(n: usize, length: f64, heading: f64) -> Vec<Point> {
    let (s, c) = heading.sin_cos();
    (0..n)
        .map(|i| {
            let d = length * i as f64 / (n - 1) as f64;
            Point::new(d * c, d * s)
        })
        .collect()
}

/// Arc starting at the origin with initial direction `heading`; a negative
/// radius turns clockwise.
fn arc(n: usize, length: f64, heading: f64, radius: f64) -> Vec<Point> {
    let r = radius.abs();
    let sign = radius.signum();
    // Centre sits to the left (counter-clockwise) or right of the heading.
    let normal = heading + sign * PI / 2.0;
    let (cx, cy) = (r * normal.cos(), r * normal.sin());
    let start = normal + PI;
    (0..n)
        .map(|i| {
            let a = start + sign * (length / r) * i as f64 / (n - 1) as f64;
            Point::new(cx + r * a.cos(), cy + r * a.sin())
        })
        .collect()
}

fn bounds(pts: &[Point]) -> (Point, Point) {
    pts.iter().fold(
        (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}
