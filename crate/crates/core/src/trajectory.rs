//! Pen-trajectory geometry and the writing environment.
//!
//! A [`State`] is the fixed-horizon, zero-padded encoding of a partial
//! trajectory: `horizon` slots of `(x, y, l)` where `l` marks the slots that
//! hold a real pen position. Writing one more point ([`env_step`]) fills the
//! first padded slot and returns a new state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A pen-tip position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// An ordered polyline with optional character label and identifier.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub label: Option<String>,
    pub id: Option<String>,
}

impl Trajectory {
    pub fn new(points: Vec<Point>) -> Self {
        Trajectory {
            points,
            label: None,
            id: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The next pen-tip position chosen by a policy.
///
/// No continuity constraint is imposed: any point of the unit square is a
/// legal action regardless of where the pen currently is.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action(pub Point);

impl Action {
    pub fn new(x: f64, y: f64) -> Self {
        Action(Point::new(x, y))
    }

    pub fn point(&self) -> Point {
        self.0
    }

    /// Clamps both coordinates into `[0, 1]`.
    pub fn clamped(x: f64, y: f64) -> Self {
        Action::new(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0))
    }
}

/// Fixed-horizon zero-padded partial trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    slots: Vec<[f64; 3]>,
    len: usize,
}

impl State {
    /// Number of slots (the horizon `T`).
    pub fn horizon(&self) -> usize {
        self.slots.len()
    }

    /// Number of valid points written so far.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Never true for a state built by [`make_state`]; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.slots.len()
    }

    /// All `horizon` slots as `(x, y, l)` triples.
    pub fn slots(&self) -> &[[f64; 3]] {
        &self.slots
    }

    pub fn point(&self, index: usize) -> Option<Point> {
        (index < self.len).then(|| Point::new(self.slots[index][0], self.slots[index][1]))
    }

    pub fn last_point(&self) -> Point {
        let [x, y, _] = self.slots[self.len - 1];
        Point::new(x, y)
    }

    /// The valid prefix as points.
    pub fn points(&self) -> Vec<Point> {
        self.slots[..self.len]
            .iter()
            .map(|s| Point::new(s[0], s[1]))
            .collect()
    }

    /// Network input in channel-major order: `x` channel, `y` channel, `l` channel.
    pub fn channels(&self) -> Vec<f64> {
        let t = self.horizon();
        let mut out = vec![0.0; 3 * t];
        for (j, slot) in self.slots.iter().enumerate() {
            out[j] = slot[0];
            out[t + j] = slot[1];
            out[2 * t + j] = slot[2];
        }
        out
    }

    pub fn to_trajectory(&self) -> Trajectory {
        Trajectory::new(self.points())
    }
}

fn check_unit(p: &Point, what: &str) -> Result<()> {
    if !p.is_finite() || !p.in_unit_square() {
        return Err(Error::invalid(format!(
            "{what} ({}, {}) is outside the unit square",
            p.x, p.y
        )));
    }
    Ok(())
}

/// Encodes a prefix as a zero-padded state of the given horizon.
pub fn make_state(prefix: &[Point], horizon: usize) -> Result<State> {
    if prefix.is_empty() {
        return Err(Error::invalid("state prefix is empty"));
    }
    if prefix.len() > horizon {
        return Err(Error::invalid(format!(
            "prefix of {} points exceeds horizon {horizon}",
            prefix.len()
        )));
    }
    let mut slots = vec![[0.0; 3]; horizon];
    for (slot, p) in slots.iter_mut().zip(prefix) {
        check_unit(p, "prefix point")?;
        *slot = [p.x, p.y, 1.0];
    }
    Ok(State {
        slots,
        len: prefix.len(),
    })
}

/// Applies an action: writes it into the first padded slot of a copy of `state`.
pub fn env_step(state: &State, action: Action) -> Result<State> {
    if state.is_full() {
        return Err(Error::EpisodeComplete {
            horizon: state.horizon(),
        });
    }
    check_unit(&action.0, "action")?;
    let mut next = state.clone();
    next.slots[next.len] = [action.0.x, action.0.y, 1.0];
    next.len += 1;
    Ok(next)
}

/// Resamples a polyline to `target_len` points equally spaced in arc length.
///
/// Interpolation is piecewise linear. The first and last input points are
/// reproduced exactly. A polyline with zero total length (including a single
/// point) yields `target_len` copies of its first point.
pub fn resample_uniform(polyline: &[Point], target_len: usize) -> Result<Vec<Point>> {
    if polyline.is_empty() {
        return Err(Error::invalid("cannot resample an empty polyline"));
    }
    if target_len < 2 {
        return Err(Error::invalid(format!(
            "resampling target must be at least 2, got {target_len}"
        )));
    }
    let mut cumulative = Vec::with_capacity(polyline.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in polyline.windows(2) {
        total += w[0].distance(&w[1]);
        cumulative.push(total);
    }
    if total <= 0.0 || !total.is_finite() {
        return Ok(vec![polyline[0]; target_len]);
    }

    let last = polyline.len() - 1;
    let mut out = Vec::with_capacity(target_len);
    out.push(polyline[0]);
    let mut seg = 0;
    for k in 1..target_len - 1 {
        let s = total * k as f64 / (target_len - 1) as f64;
        while seg + 1 < last && cumulative[seg + 1] < s {
            seg += 1;
        }
        let (a, b) = (polyline[seg], polyline[seg + 1]);
        let span = cumulative[seg + 1] - cumulative[seg];
        let f = if span > 0.0 {
            ((s - cumulative[seg]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)));
    }
    out.push(polyline[last]);
    Ok(out)
}

/// Maps a polyline into the unit square with a similarity transform.
///
/// The longer bounding-box side is scaled to span `[0, 1]` and the shorter one
/// is centered. A zero-extent input maps to the center `(0.5, 0.5)`.
pub fn normalize_unit_square(polyline: &[Point]) -> Vec<Point> {
    if polyline.is_empty() {
        return Vec::new();
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in polyline {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let (width, height) = (max_x - min_x, max_y - min_y);
    let extent = width.max(height);
    if !(extent > 0.0) {
        return vec![Point::new(0.5, 0.5); polyline.len()];
    }
    let scale = 1.0 / extent;
    let off_x = (1.0 - width * scale) / 2.0;
    let off_y = (1.0 - height * scale) / 2.0;
    polyline
        .iter()
        .map(|p| {
            Point::new(
                ((p.x - min_x) * scale + off_x).clamp(0.0, 1.0),
                ((p.y - min_y) * scale + off_y).clamp(0.0, 1.0),
            )
        })
        .collect()
}
