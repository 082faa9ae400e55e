//! Multi-scale curvature of trajectories and its histograms.

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Point, Trajectory};

/// Triangle area below which a triple counts as collinear.
pub const COLLINEAR_EPS: f64 = 1e-12;
pub const DEFAULT_DELTA_MAX: usize = 20;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_KAPPA_MAX: f64 = 30.0;

/// Inverse circumradius of the triangle `a, b, c`: `2 |cross| / (|ab| |bc| |ca|)`.
pub fn circumcurvature(a: Point, b: Point, c: Point) -> f64 {
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if 0.5 * cross.abs() < COLLINEAR_EPS {
        return 0.0;
    }
    let product = a.distance(&b) * b.distance(&c) * c.distance(&a);
    2.0 * cross.abs() / product
}

/// Curvature at 0-based index `t` and scale `delta`: the inverse radius of the
/// circle through points `t - delta`, `t` and `t + delta`; zero for collinear
/// points.
pub fn curvature_at(traj: &Trajectory, t: usize, delta: usize) -> Result<f64> {
    if delta == 0 || t < delta || t + delta >= traj.len() {
        return Err(Error::invalid(format!(
            "curvature at index {t} with delta {delta} needs indices outside 0..{}",
            traj.len()
        )));
    }
    let p = &traj.points;
    Ok(circumcurvature(p[t - delta], p[t], p[t + delta]))
}

/// Per-scale normalized curvature distributions.
///
/// Row `d - 1` is the distribution at scale `delta = d`. Bins are equal-width
/// over `[0, kappa_max]`; larger curvatures fall in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureHistogram {
    pub delta_max: usize,
    pub bins: usize,
    pub kappa_max: f64,
    pub rows: Vec<Vec<f64>>,
    /// Number of curvature values behind each row.
    pub counts: Vec<usize>,
}

impl CurvatureHistogram {
    pub fn row(&self, delta: usize) -> &[f64] {
        &self.rows[delta - 1]
    }

    pub fn bin_width(&self) -> f64 {
        self.kappa_max / self.bins as f64
    }

    pub fn bin_of(&self, kappa: f64) -> usize {
        ((kappa / self.kappa_max * self.bins as f64).floor() as usize).min(self.bins - 1)
    }

    /// Index of the largest bin of the row at `delta` (first on ties).
    pub fn mode(&self, delta: usize) -> usize {
        let row = self.row(delta);
        let mut best = 0;
        for (i, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = i;
            }
        }
        best
    }

    /// Delimited text: a header naming bin edges, then one row per scale.
    pub fn to_csv(&self) -> String {
        let w = self.bin_width();
        let mut out = String::from("delta");
        for b in 0..self.bins {
            let _ = write!(out, ",{:.6}:{:.6}", b as f64 * w, (b + 1) as f64 * w);
        }
        out.push('\n');
        for (d, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{}", d + 1);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Reads back the matrix written by [`to_csv`](Self::to_csv).
    pub fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
        text.lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, line)| {
                line.split(',')
                    .skip(1)
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|e| Error::Format {
                            line: i + 1,
                            message: e.to_string(),
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Builds the histogram over every trajectory and index `t` in `t_range`
/// (0-based) for each scale `1..=delta_max`. Triples that would need indices
/// outside a trajectory are skipped.
pub fn curvature_histogram(
    trajs: &[Trajectory],
    t_range: Range<usize>,
    delta_max: usize,
    bins: usize,
    kappa_max: f64,
) -> Result<CurvatureHistogram> {
    if trajs.is_empty() {
        return Err(Error::invalid("no trajectories to histogram"));
    }
    if delta_max == 0 || bins == 0 || !(kappa_max > 0.0 && kappa_max.is_finite()) {
        return Err(Error::invalid(format!(
            "need delta_max > 0, bins > 0 and a positive kappa_max (got {delta_max}, {bins}, {kappa_max})"
        )));
    }
    let mut hist = CurvatureHistogram {
        delta_max,
        bins,
        kappa_max,
        rows: vec![vec![0.0; bins]; delta_max],
        counts: vec![0; delta_max],
    };
    for delta in 1..=delta_max {
        let mut counts = vec![0usize; bins];
        let mut total = 0usize;
        for traj in trajs {
            let hi = t_range.end.min(traj.len().saturating_sub(delta));
            for t in t_range.start.max(delta)..hi {
                let kappa = curvature_at(traj, t, delta)?;
                counts[hist.bin_of(kappa)] += 1;
                total += 1;
            }
        }
        hist.counts[delta - 1] = total;
        if total > 0 {
            hist.rows[delta - 1] = counts.iter().map(|&c| c as f64 / total as f64).collect();
        }
    }
    Ok(hist)
}

/// Mean over scales of the total-variation distance between matching rows.
pub fn histogram_distance(a: &CurvatureHistogram, b: &CurvatureHistogram) -> Result<f64> {
    if a.delta_max != b.delta_max || a.bins != b.bins {
        return Err(Error::invalid(format!(
            "histogram shapes differ: {}x{} vs {}x{}",
            a.delta_max, a.bins, b.delta_max, b.bins
        )));
    }
    let total: f64 = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| 0.5 * ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .sum();
    Ok(total / a.delta_max as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(points: &[(f64, f64)]) -> Trajectory {
        Trajectory::new(points.iter().map(|&p| p.into()).collect())
    }

    #[test]
    fn collinear_is_zero() {
        let t = traj(&[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(curvature_at(&t, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn right_angle_triangle() {
        let t = traj(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let k = curvature_at(&t, 1, 1).unwrap();
        assert!((k - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cocircular_points() {
        let on_circle = |a: f64| (0.5 + 0.25 * a.cos(), 0.5 + 0.25 * a.sin());
        let t = traj(&[on_circle(0.3), on_circle(1.9), on_circle(4.0)]);
        assert!((curvature_at(&t, 1, 1).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_indices() {
        let t = traj(&[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert!(curvature_at(&t, 0, 1).is_err());
        assert!(curvature_at(&t, 1, 2).is_err());
        assert!(curvature_at(&t, 1, 0).is_err());
    }

    #[test]
    fn straight_line_fills_lowest_bin() {
        let line = Trajectory::new((0..50).map(|i| Point::new(i as f64 / 49.0, 0.2)).collect());
        let h = curvature_histogram(&[line], 20..50, 20, 50, 30.0).unwrap();
        for d in 1..=20 {
            assert_eq!(h.row(d)[0], 1.0, "delta {d}");
        }
    }

    #[test]
    fn circle_fills_one_bin() {
        let r = 0.4;
        let circle = Trajectory::new(
            (0..50)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / 60.0;
                    Point::new(0.5 + r * a.cos(), 0.5 + r * a.sin())
                })
                .collect(),
        );
        let h = curvature_histogram(&[circle], 20..50, 20, 50, 30.0).unwrap();
        let bin = h.bin_of(1.0 / r);
        for d in 1..=20 {
            assert!((h.row(d)[bin] - 1.0).abs() < 1e-12, "delta {d}");
        }
    }

    #[test]
    fn short_windows_leave_empty_rows() {
        let t = traj(&[(0.0, 0.0), (0.5, 0.1), (1.0, 0.0)]);
        let h = curvature_histogram(&[t], 0..3, 2, 10, 30.0).unwrap();
        assert_eq!(h.counts, vec![1, 0]);
        assert!((h.row(1).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(h.row(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn distance_extremes() {
        let mut a = CurvatureHistogram {
            delta_max: 1,
            bins: 2,
            kappa_max: 1.0,
            rows: vec![vec![1.0, 0.0]],
            counts: vec![1],
        };
        assert_eq!(histogram_distance(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.rows = vec![vec![0.0, 1.0]];
        assert_eq!(histogram_distance(&a, &b).unwrap(), 1.0);
        a.bins = 3;
        assert!(histogram_distance(&a, &b).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let line = Trajectory::new((0..10).map(|i| Point::new(i as f64 / 9.0, 0.2 + 0.01 * (i % 2) as f64)).collect());
        let h = curvature_histogram(&[line], 0..10, 3, 4, 30.0).unwrap();
        let csv = h.to_csv();
        assert!(csv.starts_with("delta,0.000000:7.500000,"));
        assert_eq!(CurvatureHistogram::parse_csv_rows(&csv).unwrap(), h.rows);
    }
}
