use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gail::q_value;
use crate::nn::loss::map_ordered;
use crate::nn::ParameterSet;
use crate::trajectory::{Action, State};

pub const DEFAULT_GRID: usize = 64;

/// `Q(s, a)` over a `grid x grid` lattice of candidate next positions.
#[derive(Debug, Clone, PartialEq)]
pub struct QMap {
    pub grid: usize,
    /// Row-major; row `i` is `y = (i + 0.5) / grid`, column `j` is `x = (j + 0.5) / grid`.
    pub values: Vec<f64>,
    pub state: State,
    pub gamma: f64,
}

impl QMap {
    pub fn cell_action(grid: usize, i: usize, j: usize) -> Action {
        Action::new((j as f64 + 0.5) / grid as f64, (i as f64 + 0.5) / grid as f64)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid + j]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Comma-separated matrix, one grid row per line, shortest round-trip
    /// decimal representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.grid {
            for j in 0..self.grid {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn sidecar(&self) -> QMapSidecar {
        QMapSidecar {
            grid: self.grid,
            gamma: self.gamma,
            horizon: self.state.horizon(),
            length: self.state.len(),
            points: self.state.points().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

/// The conditioning state and settings stored next to an exported Q-map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QMapSidecar {
    pub grid: usize,
    pub gamma: f64,
    pub horizon: usize,
    pub length: usize,
    pub points: Vec<[f64; 2]>,
}

/// Evaluates `Q(state, a)` at the center of every grid cell.
pub fn qmap(
    critic: &ParameterSet,
    disc: &ParameterSet,
    state: &State,
    grid: usize,
    gamma: f64,
) -> Result<QMap> {
    if state.is_full() {
        return Err(Error::EpisodeComplete {
            horizon: state.horizon(),
        });
    }
    if grid == 0 {
        return Err(Error::invalid("grid must be positive"));
    }
    let cells: Vec<(usize, usize)> = (0..grid).flat_map(|i| (0..grid).map(move |j| (i, j))).collect();
    let values = map_ordered(&cells, |&(i, j)| {
        q_value(critic, disc, state, QMap::cell_action(grid, i, j), gamma)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(QMap {
        grid,
        values,
        state: state.clone(),
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, Head, NetworkSpec};
    use crate::trajectory::{make_state, Point};

    #[test]
    fn flat_networks_give_flat_map() {
        let critic = ParameterSet::zeros(NetworkSpec::new(Head::Critic, 8).with_widths(3, 2));
        let disc = ParameterSet::zeros(NetworkSpec::new(Head::Discriminator, 8).with_widths(3, 2));
        let s = make_state(&[Point::new(0.2, 0.2)], 8).unwrap();
        let m = qmap(&critic, &disc, &s, 5, 0.9).unwrap();
        assert_eq!(m.values.len(), 25);
        assert!(m.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn entries_are_cell_center_q_values() {
        let critic = init_params(&NetworkSpec::new(Head::Critic, 8).with_widths(3, 2), 1);
        let disc = init_params(&NetworkSpec::new(Head::Discriminator, 8).with_widths(3, 2), 2);
        let s = make_state(&[Point::new(0.2, 0.2), Point::new(0.3, 0.25)], 8).unwrap();
        let m = qmap(&critic, &disc, &s, 4, 0.7).unwrap();
        for (i, j) in [(0, 0), (1, 3), (3, 2)] {
            let q = q_value(&critic, &disc, &s, QMap::cell_action(4, i, j), 0.7).unwrap();
            assert_eq!(m.get(i, j), q);
        }
        assert_eq!(m.to_csv().lines().count(), 4);
    }

    #[test]
    fn full_state_rejected() {
        let critic = ParameterSet::zeros(NetworkSpec::new(Head::Critic, 2).with_widths(1, 1));
        let disc = ParameterSet::zeros(NetworkSpec::new(Head::Discriminator, 2).with_widths(1, 1));
        let s = make_state(&[Point::new(0.2, 0.2); 2], 2).unwrap();
        assert!(matches!(qmap(&critic, &disc, &s, 4, 0.9), Err(Error::EpisodeComplete { .. })));
    }
}
