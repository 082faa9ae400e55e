#![allow(dead_code)]

use hwgail::nn::{init_params, Head, Loss, NetworkSpec, ParameterSet};
use hwgail::trajectory::{make_state, Point, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut impl Rng) -> Point {
    Point::new(rng.random(), rng.random())
}

/// A state of random length in `1..horizon` (never full).
pub fn random_open_state(rng: &mut impl Rng, horizon: usize) -> State {
    let len = rng.random_range(1..horizon);
    let pts: Vec<Point> = (0..len).map(|_| random_point(rng)).collect();
    make_state(&pts, horizon).unwrap()
}

/// Initialized parameters with biases also randomized, so every tensor
/// contributes to the output.
pub fn random_params(head: Head, horizon: usize, widths: (usize, usize), seed: u64) -> ParameterSet {
    let spec = NetworkSpec::new(head, horizon).with_widths(widths.0, widths.1);
    let mut p = init_params(&spec, seed);
    let mut r = rng(seed ^ 0x5eed);
    for name in ["conv1.bias", "conv2.bias", "dense.bias"] {
        for b in p.tensor_mut(name).unwrap() {
            *b = r.random_range(-0.1..0.1);
        }
    }
    p
}

/// Reference forward pass written directly from the layer definitions:
/// same-padded cross-correlation, rectifier, second convolution, rectifier,
/// dense over the channel-major flattening. Returns the head logits.
pub fn naive_logits(params: &ParameterSet, state: &State) -> Vec<f64> {
    let spec = params.spec();
    let t = spec.sequence_length;
    let (c1, c2) = (spec.conv1_channels, spec.conv2_channels);
    let out = spec.head.output_dim();
    let k = 7usize;
    let pad = (k / 2) as isize;

    let mut x = vec![vec![0.0; t]; 3];
    for (j, slot) in state.slots().iter().enumerate() {
        for c in 0..3 {
            x[c][j] = slot[c];
        }
    }
    let conv = |input: &Vec<Vec<f64>>, w: &[f64], b: &[f64], cout: usize| {
        let cin = input.len();
        let mut y = vec![vec![0.0; t]; cout];
        for o in 0..cout {
            for pos in 0..t {
                let mut acc = b[o];
                for i in 0..cin {
                    for kk in 0..k {
                        let src = pos as isize + kk as isize - pad;
                        if src >= 0 && (src as usize) < t {
                            acc += w[(o * cin + i) * k + kk] * input[i][src as usize];
                        }
                    }
                }
                y[o][pos] = if acc > 0.0 { acc } else { 0.0 };
            }
        }
        y
    };
    let h1 = conv(&x, params.tensor("conv1.weight").unwrap(), params.tensor("conv1.bias").unwrap(), c1);
    let h2 = conv(&h1, params.tensor("conv2.weight").unwrap(), params.tensor("conv2.bias").unwrap(), c2);
    let w = params.tensor("dense.weight").unwrap();
    let b = params.tensor("dense.bias").unwrap();
    (0..out)
        .map(|o| {
            let mut acc = b[o];
            for c in 0..c2 {
                for pos in 0..t {
                    acc += w[o * c2 * t + c * t + pos] * h2[c][pos];
                }
            }
            acc
        })
        .collect()
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Outcome of a finite-difference comparison.
pub struct GradCheck {
    pub checked: usize,
    pub agreeing: usize,
    pub worst: f64,
}

impl GradCheck {
    pub fn fraction(&self) -> f64 {
        self.agreeing as f64 / self.checked as f64
    }
}

/// Compares the analytic gradient with central differences of step `h` on
/// `count` random coordinates. A coordinate agrees when the relative error
/// `|a - n| / max(|a|, |n|)` is at most `tol` (or both are exactly zero).
pub fn grad_check<L: Loss>(loss: &L, params: &ParameterSet, count: usize, h: f64, tol: f64, seed: u64) -> GradCheck {
    let (_, grad) = loss.value_and_gradient(params).unwrap();
    let mut r = rng(seed);
    let mut probe = params.clone();
    let mut agreeing = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let i = r.random_range(0..params.len());
        let orig = params.values()[i];
        probe.values_mut()[i] = orig + h;
        let up = loss.value(&probe).unwrap();
        probe.values_mut()[i] = orig - h;
        let down = loss.value(&probe).unwrap();
        probe.values_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grad.values()[i];
        let scale = analytic.abs().max(numeric.abs());
        let rel = if scale == 0.0 { 0.0 } else { (analytic - numeric).abs() / scale };
        worst = worst.max(rel);
        if rel <= tol {
            agreeing += 1;
        }
    }
    GradCheck {
        checked: count,
        agreeing,
        worst,
    }
}
