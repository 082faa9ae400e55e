use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input channels of every network: x, y and the validity flag.
pub const INPUT_CHANNELS: usize = 3;
pub const KERNEL_SIZE: usize = 7;
pub const STRIDE: usize = 1;
pub const CONV1_CHANNELS: usize = 128;
pub const CONV2_CHANNELS: usize = 64;

/// Which role a network plays; fixes its output width and squash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Two outputs squashed by the logistic sigmoid into `[0, 1]^2`.
    Actor,
    /// One unsquashed output.
    Critic,
    /// One output squashed by the logistic sigmoid into `(0, 1)`.
    Discriminator,
}

impl Head {
    pub fn output_dim(self) -> usize {
        match self {
            Head::Actor => 2,
            Head::Critic | Head::Discriminator => 1,
        }
    }

    pub fn squashed(self) -> bool {
        !matches!(self, Head::Critic)
    }
}

/// Architecture of the conv-relu-conv-relu-dense approximator.
///
/// Both convolutions use kernel 7, stride 1 and zero padding, so every hidden
/// feature map keeps the input sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub head: Head,
    pub sequence_length: usize,
    pub conv1_channels: usize,
    pub conv2_channels: usize,
}

/// Name, shape and flat-storage range of one parameter tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: &'static str,
    pub shape: Vec<usize>,
    pub range: Range<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub conv1_w: Range<usize>,
    pub conv1_b: Range<usize>,
    pub conv2_w: Range<usize>,
    pub conv2_b: Range<usize>,
    pub dense_w: Range<usize>,
    pub dense_b: Range<usize>,
}

impl NetworkSpec {
    pub fn new(head: Head, sequence_length: usize) -> Self {
        NetworkSpec {
            head,
            sequence_length,
            conv1_channels: CONV1_CHANNELS,
            conv2_channels: CONV2_CHANNELS,
        }
    }

    /// Same architecture with narrower (or wider) convolutions.
    pub fn with_widths(mut self, conv1_channels: usize, conv2_channels: usize) -> Self {
        self.conv1_channels = conv1_channels;
        self.conv2_channels = conv2_channels;
        self
    }

    pub fn output_dim(&self) -> usize {
        self.head.output_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequence_length == 0 || self.conv1_channels == 0 || self.conv2_channels == 0 {
            return Err(Error::invalid(format!("degenerate network spec {self:?}")));
        }
        Ok(())
    }

    pub(crate) fn layout(&self) -> Layout {
        let t = self.sequence_length;
        let (c1, c2, out) = (self.conv1_channels, self.conv2_channels, self.output_dim());
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        Layout {
            conv1_w: take(c1 * INPUT_CHANNELS * KERNEL_SIZE),
            conv1_b: take(c1),
            conv2_w: take(c2 * c1 * KERNEL_SIZE),
            conv2_b: take(c2),
            dense_w: take(out * c2 * t),
            dense_b: take(out),
        }
    }

    pub fn tensors(&self) -> Vec<TensorInfo> {
        let l = self.layout();
        let (c1, c2, out) = (self.conv1_channels, self.conv2_channels, self.output_dim());
        vec![
            TensorInfo {
                name: "conv1.weight",
                shape: vec![c1, INPUT_CHANNELS, KERNEL_SIZE],
                range: l.conv1_w,
            },
            TensorInfo {
                name: "conv1.bias",
                shape: vec![c1],
                range: l.conv1_b,
            },
            TensorInfo {
                name: "conv2.weight",
                shape: vec![c2, c1, KERNEL_SIZE],
                range: l.conv2_w,
            },
            TensorInfo {
                name: "conv2.bias",
                shape: vec![c2],
                range: l.conv2_b,
            },
            TensorInfo {
                name: "dense.weight",
                shape: vec![out, c2 * self.sequence_length],
                range: l.dense_w,
            },
            TensorInfo {
                name: "dense.bias",
                shape: vec![out],
                range: l.dense_b,
            },
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.layout().dense_b.end
    }
}

/// Flat, ordered storage for every weight of one network.
///
/// Gradients use the same type, so optimizer arithmetic is elementwise on
/// `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    spec: NetworkSpec,
    values: Vec<f64>,
}

impl ParameterSet {
    pub fn zeros(spec: NetworkSpec) -> Self {
        ParameterSet {
            values: vec![0.0; spec.parameter_count()],
            spec,
        }
    }

    pub fn from_values(spec: NetworkSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.parameter_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a spec needing {}",
                values.len(),
                spec.parameter_count()
            )));
        }
        Ok(ParameterSet { spec, values })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.spec
            .tensors()
            .into_iter()
            .find(|t| t.name == name)
            .map(|t| &self.values[t.range])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let info = self.spec.tensors().into_iter().find(|t| t.name == name)?;
        Some(&mut self.values[info.range])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &ParameterSet, factor: f64) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
    }

    /// Polyak averaging: `self <- (1 - tau) * self + tau * online`.
    pub fn soft_update(&mut self, online: &ParameterSet, tau: f64) {
        for (a, b) in self.values.iter_mut().zip(&online.values) {
            *a = (1.0 - tau) * *a + tau * b;
        }
    }

    pub fn max_abs_diff(&self, other: &ParameterSet) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Fan-in scaled uniform initialization: weights in `±1/sqrt(fan_in)`, biases zero.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParameterSet::zeros(*spec);
    let l = spec.layout();
    let fans = [
        (l.conv1_w, INPUT_CHANNELS * KERNEL_SIZE),
        (l.conv2_w, spec.conv1_channels * KERNEL_SIZE),
        (l.dense_w, spec.conv2_channels * spec.sequence_length),
    ];
    for (range, fan_in) in fans {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for v in &mut params.values[range] {
            *v = rng.random_range(-bound..bound);
        }
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let spec = NetworkSpec::new(Head::Critic, 50);
        let a = init_params(&spec, 7);
        let b = init_params(&spec, 7);
        let bits = |p: &ParameterSet| p.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, init_params(&spec, 8));
    }

    #[test]
    fn shapes_follow_architecture() {
        let spec = NetworkSpec::new(Head::Actor, 50);
        let shapes: Vec<_> = spec.tensors().into_iter().map(|t| (t.name, t.shape)).collect();
        assert_eq!(shapes[0], ("conv1.weight", vec![128, 3, 7]));
        assert_eq!(shapes[2], ("conv2.weight", vec![64, 128, 7]));
        assert_eq!(shapes[4], ("dense.weight", vec![2, 64 * 50]));
        assert_eq!(shapes[5], ("dense.bias", vec![2]));
        let p = init_params(&spec, 1);
        assert!(p.tensor("conv1.bias").unwrap().iter().all(|&b| b == 0.0));
        assert!(p.tensor("dense.bias").unwrap().iter().all(|&b| b == 0.0));
        let bound = 1.0 / (21.0f64).sqrt();
        assert!(p.tensor("conv1.weight").unwrap().iter().all(|w| w.abs() <= bound));
        assert_eq!(p.len(), 128 * 21 + 128 + 64 * 128 * 7 + 64 + 2 * 3200 + 2);
    }

    #[test]
    fn soft_update_mixes() {
        let spec = NetworkSpec::new(Head::Critic, 4).with_widths(2, 2);
        let mut target = ParameterSet::zeros(spec);
        let mut online = ParameterSet::zeros(spec);
        online.values_mut().iter_mut().for_each(|v| *v = 2.0);
        target.soft_update(&online, 0.25);
        assert!(target.values().iter().all(|&v| v == 0.5));
    }
}
