//! Forward and reverse passes of the conv-relu-conv-relu-dense approximator.
//!
//! Feature maps are stored channel-major (`[channel][position]`). Both
//! convolutions are "same" convolutions: the input is zero-padded by
//! `KERNEL_SIZE / 2` on each side so every layer keeps the sequence length.

use crate::error::{Error, Result};
use crate::trajectory::{Action, State};

use super::params::{Head, NetworkSpec, ParameterSet, INPUT_CHANNELS, KERNEL_SIZE};

const HALF: isize = (KERNEL_SIZE / 2) as isize;

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Intermediate values of one forward pass, kept for the reverse pass.
#[derive(Debug, Clone)]
pub struct Activations {
    input: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    /// Head outputs before the squash.
    pub logits: Vec<f64>,
}

/// Valid output range for a kernel tap at `offset`.
#[inline]
fn tap_range(offset: isize, len: usize) -> (usize, usize) {
    let lo = (-offset).max(0) as usize;
    let hi = (len as isize - offset).min(len as isize).max(0) as usize;
    (lo, hi)
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yy, xx) in y.iter_mut().zip(x) {
        *yy += a * xx;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn conv_forward(x: &[f64], cin: usize, len: usize, w: &[f64], b: &[f64], y: &mut [f64]) {
    let cout = b.len();
    for o in 0..cout {
        let yo = &mut y[o * len..(o + 1) * len];
        yo.fill(b[o]);
        for i in 0..cin {
            let xi = &x[i * len..(i + 1) * len];
            let wk = &w[(o * cin + i) * KERNEL_SIZE..(o * cin + i + 1) * KERNEL_SIZE];
            for (k, &wv) in wk.iter().enumerate() {
                let off = k as isize - HALF;
                let (lo, hi) = tap_range(off, len);
                if lo >= hi {
                    continue;
                }
                let s = (lo as isize + off) as usize;
                axpy(&mut yo[lo..hi], wv, &xi[s..s + hi - lo]);
            }
        }
    }
}

/// Accumulates weight/bias gradients and, optionally, the input gradient.
#[allow(clippy::too_many_arguments)]
fn conv_backward(
    x: &[f64],
    cin: usize,
    len: usize,
    w: &[f64],
    dy: &[f64],
    cout: usize,
    mut dwb: Option<(&mut [f64], &mut [f64])>,
    mut dx: Option<&mut [f64]>,
) {
    for o in 0..cout {
        let dyo = &dy[o * len..(o + 1) * len];
        if let Some((_, db)) = dwb.as_mut() {
            db[o] += dyo.iter().sum::<f64>();
        }
        for i in 0..cin {
            let xi = &x[i * len..(i + 1) * len];
            let base = (o * cin + i) * KERNEL_SIZE;
            for k in 0..KERNEL_SIZE {
                let off = k as isize - HALF;
                let (lo, hi) = tap_range(off, len);
                if lo >= hi {
                    continue;
                }
                let s = (lo as isize + off) as usize;
                if let Some((dw, _)) = dwb.as_mut() {
                    dw[base + k] += dot(&dyo[lo..hi], &xi[s..s + hi - lo]);
                }
                if let Some(dx) = dx.as_deref_mut() {
                    let dxi = &mut dx[i * len..(i + 1) * len];
                    axpy(&mut dxi[s..s + hi - lo], w[base + k], &dyo[lo..hi]);
                }
            }
        }
    }
}

/// Runs the network on a channel-major `3 x T` input.
pub fn forward(params: &ParameterSet, input: &[f64]) -> Activations {
    let spec = params.spec();
    let t = spec.sequence_length;
    debug_assert_eq!(input.len(), INPUT_CHANNELS * t);
    let l = spec.layout();
    let v = params.values();
    let (c1, c2) = (spec.conv1_channels, spec.conv2_channels);

    let mut h1 = vec![0.0; c1 * t];
    conv_forward(input, INPUT_CHANNELS, t, &v[l.conv1_w], &v[l.conv1_b], &mut h1);
    h1.iter_mut().for_each(|a| *a = a.max(0.0));

    let mut h2 = vec![0.0; c2 * t];
    conv_forward(&h1, c1, t, &v[l.conv2_w], &v[l.conv2_b.clone()], &mut h2);
    h2.iter_mut().for_each(|a| *a = a.max(0.0));

    let dw = &v[l.dense_w];
    let db = &v[l.dense_b];
    let n = c2 * t;
    let logits = (0..spec.output_dim())
        .map(|o| db[o] + dot(&dw[o * n..(o + 1) * n], &h2))
        .collect();

    Activations {
        input: input.to_vec(),
        h1,
        h2,
        logits,
    }
}

/// Reverse pass from head-logit gradients.
///
/// Parameter gradients are accumulated into `grad` (same layout as
/// `params`) and the input gradient into `d_input`; either may be skipped.
pub fn backward(
    params: &ParameterSet,
    acts: &Activations,
    d_logits: &[f64],
    mut grad: Option<&mut [f64]>,
    d_input: Option<&mut [f64]>,
) {
    let spec = params.spec();
    let t = spec.sequence_length;
    let l = spec.layout();
    let v = params.values();
    let (c1, c2) = (spec.conv1_channels, spec.conv2_channels);
    let n = c2 * t;

    let mut dh2 = vec![0.0; n];
    {
        let w = &v[l.dense_w.clone()];
        for (o, &d) in d_logits.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            if let Some(grad) = grad.as_deref_mut() {
                grad[l.dense_b.start + o] += d;
                let gw = &mut grad[l.dense_w.start + o * n..l.dense_w.start + (o + 1) * n];
                axpy(gw, d, &acts.h2);
            }
            axpy(&mut dh2, d, &w[o * n..(o + 1) * n]);
        }
    }
    for (d, &a) in dh2.iter_mut().zip(&acts.h2) {
        if a <= 0.0 {
            *d = 0.0;
        }
    }

    let mut dh1 = vec![0.0; c1 * t];
    {
        let dwb = grad.as_deref_mut().map(|g| {
            let (lo, hi) = g.split_at_mut(l.conv2_b.start);
            (&mut lo[l.conv2_w.clone()], &mut hi[..c2])
        });
        conv_backward(
            &acts.h1,
            c1,
            t,
            &v[l.conv2_w.clone()],
            &dh2,
            c2,
            dwb,
            Some(&mut dh1),
        );
    }
    for (d, &a) in dh1.iter_mut().zip(&acts.h1) {
        if a <= 0.0 {
            *d = 0.0;
        }
    }

    let dwb = grad.map(|g| {
        let (lo, hi) = g.split_at_mut(l.conv1_b.start);
        (&mut lo[l.conv1_w.clone()], &mut hi[..c1])
    });
    conv_backward(
        &acts.input,
        INPUT_CHANNELS,
        t,
        &v[l.conv1_w.clone()],
        &dh1,
        c1,
        dwb,
        d_input,
    );
}

pub(crate) fn check_input(params: &ParameterSet, state: &State, head: Head) -> Result<()> {
    let spec: &NetworkSpec = params.spec();
    if spec.head != head {
        return Err(Error::invalid(format!(
            "expected {head:?} parameters, got {:?}",
            spec.head
        )));
    }
    if state.horizon() != spec.sequence_length {
        return Err(Error::invalid(format!(
            "state horizon {} does not match network sequence length {}",
            state.horizon(),
            spec.sequence_length
        )));
    }
    Ok(())
}

/// The actor's next pen position for `state`, in `[0, 1]^2`.
pub fn actor_forward(params: &ParameterSet, state: &State) -> Result<Action> {
    check_input(params, state, Head::Actor)?;
    let a = forward(params, &state.channels());
    Ok(Action::new(sigmoid(a.logits[0]), sigmoid(a.logits[1])))
}

/// The critic's value estimate `V(state)`.
pub fn critic_forward(params: &ParameterSet, state: &State) -> Result<f64> {
    check_input(params, state, Head::Critic)?;
    Ok(forward(params, &state.channels()).logits[0])
}

/// Pre-sigmoid discriminator score.
pub fn discriminator_logit(params: &ParameterSet, state: &State) -> Result<f64> {
    check_input(params, state, Head::Discriminator)?;
    Ok(forward(params, &state.channels()).logits[0])
}

/// Probability that `state` is an expert trajectory.
///
/// Kept strictly inside `(0, 1)` even when the sigmoid saturates in double
/// precision.
pub fn discriminator_forward(params: &ParameterSet, state: &State) -> Result<f64> {
    let p = sigmoid(discriminator_logit(params, state)?);
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::init_params;
    use crate::trajectory::{make_state, Point};

    fn state(t: usize) -> State {
        make_state(&[Point::new(0.3, 0.6), Point::new(0.35, 0.55)], t).unwrap()
    }

    #[test]
    fn zero_network_outputs() {
        let s = state(10);
        let actor = ParameterSet::zeros(NetworkSpec::new(Head::Actor, 10));
        assert_eq!(actor_forward(&actor, &s).unwrap(), Action::new(0.5, 0.5));
        let critic = ParameterSet::zeros(NetworkSpec::new(Head::Critic, 10));
        assert_eq!(critic_forward(&critic, &s).unwrap(), 0.0);
        let disc = ParameterSet::zeros(NetworkSpec::new(Head::Discriminator, 10));
        assert_eq!(discriminator_forward(&disc, &s).unwrap(), 0.5);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let actor = ParameterSet::zeros(NetworkSpec::new(Head::Actor, 10));
        assert!(matches!(
            actor_forward(&actor, &state(12)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            critic_forward(&actor, &state(10)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn head_scaling_is_linear() {
        let spec = NetworkSpec::new(Head::Critic, 12).with_widths(8, 4);
        let p = init_params(&spec, 3);
        let s = state(12);
        let v = critic_forward(&p, &s).unwrap();
        let mut q = p.clone();
        q.tensor_mut("dense.weight").unwrap().iter_mut().for_each(|w| *w *= -2.5);
        let scaled = critic_forward(&q, &s).unwrap();
        assert!((scaled + 2.5 * v).abs() < 1e-12 * v.abs().max(1.0));
    }

    #[test]
    fn saturated_discriminator_stays_open() {
        let spec = NetworkSpec::new(Head::Discriminator, 6).with_widths(2, 2);
        let mut p = ParameterSet::zeros(spec);
        p.tensor_mut("dense.bias").unwrap()[0] = 100.0;
        let d = discriminator_forward(&p, &state(6)).unwrap();
        assert!(d > 0.0 && d < 1.0);
        p.tensor_mut("dense.bias").unwrap()[0] = -800.0;
        let d = discriminator_forward(&p, &state(6)).unwrap();
        assert!(d > 0.0 && d < 1.0);
    }
}
