use rayon::prelude::*;

use crate::error::{Error, Result};

use super::params::ParameterSet;

/// A scalar objective of one network's parameters with an exact gradient.
pub trait Loss {
    fn value(&self, params: &ParameterSet) -> Result<f64>;

    fn value_and_gradient(&self, params: &ParameterSet) -> Result<(f64, ParameterSet)>;
}

/// Gradient of `loss` at `params`; fails when the loss or gradient is not finite.
pub fn loss_gradients<L: Loss + ?Sized>(loss: &L, params: &ParameterSet) -> Result<ParameterSet> {
    let (value, grad) = loss.value_and_gradient(params)?;
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("loss value {value}")));
    }
    if !grad.is_finite() {
        return Err(Error::NonFinite("loss gradient".into()));
    }
    Ok(grad)
}

/// `factor * inner`.
pub struct Scaled<L> {
    pub inner: L,
    pub factor: f64,
}

impl<L: Loss> Loss for Scaled<L> {
    fn value(&self, params: &ParameterSet) -> Result<f64> {
        Ok(self.factor * self.inner.value(params)?)
    }

    fn value_and_gradient(&self, params: &ParameterSet) -> Result<(f64, ParameterSet)> {
        let (v, mut g) = self.inner.value_and_gradient(params)?;
        g.scale(self.factor);
        Ok((self.factor * v, g))
    }
}

const CHUNK: usize = 8;

/// Sums per-item `(value, gradient)` contributions over a batch.
///
/// Items are grouped in fixed-size chunks that are reduced in order, so the
/// result is bit-identical for any number of worker threads.
pub(crate) fn accumulate<T, F>(items: &[T], params: &ParameterSet, per_item: F) -> (f64, ParameterSet)
where
    T: Sync,
    F: Fn(&T, &mut [f64]) -> f64 + Sync,
{
    let n = params.len();
    let partials: Vec<(f64, Vec<f64>)> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; n];
            let mut v = 0.0;
            for item in chunk {
                v += per_item(item, &mut g);
            }
            (v, g)
        })
        .collect();
    let mut total = 0.0;
    let mut grad = ParameterSet::zeros(*params.spec());
    for (v, g) in partials {
        total += v;
        for (a, b) in grad.values_mut().iter_mut().zip(&g) {
            *a += b;
        }
    }
    (total, grad)
}

/// Ordered parallel map; the output order matches the input.
pub(crate) fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}
