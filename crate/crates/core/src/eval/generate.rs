use crate::error::{Error, Result};
use crate::gail::rollout;
use crate::nn::loss::map_ordered;
use crate::nn::ParameterSet;
use crate::trajectory::{make_state, Trajectory};

/// Keeps the first `t0` points of `source` and lets the policy write the rest
/// without exploration noise.
pub fn generate_from_prefix(
    actor: &ParameterSet,
    source: &Trajectory,
    t0: usize,
) -> Result<Trajectory> {
    let horizon = actor.spec().sequence_length;
    if source.len() != horizon {
        return Err(Error::invalid(format!(
            "source has {} points, policy horizon is {horizon}",
            source.len()
        )));
    }
    if t0 == 0 || t0 >= horizon {
        return Err(Error::invalid(format!(
            "prefix length {t0} must lie in 1..{horizon}"
        )));
    }
    let initial = make_state(&source.points[..t0], horizon)?;
    let episode = rollout(actor, &initial, 0.0, 0)?;
    let mut out = episode
        .final_state()
        .expect("non-full state yields transitions")
        .to_trajectory();
    // Exact copies of the prefix.
    out.points[..t0].copy_from_slice(&source.points[..t0]);
    out.label = source.label.clone();
    out.id = source.id.clone();
    Ok(out)
}

/// [`generate_from_prefix`] over a whole set, in input order.
pub fn generate_set(actor: &ParameterSet, sources: &[Trajectory], t0: usize) -> Result<Vec<Trajectory>> {
    map_ordered(sources, |s| generate_from_prefix(actor, s, t0))
        .into_iter()
        .collect()
}
