//! Hitting-probability bounds and state pruning.

use std::collections::BTreeSet;

use crate::background::{CompositeState, Generator, Model, StateSpace};
use crate::error::{Error, Result};

/// Relative spacing used to separate repeated rates before `hypoexp_cdf`.
/// Rates are only moved upwards, which keeps the bound conservative.
const RATE_SEPARATION: f64 = 1e-6;

/// P(S ≤ m) for S a sum of independent exponentials with pairwise distinct rates.
pub fn hypoexp_cdf(rates: &[f64], m: f64) -> Result<f64> {
    if m.is_nan() || m < 0.0 {
        return Err(Error::InvalidArgument(format!("horizon must be non-negative, got {m}")));
    }
    if rates.is_empty() {
        return Ok(1.0);
    }
    if let Some(&r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidArgument(format!("rates must be positive, got {r}")));
    }
    for (i, &a) in rates.iter().enumerate() {
        if rates[..i].contains(&a) {
            return Err(Error::DuplicateRates(a));
        }
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let mut p = 0.0;
    for (n, &ln) in rates.iter().enumerate() {
        let c: f64 = rates.iter().enumerate().filter(|&(j, _)| j != n).map(|(_, &lj)| lj / (lj - ln)).product();
        p += c * (-(-ln * m).exp_m1());
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Outcome of a hitting bound: the bound and how many coordinates could only
/// be bounded by 1 because their chain is not birth-death.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitBound {
    pub bound: f64,
    pub flagged: usize,
}

fn separate(rates: &mut [f64]) {
    for i in 0..rates.len() {
        let mut bump = 1.0;
        while rates[..i].iter().any(|&r| (r - rates[i]).abs() < 0.5 * RATE_SEPARATION * r) {
            rates[i] *= 1.0 + RATE_SEPARATION * bump;
            bump += 1.0;
        }
    }
}

/// Bound on reaching state `to` from `from` within `m` for one chain, taking
/// the largest rate over all `variants` (global-state overrides) per step.
/// Returns `None` when the chain is not birth-death.
fn chain_bound(variants: &[&Generator], from: usize, to: usize, m: f64) -> Result<Option<f64>> {
    if from == to {
        return Ok(Some(1.0));
    }
    if !variants.iter().all(|g| g.is_birth_death()) {
        return Ok(None);
    }
    let step_rate = |i: usize, j: usize| variants.iter().map(|g| g.rate(i, j)).fold(0.0, f64::max);
    let mut rates: Vec<f64> = if to > from {
        (from..to).map(|i| step_rate(i, i + 1)).collect()
    } else {
        (to + 1..=from).rev().map(|i| step_rate(i, i - 1)).collect()
    };
    if rates.iter().any(|&r| r <= 0.0) {
        return Ok(Some(0.0));
    }
    separate(&mut rates);
    hypoexp_cdf(&rates, m).map(Some)
}

/// Upper bound on the probability that the background moves from `s` to
/// `target` within `m` hours: a product of per-coordinate bounds.
pub fn hit_prob_bound(model: &Model, s: &CompositeState, target: &CompositeState, m: f64) -> Result<HitBound> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {m}")));
    }
    let n = model.network().num_arcs();
    if s.arcs.len() != n || target.arcs.len() != n {
        return Err(Error::InvalidArgument(format!("states must have {n} arc coordinates")));
    }
    let tables = BoundTables::new(model, s, m)?;
    Ok(tables.bound(target))
}

/// Per-coordinate bounds from a fixed start state.
struct BoundTables {
    arcs: Vec<Vec<Option<f64>>>,
    global: Vec<f64>,
}

impl BoundTables {
    fn new(model: &Model, s: &CompositeState, m: f64) -> Result<Self> {
        let m_states = model.global().map_or(1, |g| g.m_states());
        let mut arcs = Vec::with_capacity(s.arcs.len());
        for (a, &x) in s.arcs.iter().enumerate() {
            let mut variants: Vec<&Generator> = (0..m_states).map(|y| model.chain_generator(a, y)).collect();
            variants.dedup_by(|p, q| std::ptr::eq(*p, *q));
            let dim = model.chain(a).n_states();
            arcs.push((0..dim).map(|t| chain_bound(&variants, x, t, m)).collect::<Result<Vec<_>>>()?);
        }
        let global = match model.global() {
            Some(g) => (0..g.m_states())
                .map(|t| chain_bound(&[&g.generator], s.global, t, m).map(|b| b.unwrap_or(1.0)))
                .collect::<Result<Vec<_>>>()?,
            None => vec![1.0],
        };
        Ok(BoundTables { arcs, global })
    }

    fn bound(&self, target: &CompositeState) -> HitBound {
        let mut bound = self.global[target.global];
        let mut flagged = 0;
        for (row, &t) in self.arcs.iter().zip(&target.arcs) {
            match row[t] {
                Some(b) => bound *= b,
                None => flagged += 1,
            }
        }
        HitBound { bound, flagged }
    }
}

/// States of `space` whose hitting bound from `s0` within `m` exceeds
/// `epsilon`, plus `s0` itself. With `epsilon == 0` every state is kept.
pub fn prune_states_hitting(
    model: &Model,
    space: &StateSpace,
    s0: &CompositeState,
    m: f64,
    epsilon: f64,
) -> Result<Vec<CompositeState>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(space.iter().collect());
    }
    if m.is_nan() || m <= 0.0 {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {m}")));
    }
    let tables = BoundTables::new(model, s0, m)?;
    let flagged = std::cell::Cell::new(0usize);
    let kept: Vec<CompositeState> = space
        .iter()
        .filter(|s| {
            if s == s0 {
                return true;
            }
            let b = tables.bound(s);
            flagged.set(flagged.get().max(b.flagged));
            b.bound > epsilon
        })
        .collect();
    if flagged.get() > 0 {
        log::warn!("hitting bound: some chains are not birth-death and were bounded by 1");
    }
    Ok(kept)
}

/// States of `space` that were observed, plus the current state.
/// An empty history keeps the whole space.
pub fn prune_states_historical(
    space: &StateSpace,
    observed: &[CompositeState],
    current: &CompositeState,
) -> Vec<CompositeState> {
    if observed.is_empty() {
        log::warn!("no historical states observed; keeping the full space");
        return space.iter().collect();
    }
    let mut kept: BTreeSet<CompositeState> = observed.iter().filter(|s| space.index_of(s).is_some()).cloned().collect();
    if space.index_of(current).is_some() {
        kept.insert(current.clone());
    }
    kept.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rate_closed_form() {
        let p = hypoexp_cdf(&[1.0, 2.0], 1.0).unwrap();
        let want = 1.0 - 2.0 * (-1.0f64).exp() + (-2.0f64).exp();
        assert!((p - want).abs() < 1e-14);
        assert!((want - 0.39958).abs() < 1e-5);
    }

    #[test]
    fn single_rate_and_zero_horizon() {
        assert!((hypoexp_cdf(&[0.3], 2.0).unwrap() - (1.0 - (-0.6f64).exp())).abs() < 1e-15);
        assert_eq!(hypoexp_cdf(&[1.0, 3.0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(matches!(hypoexp_cdf(&[1.0, 1.0], 1.0), Err(Error::DuplicateRates(_))));
    }

    #[test]
    fn birth_death_steps_use_one_direction() {
        let g =
            Generator::from_rates(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (1, 0, 5.0), (2, 1, 5.0), (3, 2, 5.0)])
                .unwrap();
        let up = chain_bound(&[&g], 1, 3, 0.5).unwrap().unwrap();
        assert!((up - hypoexp_cdf(&[2.0, 3.0], 0.5).unwrap()).abs() < 1e-14);
        let pure_birth = Generator::from_rates(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(chain_bound(&[&pure_birth], 2, 0, 1.0).unwrap(), Some(0.0));
    }
}
