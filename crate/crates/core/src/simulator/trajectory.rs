//! Sample paths of the composite background process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::background::{CompositeState, Model, StateSpace};
use crate::error::{Error, Result};
use crate::network::ArcId;

/// Seeded generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Piecewise-constant sample path starting at time 0. Extends itself on
/// demand; the path does not depend on how it is extended.
#[derive(Debug, Clone)]
pub struct Trajectory<'m> {
    model: &'m Model,
    filter: Option<&'m StateSpace>,
    /// Start time of each segment; `times[0] == 0`.
    times: Vec<f64>,
    states: Vec<CompositeState>,
    horizon: f64,
    pending: Option<f64>,
    busy: usize,
    rng: ChaCha8Rng,
}

impl<'m> Trajectory<'m> {
    /// Samples up to `horizon` hours from `s0` (given in arc order).
    pub fn sample(model: &'m Model, s0: CompositeState, horizon: f64, rng: ChaCha8Rng) -> Result<Self> {
        Self::sample_within(model, None, s0, horizon, rng)
    }

    /// As `sample`, but jumps leaving `filter` are suppressed like over-cap
    /// jumps. `filter` must be a space over all arcs.
    pub fn sample_within(
        model: &'m Model,
        filter: Option<&'m StateSpace>,
        s0: CompositeState,
        horizon: f64,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let n = model.network().num_arcs();
        if s0.arcs.len() != n {
            return Err(Error::InvalidArgument(format!("state has {} arcs, network has {n}", s0.arcs.len())));
        }
        for (a, &x) in s0.arcs.iter().enumerate() {
            if x >= model.chain(a).n_states() {
                return Err(Error::InvalidArgument(format!("arc {a}: state {x} out of range")));
            }
        }
        let m = model.global().map_or(1, |g| g.m_states());
        if s0.global >= m {
            return Err(Error::InvalidArgument(format!("global state {} out of range", s0.global)));
        }
        let busy = (0..n).filter(|&a| !model.chain(a).is_free(s0.arcs[a])).count();
        if model.cap().is_some_and(|c| busy > c) {
            return Err(Error::InvalidArgument("initial state exceeds the incident cap".into()));
        }
        if let Some(f) = filter {
            if f.index_of(&s0).is_none() {
                return Err(Error::InvalidArgument("initial state is not a kept state".into()));
            }
        }
        let mut t =
            Trajectory { model, filter, times: vec![0.0], states: vec![s0], horizon: 0.0, pending: None, busy, rng };
        t.extend_to(horizon);
        Ok(t)
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.times[1..]
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, &CompositeState)> + '_ {
        self.times.iter().copied().zip(&self.states)
    }

    pub fn initial_state(&self) -> &CompositeState {
        &self.states[0]
    }

    /// Total exit rate of the current state, ignoring suppression.
    fn total_rate(&self, s: &CompositeState) -> f64 {
        let mut r: f64 = (0..s.arcs.len()).map(|a| self.model.chain_generator(a, s.global).exit_rate(s.arcs[a])).sum();
        if let Some(g) = self.model.global() {
            r += g.generator.exit_rate(s.global);
        }
        r
    }

    /// Samples events until the path is known up to time `t`.
    pub fn extend_to(&mut self, t: f64) {
        while self.horizon < t {
            let s = self.states.last().expect("non-empty path").clone();
            let rate = self.total_rate(&s);
            if rate <= 0.0 {
                self.horizon = f64::INFINITY;
                return;
            }
            let clock = self.horizon;
            let te = match self.pending.take() {
                Some(te) => te,
                None => {
                    let e: f64 = self.rng.sample(Exp1);
                    clock + e / rate
                }
            };
            if te > t {
                self.pending = Some(te);
                self.horizon = t;
                return;
            }
            self.horizon = te;
            self.jump(s, rate, te);
        }
    }

    /// Picks the jump with probability proportional to its rate.
    fn choose(&mut self, s: &CompositeState, rate: f64) -> Option<(Option<ArcId>, usize)> {
        let mut u = self.rng.random::<f64>() * rate;
        let mut fallback = None;
        for (a, &x) in s.arcs.iter().enumerate() {
            let g = self.model.chain_generator(a, s.global);
            let out = g.exit_rate(x);
            if out <= 0.0 {
                continue;
            }
            fallback = Some(a);
            if u >= out {
                u -= out;
                continue;
            }
            for y in (0..g.dim()).filter(|&y| y != x) {
                let q = g.rate(x, y);
                if q > 0.0 && u < q {
                    return Some((Some(a), y));
                }
                u -= q;
            }
            return (0..g.dim()).rev().find(|&y| y != x && g.rate(x, y) > 0.0).map(|y| (Some(a), y));
        }
        if let Some(g) = self.model.global() {
            let y0 = s.global;
            let mut last = None;
            for y in (0..g.m_states()).filter(|&y| y != y0) {
                let q = g.generator.rate(y0, y);
                if q <= 0.0 {
                    continue;
                }
                last = Some(y);
                if u < q {
                    return Some((None, y));
                }
                u -= q;
            }
            if let Some(y) = last {
                return Some((None, y));
            }
        }
        // Rounding left u past the last rate: take the last candidate chain.
        let a = fallback?;
        let g = self.model.chain_generator(a, s.global);
        let x = s.arcs[a];
        (0..g.dim()).rev().find(|&y| y != x && g.rate(x, y) > 0.0).map(|y| (Some(a), y))
    }

    fn jump(&mut self, mut s: CompositeState, rate: f64, te: f64) {
        let target = self.choose(&s, rate);
        let Some((coord, value)) = target else { return };
        let mut busy = self.busy;
        match coord {
            Some(a) => {
                let chain = self.model.chain(a);
                busy = busy - usize::from(!chain.is_free(s.arcs[a])) + usize::from(!chain.is_free(value));
                if self.model.cap().is_some_and(|c| busy > c) {
                    return;
                }
                s.arcs[a] = value;
            }
            None => s.global = value,
        }
        if let Some(f) = self.filter {
            if f.index_of(&s).is_none() {
                return;
            }
        }
        self.busy = busy;
        self.times.push(te);
        self.states.push(s);
    }

    /// Index of the segment containing time `t` (must be within the horizon).
    fn segment(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t).saturating_sub(1)
    }

    /// State at time `t`, extending the path if needed.
    pub fn state_at(&mut self, t: f64) -> &CompositeState {
        self.extend_to(t);
        let i = self.segment(t);
        &self.states[i]
    }

    /// Time to cover `d` km on arc `a` entering at `t0`, integrating the
    /// piecewise-constant speed.
    pub fn arc_time(&mut self, a: ArcId, t0: f64, d: f64) -> f64 {
        let mut t = t0;
        let mut remaining = d;
        self.extend_to(t0);
        loop {
            let i = self.segment(t);
            let v = self.model.speed_at(a, &self.states[i]);
            if i + 1 == self.times.len() && self.horizon.is_finite() {
                let needed = t + remaining / v;
                if needed > self.horizon {
                    self.extend_to(needed.max(2.0 * self.horizon));
                    continue;
                }
            }
            let end = self.times.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let reach = v * (end - t);
            if reach >= remaining {
                return t + remaining / v - t0;
            }
            remaining -= reach;
            t = end;
        }
    }
}

/// Realized traversal time of arc `a` (length from the network).
pub fn realized_arc_time(traj: &mut Trajectory<'_>, a: ArcId, t0: f64) -> f64 {
    let d = traj.model.network().arcs()[a].length_km;
    traj.arc_time(a, t0, d)
}
