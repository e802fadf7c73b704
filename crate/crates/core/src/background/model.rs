use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chain::{ArcChain, Generator, GlobalProcess};
use super::space::{CompositeState, Coord, StateSpace, DEFAULT_STATE_LIMIT};
use super::velocity::VelocityModel;
use crate::error::{Error, Result};
use crate::network::{ArcId, Network};
use crate::sparse::{CsrBuilder, CsrMatrix};

/// Background specification with arc ids in dense network order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub chains: Vec<ArcChain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<GlobalProcess>,
    pub velocity: VelocityModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incident_cap: Option<usize>,
}

impl Background {
    /// Parses a background file whose arc ids refer to the network file's ids.
    pub fn from_json(text: &str, net: &Network) -> Result<Self> {
        let raw: Background = serde_json::from_str(text).map_err(|e| Error::Parse(format!("background file: {e}")))?;
        raw.remap(|id| {
            net.arc_by_source_id(id).ok_or_else(|| Error::InvalidBackground(format!("reference to undefined arc {id}")))
        })
    }

    pub fn load(path: impl AsRef<Path>, net: &Network) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Background::from_json(&text, net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("background serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Rewrites every arc reference.
    pub fn remap(mut self, map: impl Fn(ArcId) -> Result<ArcId>) -> Result<Self> {
        for c in &mut self.chains {
            c.arc = map(c.arc)?;
        }
        if let Some(g) = &mut self.global {
            for o in &mut g.overrides {
                o.arc = map(o.arc)?;
            }
        }
        for r in &mut self.velocity.rules {
            if let Some(a) = r.arc {
                r.arc = Some(map(a)?);
            }
            if let Some(e) = &mut r.explicit {
                for (a, _) in &mut e.arcs {
                    *a = map(*a)?;
                }
            }
        }
        Ok(self)
    }
}

/// Neighbourhood structure of a network: arcs are adjacent when they share
/// an endpoint, regardless of direction.
pub fn neighborhood(net: &Network, arc: ArcId, r: usize) -> Result<Vec<ArcId>> {
    net.arc(arc)?;
    let mut dist = vec![usize::MAX; net.num_arcs()];
    dist[arc] = 0;
    let mut queue = VecDeque::from([arc]);
    while let Some(a) = queue.pop_front() {
        if dist[a] == r {
            continue;
        }
        let (t, h) = (net.arcs()[a].tail, net.arcs()[a].head);
        for node in [t, h] {
            for &b in net.out_arcs(node).iter().chain(net.in_arcs(node)) {
                if dist[b] == usize::MAX {
                    dist[b] = dist[a] + 1;
                    queue.push_back(b);
                }
            }
        }
    }
    Ok((0..net.num_arcs()).filter(|&b| dist[b] != usize::MAX).collect())
}

/// Network plus validated background: the complete routing model.
#[derive(Debug, Clone)]
pub struct Model {
    network: Network,
    background: Background,
    neighborhoods: Vec<Vec<ArcId>>,
    state_limit: usize,
}

impl Model {
    pub fn new(network: Network, mut background: Background) -> Result<Self> {
        let n = network.num_arcs();
        let mut chains: Vec<Option<ArcChain>> = vec![None; n];
        for c in background.chains.drain(..) {
            let a = c.arc;
            if a >= n {
                return Err(Error::InvalidBackground(format!("chain for undefined arc {a}")));
            }
            if c.free_states.iter().any(|&x| x >= c.n_states()) {
                return Err(Error::InvalidBackground(format!("arc {a}: free state out of range")));
            }
            if chains[a].replace(c).is_some() {
                return Err(Error::InvalidBackground(format!("duplicate chain for arc {a}")));
            }
        }
        background.chains =
            chains.into_iter().enumerate().map(|(a, c)| c.unwrap_or_else(|| ArcChain::constant(a))).collect();

        if let Some(g) = &background.global {
            for o in &g.overrides {
                if o.y >= g.m_states() || o.arc >= n {
                    return Err(Error::InvalidBackground(format!("override (y={}, arc={}) out of range", o.y, o.arc)));
                }
                if o.generator.dim() != background.chains[o.arc].n_states() {
                    return Err(Error::InvalidBackground(format!(
                        "override for arc {} has dimension {}, chain has {}",
                        o.arc,
                        o.generator.dim(),
                        background.chains[o.arc].n_states()
                    )));
                }
            }
        }

        let vel = &background.velocity;
        let neighborhoods = (0..n).map(|a| neighborhood(&network, a, vel.radius)).collect::<Result<Vec<_>>>()?;

        if !vel.defaults.is_empty() && vel.defaults.len() != n {
            return Err(Error::InvalidBackground(format!("{} default speeds for {n} arcs", vel.defaults.len())));
        }
        for (a, arc) in network.arcs().iter().enumerate() {
            let check = |speed: f64| -> Result<()> {
                if !(speed.is_finite() && speed > 0.0) {
                    return Err(Error::NonPositiveSpeed { arc: a, speed });
                }
                if speed > arc.max_speed_kmh * (1.0 + 1e-12) {
                    return Err(Error::InvalidBackground(format!(
                        "arc {a}: speed {speed} exceeds max speed {}",
                        arc.max_speed_kmh
                    )));
                }
                Ok(())
            };
            if let Some(&d) = vel.defaults.get(a) {
                check(d)?;
            }
            for rule in vel.rules_for(a) {
                check(rule.speed)?;
                if let Some(set) = &rule.own_in {
                    if set.iter().any(|&x| x >= background.chains[a].n_states()) {
                        return Err(Error::InvalidBackground(format!("arc {a}: rule state out of range")));
                    }
                }
                if let Some(e) = &rule.explicit {
                    for &(b, x) in &e.arcs {
                        if neighborhoods[a].binary_search(&b).is_err() {
                            return Err(Error::InvalidBackground(format!(
                                "arc {a}: explicit rule references arc {b} outside its radius-{} neighbourhood",
                                vel.radius
                            )));
                        }
                        if x >= background.chains[b].n_states() {
                            return Err(Error::InvalidBackground(format!("arc {b}: state {x} out of range")));
                        }
                    }
                }
                if rule.references_global() && background.global.is_none() {
                    return Err(Error::InvalidBackground(format!(
                        "arc {a}: rule tests the global state but no global process is defined"
                    )));
                }
            }
        }
        for rule in &vel.rules {
            if let Some(a) = rule.arc {
                if a >= n {
                    return Err(Error::InvalidBackground(format!("rule for undefined arc {a}")));
                }
            }
        }

        Ok(Model { network, background, neighborhoods, state_limit: DEFAULT_STATE_LIMIT })
    }

    pub fn load(network: impl AsRef<Path>, background: impl AsRef<Path>) -> Result<Self> {
        let net = Network::load(network)?;
        let bg = Background::load(background, &net)?;
        Model::new(net, bg)
    }

    pub fn with_state_limit(mut self, limit: usize) -> Self {
        self.state_limit = limit;
        self
    }

    /// Replaces the incident cap.
    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.background.incident_cap = cap;
        self
    }

    pub fn state_limit(&self) -> usize {
        self.state_limit
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    pub fn chain(&self, a: ArcId) -> &ArcChain {
        &self.background.chains[a]
    }

    pub fn global(&self) -> Option<&GlobalProcess> {
        self.background.global.as_ref()
    }

    pub fn radius(&self) -> usize {
        self.background.velocity.radius
    }

    pub fn cap(&self) -> Option<usize> {
        self.background.incident_cap
    }

    /// Arcs within the velocity radius of `a`, sorted, including `a`.
    pub fn neighborhood(&self, a: ArcId) -> &[ArcId] {
        &self.neighborhoods[a]
    }

    /// Chain generator of arc `a` while the global process is in state `y`.
    pub fn chain_generator(&self, a: ArcId, y: usize) -> &Generator {
        self.global().and_then(|g| g.override_for(y, a)).unwrap_or(&self.background.chains[a].generator)
    }

    /// True when the arc's dynamics depend on the global state.
    pub fn arc_depends_on_global(&self, a: ArcId) -> bool {
        self.global().is_some_and(|g| g.has_override_for_arc(a))
    }

    pub fn default_speed(&self, a: ArcId) -> f64 {
        self.background.velocity.defaults.get(a).copied().unwrap_or(self.network.arcs()[a].max_speed_kmh)
    }

    /// Speed of arc `a` given the global state and a per-arc state lookup.
    pub fn speed(&self, a: ArcId, global: usize, arc_state: impl Fn(ArcId) -> usize) -> f64 {
        let own = arc_state(a);
        let congested = || {
            self.neighborhoods[a]
                .iter()
                .filter(|&&b| b != a && !self.background.chains[b].is_free(arc_state(b)))
                .count()
        };
        for rule in self.background.velocity.rules_for(a) {
            if rule.matches(own, global, congested, &arc_state) {
                return rule.speed;
            }
        }
        self.default_speed(a)
    }

    pub fn speed_at(&self, a: ArcId, s: &CompositeState) -> f64 {
        self.speed(a, s.global, |b| s.arcs[b])
    }

    /// Lowest speed the arc can take under any rule or default.
    pub fn min_speed(&self, a: ArcId) -> f64 {
        self.background.velocity.rules_for(a).map(|r| r.speed).fold(self.default_speed(a), f64::min)
    }

    fn coord(&self, a: ArcId) -> Coord {
        let c = &self.background.chains[a];
        Coord { arc: a, n_states: c.n_states(), free: (0..c.n_states()).map(|x| c.is_free(x)).collect() }
    }

    /// Full composite space over all arcs.
    pub fn full_space(&self) -> Result<StateSpace> {
        self.full_space_with(None)
    }

    /// Full composite space restricted to `kept` states (given in arc order).
    pub fn full_space_with(&self, kept: Option<&[CompositeState]>) -> Result<StateSpace> {
        let coords = (0..self.network.num_arcs()).map(|a| self.coord(a)).collect();
        StateSpace::build(coords, self.global().map(GlobalProcess::m_states), self.cap(), kept, self.state_limit)
    }

    /// Size of the full capped space, computed without enumerating it.
    pub fn count_full_states(&self) -> f64 {
        let coords = (0..self.network.num_arcs()).map(|a| self.coord(a)).collect();
        StateSpace::count(coords, self.global().map(GlobalProcess::m_states), self.cap())
    }

    /// Neighbourhood of arc `a` at radius `r` (at least the velocity radius).
    pub fn neighborhood_at(&self, a: ArcId, r: usize) -> Result<Vec<ArcId>> {
        if r == self.radius() {
            return Ok(self.neighborhoods[a].clone());
        }
        neighborhood(&self.network, a, r)
    }

    /// Reduced space for arc `a`: the chains within radius `r`, plus the global
    /// state when it influences them, with the cap applied inside.
    pub fn reduced_space(&self, a: ArcId, r: usize) -> Result<StateSpace> {
        if r < self.radius() {
            return Err(Error::InvalidArgument(format!("radius {r} is below the velocity radius {}", self.radius())));
        }
        let arcs = self.neighborhood_at(a, r)?;
        let with_global = self.global().is_some()
            && (self.background.velocity.references_global(a) || arcs.iter().any(|&b| self.arc_depends_on_global(b)));
        let coords = arcs.iter().map(|&b| self.coord(b)).collect();
        StateSpace::build(
            coords,
            with_global.then(|| self.global().map_or(1, GlobalProcess::m_states)),
            self.cap(),
            None,
            self.state_limit,
        )
    }

    /// Sparse generator on `space`. Jumps leaving the space (cap or pruning)
    /// are suppressed; rows still sum to zero.
    pub fn generator(&self, space: &StateSpace) -> CsrMatrix {
        let nc = space.num_coords();
        let cap = space.cap();
        let global = space.has_global().then(|| self.global()).flatten();
        let mut b = CsrBuilder::with_capacity(space.len(), space.len(), space.len() * (nc + 2));
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(nc * 2 + 2);
        for i in 0..space.len() {
            let code = space.code(i);
            let s = space.decode_code(code);
            let busy = space.busy_count(&s);
            row.clear();
            let mut out = 0.0;
            for j in 0..nc {
                let a = space.coord_arc(j);
                let x = s.arcs[j];
                let g = self.chain_generator(a, s.global);
                let free_now = space.coord_is_free(j, x);
                for t in 0..g.dim() {
                    if t == x {
                        continue;
                    }
                    let q = g.rate(x, t);
                    if q <= 0.0 {
                        continue;
                    }
                    if let Some(cap) = cap {
                        let busy_new = busy - usize::from(!free_now) + usize::from(!space.coord_is_free(j, t));
                        if busy_new > cap {
                            continue;
                        }
                    }
                    let target = (code as i64 + (t as i64 - x as i64) * space.stride(j) as i64) as u64;
                    if let Some(k) = space.index_of_code(target) {
                        row.push((k, q));
                        out += q;
                    }
                }
            }
            if let Some(gp) = global {
                let y = s.global;
                for t in 0..gp.m_states() {
                    let q = if t == y { 0.0 } else { gp.generator.rate(y, t) };
                    if q <= 0.0 {
                        continue;
                    }
                    let target = (code as i64 + (t as i64 - y as i64) * space.global_stride() as i64) as u64;
                    if let Some(k) = space.index_of_code(target) {
                        row.push((k, q));
                        out += q;
                    }
                }
            }
            row.push((i, -out));
            row.sort_unstable_by_key(|&(k, _)| k);
            for &(k, q) in &row {
                b.push(k, q);
            }
            b.finish_row();
        }
        b.build()
    }

    /// Speed of arc `a` in every state of `space`. The space must cover the
    /// velocity neighbourhood of `a`.
    pub fn speeds_on(&self, space: &StateSpace, a: ArcId) -> Vec<f64> {
        let n = self.network.num_arcs();
        let mut scratch = vec![0usize; n];
        (0..space.len())
            .map(|i| {
                let s = space.state(i);
                for (j, &x) in s.arcs.iter().enumerate() {
                    scratch[space.coord_arc(j)] = x;
                }
                self.speed(a, s.global, |b| scratch[b])
            })
            .collect()
    }

    /// Projects a full state (arc order) onto the coordinates of `space`.
    pub fn truncate(&self, space: &StateSpace, s: &CompositeState) -> Option<usize> {
        space.index_of_view(s.global, |b| s.arcs[b])
    }

    /// Arcs whose state influences any routable arc's speed.
    pub fn influencing_arcs(&self) -> BTreeSet<ArcId> {
        let mut out = BTreeSet::new();
        for a in self.network.arcs().iter().filter(|a| a.routable) {
            out.extend(self.neighborhoods[a.id].iter().copied());
        }
        out
    }
}
