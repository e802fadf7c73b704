use serde::{Deserialize, Serialize};

use crate::network::ArcId;

/// Fully specified neighbourhood state mapped to a speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<usize>,
    /// (arc id, state) pairs that must all match.
    #[serde(default)]
    pub arcs: Vec<(ArcId, usize)>,
}

/// Conjunction of optional tests; `speed` applies when all present tests pass.
/// A rule without `arc` applies to every arc.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Rule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<ArcId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own_in: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_in: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbors_congested_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbors_congested_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitState>,
    pub speed: f64,
}

impl Rule {
    pub fn applies_to(&self, arc: ArcId) -> bool {
        self.arc.is_none_or(|a| a == arc)
    }

    pub fn references_global(&self) -> bool {
        self.global_in.is_some() || self.explicit.as_ref().is_some_and(|e| e.global.is_some())
    }

    pub(crate) fn matches(
        &self,
        own: usize,
        global: usize,
        congested_neighbors: impl FnOnce() -> usize,
        arc_state: impl Fn(ArcId) -> usize,
    ) -> bool {
        if let Some(set) = &self.own_in {
            if !set.contains(&own) {
                return false;
            }
        }
        if let Some(set) = &self.global_in {
            if !set.contains(&global) {
                return false;
            }
        }
        if let Some(e) = &self.explicit {
            if e.global.is_some_and(|g| g != global) {
                return false;
            }
            if !e.arcs.iter().all(|&(a, x)| arc_state(a) == x) {
                return false;
            }
        }
        if self.neighbors_congested_min.is_some() || self.neighbors_congested_max.is_some() {
            let n = congested_neighbors();
            if self.neighbors_congested_min.is_some_and(|m| n < m) {
                return false;
            }
            if self.neighbors_congested_max.is_some_and(|m| n > m) {
                return false;
            }
        }
        true
    }
}

/// Local speed model: each arc's speed is read from the first matching rule,
/// else from its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityModel {
    pub radius: usize,
    #[serde(default)]
    pub rules: Vec<Rule>,
    /// Per-arc default speed in arc order; missing entries fall back to the
    /// arc's maximum speed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defaults: Vec<f64>,
}

impl VelocityModel {
    /// Every arc always drives at its default.
    pub fn constant(defaults: Vec<f64>) -> Self {
        VelocityModel { radius: 0, rules: Vec::new(), defaults }
    }

    /// Speeds by (own free, neighbour congested) as in the four-level tables:
    /// `[free/quiet, free/busy, congested/quiet, congested/busy]`.
    pub fn four_level(radius: usize, speeds: [f64; 4]) -> Self {
        let rule = |own: usize, busy: bool, speed: f64| Rule {
            own_in: Some(vec![own]),
            neighbors_congested_min: busy.then_some(1),
            neighbors_congested_max: (!busy).then_some(0),
            speed,
            ..Rule::default()
        };
        VelocityModel {
            radius,
            rules: vec![
                rule(0, false, speeds[0]),
                rule(0, true, speeds[1]),
                rule(1, false, speeds[2]),
                rule(1, true, speeds[3]),
            ],
            defaults: Vec::new(),
        }
    }

    pub fn rules_for(&self, arc: ArcId) -> impl Iterator<Item = &Rule> + '_ {
        self.rules.iter().filter(move |r| r.applies_to(arc))
    }

    pub fn references_global(&self, arc: ArcId) -> bool {
        self.rules_for(arc).any(Rule::references_global)
    }
}
