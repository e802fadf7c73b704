//! Small bundled instances used by tests, the command line and the demo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::background::{ArcChain, Background, ChainOverride, Generator, GlobalProcess, Model, Rule, VelocityModel};
use crate::error::{Error, Result};
use crate::network::{Arc, Network, Node};

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["fig5", "fig6", "two-arc", "bypass", "grid2", "grid3", "grid4", "synthetic20"];

fn node(id: usize, label: &str) -> Node {
    Node { id, label: label.to_string(), coords: None }
}

fn arc(id: usize, tail: usize, head: usize, length_km: f64, max_speed_kmh: f64) -> Arc {
    Arc { id, tail, head, length_km, max_speed_kmh, routable: true }
}

fn own_speed(arc: usize, state: usize, speed: f64) -> Rule {
    Rule { arc: Some(arc), own_in: Some(vec![state]), speed, ..Rule::default() }
}

fn incident_chain(arc: usize) -> ArcChain {
    ArcChain::new(arc, Generator::two_state(INCIDENT_RATE, CLEARANCE_RATE))
}

/// Incident and clearance rates of the grid-type instances (per hour).
pub const INCIDENT_RATE: f64 = 0.1;
pub const CLEARANCE_RATE: f64 = 2.0;
/// Speeds for (free, quiet), (free, busy), (congested, quiet), (congested, busy).
pub const GRID_SPEEDS: [f64; 4] = [100.0, 80.0, 40.0, 20.0];

/// Three nodes k0, k1, k*; an always-60 upper arc and a 100/10 lower arc
/// from k0 to k1, then a three-phase arc to k*. All arcs 60 km.
pub fn fig5() -> Model {
    let net = Network::new(
        vec![node(0, "k0"), node(1, "k1"), node(2, "k*")],
        vec![arc(0, 0, 1, 60.0, 60.0), arc(1, 0, 1, 60.0, 100.0), arc(2, 1, 2, 60.0, 100.0)],
    )
    .expect("valid network");
    let bg = Background {
        chains: vec![
            ArcChain::constant(0),
            ArcChain::new(1, Generator::two_state(1.0, 1.0)),
            ArcChain::new(2, Generator::from_rates(3, &[(0, 1, 1.0), (1, 2, 1.0)]).expect("valid rates")),
        ],
        global: None,
        velocity: VelocityModel {
            radius: 0,
            rules: vec![
                own_speed(1, 0, 100.0),
                own_speed(1, 1, 10.0),
                own_speed(2, 0, 100.0),
                own_speed(2, 1, 80.0),
                own_speed(2, 2, 2.0),
            ],
            defaults: Vec::new(),
        },
        incident_cap: None,
    };
    Model::new(net, bg).expect("valid model")
}

/// k0 → k1 (50 km), two parallel k1 → k* arcs (50 km each) and a direct
/// k0 → k* arc (100 km). Every arc drives 100 when free and 80 when
/// congested; congestion starts at rate 0.1 and clears at rate 1.
pub fn fig6() -> Model {
    let net = Network::new(
        vec![node(0, "k0"), node(1, "k1"), node(2, "k*")],
        vec![
            arc(0, 0, 1, 50.0, 100.0),
            arc(1, 1, 2, 50.0, 100.0),
            arc(2, 1, 2, 50.0, 100.0),
            arc(3, 0, 2, 100.0, 100.0),
        ],
    )
    .expect("valid network");
    let speed = |state: usize, speed: f64| Rule { own_in: Some(vec![state]), speed, ..Rule::default() };
    let bg = Background {
        chains: (0..4).map(|a| ArcChain::new(a, Generator::two_state(0.1, 1.0))).collect(),
        global: None,
        velocity: VelocityModel { radius: 0, rules: vec![speed(0, 100.0), speed(1, 80.0)], defaults: Vec::new() },
        incident_cap: None,
    };
    Model::new(net, bg).expect("valid model")
}

/// Two consecutive 30 km arcs with incident chains and a dry/rain global
/// process. Rain doubles the incident rate and lowers every speed.
pub fn two_arc() -> Model {
    let net = Network::new(
        vec![node(0, "k"), node(1, "l"), node(2, "m")],
        vec![arc(0, 0, 1, 30.0, 120.0), arc(1, 1, 2, 30.0, 120.0)],
    )
    .expect("valid network");
    let dry = [120.0, 100.0, 50.0, 20.0];
    let wet = [100.0, 80.0, 20.0, 10.0];
    let mut rules = Vec::new();
    for (y, speeds) in [(0, dry), (1, wet)] {
        for (i, &speed) in speeds.iter().enumerate() {
            let (own, busy) = (i / 2, i % 2 == 1);
            rules.push(Rule {
                own_in: Some(vec![own]),
                global_in: Some(vec![y]),
                neighbors_congested_min: busy.then_some(1),
                neighbors_congested_max: (!busy).then_some(0),
                speed,
                ..Rule::default()
            });
        }
    }
    let rain = Generator::two_state(0.25, 0.25);
    let overrides = (0..2)
        .map(|a| ChainOverride { y: 1, arc: a, generator: Generator::two_state(2.0 * INCIDENT_RATE, CLEARANCE_RATE) })
        .collect();
    let bg = Background {
        chains: (0..2).map(incident_chain).collect(),
        global: Some(GlobalProcess { generator: rain, overrides }),
        velocity: VelocityModel { radius: 1, rules, defaults: Vec::new() },
        incident_cap: None,
    };
    Model::new(net, bg).expect("valid model")
}

/// Nine parallel k0 → k1 arcs (50–58 km), a 20 km k1 → k* arc and a
/// 100 km bypass k0 → k*. The five shortest paths all use k1 → k*.
pub fn bypass() -> Model {
    let mut arcs: Vec<Arc> = (0..9).map(|i| arc(i, 0, 1, 50.0 + i as f64, 100.0)).collect();
    arcs.push(arc(9, 1, 2, 20.0, 100.0));
    arcs.push(arc(10, 0, 2, 100.0, 100.0));
    let net = Network::new(vec![node(0, "k0"), node(1, "k1"), node(2, "k*")], arcs).expect("valid network");
    let bg = Background {
        chains: (0..11).map(incident_chain).collect(),
        global: None,
        velocity: VelocityModel::four_level(0, GRID_SPEEDS),
        incident_cap: Some(3),
    };
    Model::new(net, bg).expect("valid model")
}

fn lattice(rows: usize, cols: usize, length: impl FnMut() -> f64) -> Network {
    let mut length = length;
    let id = |r: usize, c: usize| r * cols + c;
    let last = rows * cols - 1;
    let nodes = (0..rows * cols)
        .map(|k| {
            let label = match k {
                0 => "S".to_string(),
                k if k == last => "D".to_string(),
                k => format!("{},{}", k / cols, k % cols),
            };
            Node { id: k, label, coords: Some(((k / cols) as f64, (k % cols) as f64)) }
        })
        .collect();
    let mut arcs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let mut link = |a: usize, b: usize| {
                let d = length();
                let n = arcs.len();
                arcs.push(arc(n, a, b, d, 100.0));
                arcs.push(arc(n + 1, b, a, d, 100.0));
            };
            if c + 1 < cols {
                link(id(r, c), id(r, c + 1));
            }
            if r + 1 < rows {
                link(id(r, c), id(r + 1, c));
            }
        }
    }
    Network::new(nodes, arcs).expect("valid network")
}

fn lattice_model(net: Network, cap: Option<usize>) -> Model {
    let bg = Background {
        chains: (0..net.num_arcs()).map(incident_chain).collect(),
        global: None,
        velocity: VelocityModel::four_level(1, GRID_SPEEDS),
        incident_cap: cap,
    };
    Model::new(net, bg).expect("valid model")
}

/// n × n lattice of 10 km two-way roads from corner "S" to corner "D",
/// two-state incident chains, neighbour-dependent speeds and an incident cap.
pub fn grid(n: usize, cap: Option<usize>) -> Result<Model> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid size must be at least 2, got {n}")));
    }
    Ok(lattice_model(lattice(n, n, || 10.0), cap))
}

/// rows × cols lattice with seeded road lengths between 5 and 15 km and
/// at most three simultaneous incidents.
pub fn synthetic(rows: usize, cols: usize, seed: u64) -> Result<Model> {
    if rows * cols < 2 {
        return Err(Error::InvalidArgument("lattice needs at least two nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = lattice(rows, cols, || (rng.random_range(5.0..15.0f64) * 10.0).round() / 10.0);
    Ok(lattice_model(net, Some(3)))
}

/// Looks up a bundled instance by name.
pub fn by_name(name: &str) -> Result<Model> {
    match name {
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        "two-arc" => Ok(two_arc()),
        "bypass" => Ok(bypass()),
        "grid2" => grid(2, Some(3)),
        "grid3" => grid(3, Some(3)),
        "grid4" => grid(4, Some(3)),
        "synthetic20" => synthetic(4, 5, 20),
        other => Err(Error::InvalidArgument(format!("unknown fixture {other:?}; known: {}", NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds() {
        for name in NAMES {
            let m = by_name(name).unwrap();
            assert!(m.network().num_arcs() > 0, "{name}");
        }
    }

    #[test]
    fn grid_shapes() {
        let g = grid(3, Some(3)).unwrap();
        assert_eq!(g.network().num_nodes(), 9);
        assert_eq!(g.network().num_arcs(), 24);
        assert_eq!(g.full_space().unwrap().len(), 1 + 24 + 276 + 2024);
        let s = synthetic(4, 5, 20).unwrap();
        assert_eq!(s.network().num_nodes(), 20);
        assert_eq!(s.network().num_arcs(), 62);
    }
}
