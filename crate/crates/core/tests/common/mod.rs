#![allow(dead_code)]

use mmroute::background::{ArcChain, Background, Generator, Model, Rule, VelocityModel};
use mmroute::network::{Arc, Network, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected network: a path 0 → 1 → … → n-1 plus extra arcs.
pub fn random_network(rng: &mut ChaCha8Rng, n_nodes: usize, n_arcs: usize) -> Network {
    assert!(n_arcs + 1 >= n_nodes);
    let nodes = (0..n_nodes).map(|k| Node { id: k, label: String::new(), coords: None }).collect();
    let mut ends: Vec<(usize, usize)> = (0..n_nodes - 1).map(|k| (k, k + 1)).collect();
    while ends.len() < n_arcs {
        let t = rng.random_range(0..n_nodes);
        let h = rng.random_range(0..n_nodes);
        if t != h {
            ends.push((t, h));
        }
    }
    let arcs = ends
        .into_iter()
        .enumerate()
        .map(|(id, (tail, head))| Arc {
            id,
            tail,
            head,
            length_km: rng.random_range(5.0..40.0),
            max_speed_kmh: 100.0,
            routable: true,
        })
        .collect();
    Network::new(nodes, arcs).unwrap()
}

/// Random birth-death generator with `n` states.
pub fn random_birth_death(rng: &mut ChaCha8Rng, n: usize) -> Generator {
    let mut rates = Vec::new();
    for i in 0..n - 1 {
        rates.push((i, i + 1, rng.random_range(0.05..2.0)));
        rates.push((i + 1, i, rng.random_range(0.2..3.0)));
    }
    Generator::from_rates(n, &rates).unwrap()
}

/// Random model with local-`radius` speeds and at most `max_states`
/// composite states. Chains have 1–3 states; speeds depend on the own state
/// and, for radius ≥ 1, on whether any neighbour is congested.
pub fn random_model(seed: u64, n_nodes: usize, n_arcs: usize, radius: usize, max_states: usize) -> Model {
    let mut rng = rng(seed);
    let net = random_network(&mut rng, n_nodes, n_arcs);
    let mut chains = Vec::new();
    let mut total = 1usize;
    for a in 0..net.num_arcs() {
        let mut k = [1, 2, 2, 2, 3][rng.random_range(0..5)];
        while total * k > max_states {
            k -= 1;
        }
        total *= k;
        let g = if k == 1 { Generator::trivial() } else { random_birth_death(&mut rng, k) };
        chains.push(ArcChain::new(a, g));
    }
    let mut rules = Vec::new();
    for (a, chain) in chains.iter().enumerate() {
        for x in 0..chain.n_states() {
            let base: f64 = rng.random_range(20.0..100.0);
            if radius == 0 {
                rules.push(Rule { arc: Some(a), own_in: Some(vec![x]), speed: base, ..Rule::default() });
            } else {
                rules.push(Rule {
                    arc: Some(a),
                    own_in: Some(vec![x]),
                    neighbors_congested_max: Some(0),
                    speed: base,
                    ..Rule::default()
                });
                rules.push(Rule { arc: Some(a), own_in: Some(vec![x]), speed: base * 0.7, ..Rule::default() });
            }
        }
    }
    let bg = Background {
        chains,
        global: None,
        velocity: VelocityModel { radius, rules, defaults: Vec::new() },
        incident_cap: None,
    };
    Model::new(net, bg).unwrap()
}

/// Standard error of a sample mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
