//! Property tests over randomly generated small instances.

mod common;

use std::collections::HashMap;

use mmroute::background::{kronecker_sum, CompositeState, Generator};
use mmroute::network::Network;
use mmroute::reduction::{hypoexp_cdf, prune_states_hitting, reduce_network};
use mmroute::routing::{
    drive, ds_route, edsger_sp, extract_policy, lower_bounds, path_min_time, value_iteration, DdOracle, DsOracle,
    EdsgerOracle, FullModel, LowerBounds, Oracle, StarEngine, StarOracle, TableOracle, ViOptions,
};
use mmroute::simulator::{substream, Trajectory};
use mmroute::sparse::CsrMatrix;
use mmroute::transit::{arc_lst, arc_transit};
use proptest::prelude::*;

fn assert_generator(q: &CsrMatrix) {
    for r in 0..q.n_rows() {
        let mut sum = 0.0;
        for (c, v) in q.row(r) {
            sum += v;
            if c != r {
                assert!(v >= 0.0, "negative off-diagonal at ({r}, {c})");
            }
        }
        assert!(sum.abs() < 1e-9, "row {r} sums to {sum}");
    }
}

fn random_generator(seed: u64, n: usize) -> Generator {
    use rand::Rng;
    let mut rng = common::rng(seed);
    let mut rates = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.7) {
                rates.push((i, j, rng.random_range(0.1..5.0)));
            }
        }
    }
    Generator::from_rates(n, &rates).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn network_round_trip_and_neighbors(seed in any::<u64>(), n_nodes in 2usize..12, extra in 0usize..40) {
        let mut rng = common::rng(seed);
        let net = common::random_network(&mut rng, n_nodes, n_nodes - 1 + extra);
        let back = Network::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(&back, &net);
        for k in 0..net.num_nodes() {
            let mut got = net.neighbors(k).unwrap();
            let mut want: Vec<_> = net.arcs().iter().filter(|a| a.tail == k).map(|a| (a.id, a.head)).collect();
            got.sort();
            want.sort();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn constructed_generators_are_valid(seed in any::<u64>(), radius in 0usize..2) {
        let model = common::random_model(seed, 3, 5, radius, 64);
        let space = model.full_space().unwrap();
        assert_generator(&model.generator(&space));
        for a in 0..model.network().num_arcs() {
            let reduced = model.reduced_space(a, radius).unwrap();
            assert_generator(&model.generator(&reduced));
        }
    }

    #[test]
    fn kronecker_sum_is_associative(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4, nc in 1usize..4) {
        let a = random_generator(seed, na);
        let b = random_generator(seed ^ 1, nb);
        let c = random_generator(seed ^ 2, nc);
        let left = kronecker_sum(&kronecker_sum(&a, &b), &c).to_rows();
        let right = kronecker_sum(&a, &kronecker_sum(&b, &c)).to_rows();
        for (x, y) in left.iter().flatten().zip(right.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_monotone(seed in any::<u64>()) {
        let model = common::random_model(seed, 4, 5, 0, 256);
        let full = model.full_space().unwrap().len();
        let mut prev = 0;
        for cap in 0..=5 {
            let n = model.clone().with_cap(Some(cap)).full_space().unwrap().len();
            prop_assert!(n >= prev);
            prev = n;
        }
        prop_assert_eq!(prev, full);
    }

    #[test]
    fn speeds_depend_only_on_the_neighborhood(seed in any::<u64>(), radius in 0usize..2) {
        let model = common::random_model(seed, 4, 6, radius, 4096);
        let space = model.full_space().unwrap();
        for a in 0..model.network().num_arcs() {
            let hood = model.neighborhood(a).to_vec();
            let mut seen: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
            for s in space.iter() {
                let key = (s.global, hood.iter().map(|&b| s.arcs[b]).collect());
                let v = model.speed_at(a, &s);
                let prev = *seen.entry(key).or_insert(v);
                prop_assert_eq!(prev, v);
            }
        }
    }

    #[test]
    fn travel_time_solves_the_ode(seed in any::<u64>()) {
        let model = common::random_model(seed, 3, 3, 0, 64);
        let space = model.full_space().unwrap();
        let q = model.generator(&space);
        let dq = q.to_dense();
        let h = 1e-5;
        for a in 0..3 {
            let v = model.speeds_on(&space, a);
            let d = model.network().arcs()[a].length_km;
            let phi = arc_transit(a, &q, &v, d).unwrap().phi;
            let up = arc_transit(a, &q, &v, d + h).unwrap().phi;
            let down = arc_transit(a, &q, &v, d - h).unwrap().phi;
            for s in 0..space.len() {
                let deriv = (up[s] - down[s]) / (2.0 * h);
                let qphi: f64 = (0..space.len()).map(|t| dq[s][t] * phi[t]).sum();
                prop_assert!((v[s] * deriv - 1.0 - qphi).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn travel_time_is_monotone_and_bounded(seed in any::<u64>()) {
        let model = common::random_model(seed, 3, 3, 1, 64);
        let space = model.full_space().unwrap();
        let q = model.generator(&space);
        for a in 0..3 {
            let v = model.speeds_on(&space, a);
            let (vmin, vmax) = v.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let zero = arc_transit(a, &q, &v, 0.0).unwrap().phi;
            prop_assert!(zero.iter().all(|&x| x == 0.0));
            let mut prev = zero;
            for step in 1..=5 {
                let d = 8.0 * step as f64;
                let phi = arc_transit(a, &q, &v, d).unwrap().phi;
                for s in 0..space.len() {
                    prop_assert!(phi[s] > prev[s]);
                    prop_assert!(phi[s] >= d / vmax - 1e-12 && phi[s] <= d / vmin + 1e-12);
                }
                prev = phi;
            }
        }
    }

    #[test]
    fn transform_rows_are_stochastic_and_decreasing(seed in any::<u64>()) {
        let model = common::random_model(seed, 3, 3, 0, 64);
        let space = model.full_space().unwrap();
        let q = model.generator(&space);
        let v = model.speeds_on(&space, 0);
        let d = model.network().arcs()[0].length_km;
        let base = arc_lst(&q, &v, d, 0.0).unwrap();
        for row in &base {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
        let mut prev = base;
        for alpha in [0.1, 0.5, 2.0, 10.0] {
            let psi = arc_lst(&q, &v, d, alpha).unwrap();
            for (r, p) in psi.iter().zip(&prev) {
                for (x, y) in r.iter().zip(p) {
                    prop_assert!(*x <= *y + 1e-12);
                }
            }
            prev = psi;
        }
    }

    #[test]
    fn hypoexp_is_a_distribution_function(seed in any::<u64>(), k in 1usize..5) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let mut rates: Vec<f64> = Vec::new();
        while rates.len() < k {
            let r = rng.random_range(0.1..5.0);
            if rates.iter().all(|&x| (x - r).abs() > 1e-3) {
                rates.push(r);
            }
        }
        prop_assert_eq!(hypoexp_cdf(&rates, 0.0).unwrap(), 0.0);
        let slowest = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let step = 40.0 / slowest / 200.0;
        let mut prev = 0.0;
        for i in 1..=200 {
            let c = hypoexp_cdf(&rates, i as f64 * step).unwrap();
            prop_assert!(c >= prev - 1e-12 && c <= 1.0 + 1e-12);
            prev = c;
        }
        prop_assert!(prev > 1.0 - 1e-6);
    }

    #[test]
    fn reduction_keeps_the_shortest_path(seed in any::<u64>(), m in 1usize..5, l in 1usize..3) {
        let mut rng = common::rng(seed);
        let net = common::random_network(&mut rng, 8, 16);
        let dest = net.num_nodes() - 1;
        let r = reduce_network(&net, 0, dest, m, l).unwrap();
        for a in ds_route(&net, 0, dest).unwrap() {
            prop_assert!(r.kept_arcs.contains(&a));
        }
        prop_assert!(r.paths.iter().all(|p| net.is_path_from(0, &p.arcs) && net.path_end(0, &p.arcs) == dest));
    }

    #[test]
    fn pruned_generator_is_valid(seed in any::<u64>(), eps in 0.0f64..0.5) {
        let model = common::random_model(seed, 3, 5, 0, 256);
        let space = model.full_space().unwrap();
        let s0 = CompositeState::all_free(5);
        let kept = prune_states_hitting(&model, &space, &s0, 0.5, eps).unwrap();
        prop_assert!(kept.contains(&s0));
        let pruned = model.full_space_with(Some(&kept)).unwrap();
        prop_assert_eq!(pruned.len(), kept.len());
        assert_generator(&model.generator(&pruned));
    }

    #[test]
    fn arc_traversals_are_fifo(seed in any::<u64>()) {
        use rand::Rng;
        let model = common::random_model(seed, 3, 4, 1, 64);
        let mut rng = common::rng(seed ^ 0xf1f0);
        let s0 = CompositeState::all_free(4);
        let mut traj = Trajectory::sample(&model, s0, 20.0, substream(seed, 0)).unwrap();
        for _ in 0..200 {
            let a = rng.random_range(0..4);
            let d = rng.random_range(0.1..80.0);
            let t1 = rng.random_range(0.0..10.0);
            let t2 = t1 + rng.random_range(0.0..2.0);
            let e1 = t1 + traj.arc_time(a, t1, d);
            let e2 = t2 + traj.arc_time(a, t2, d);
            prop_assert!(e1 <= e2 + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn oracles_collapse_without_congestion(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let net = common::random_network(&mut rng, 5, 8);
        let model = mmroute::background::Model::new(
            net,
            mmroute::background::Background {
                chains: Vec::new(),
                global: None,
                velocity: mmroute::background::VelocityModel::constant(Vec::new()),
                incident_cap: None,
            },
        )
        .unwrap();
        let net = model.network();
        let dest = net.num_nodes() - 1;
        let fm = FullModel::new(&model).unwrap();
        let s0 = CompositeState::all_free(net.num_arcs());
        let lb = lower_bounds(net, dest).unwrap();
        let best = path_min_time(net, &ds_route(net, 0, dest).unwrap());
        let vi = value_iteration(&fm, dest, ViOptions::default()).unwrap();
        prop_assert!((vi.values.get(0, 0) - best).abs() < 1e-9);
        let e = edsger_sp(&fm, 0, 0, dest, &lb).unwrap();
        prop_assert!((path_min_time(net, &e.path) - best).abs() < 1e-9);
        let star = StarEngine::new(&model, None).unwrap().shortest_path(0, &s0, dest, &lb).unwrap();
        prop_assert!((path_min_time(net, &star.path) - best).abs() < 1e-9);
        let dd = mmroute::routing::dd_route(&model, 0, &s0, dest).unwrap();
        prop_assert!((path_min_time(net, &dd) - best).abs() < 1e-9);
    }

    #[test]
    fn zero_bounds_give_the_same_search(seed in any::<u64>()) {
        let model = common::random_model(seed, 4, 6, 1, 64);
        let fm = FullModel::new(&model).unwrap();
        let net = model.network();
        let dest = net.num_nodes() - 1;
        let lb = lower_bounds(net, dest).unwrap();
        let zero = LowerBounds::zero(net, dest);
        for s in 0..fm.n_states() {
            let a = edsger_sp(&fm, 0, s, dest, &lb).unwrap();
            let b = edsger_sp(&fm, 0, s, dest, &zero).unwrap();
            prop_assert!((a.expected - b.expected).abs() < 1e-9);
            prop_assert_eq!(a.path, b.path);
        }
    }

    #[test]
    fn value_iteration_deltas_do_not_grow(seed in any::<u64>()) {
        let model = common::random_model(seed, 4, 6, 1, 64);
        let fm = FullModel::new(&model).unwrap();
        let vi = value_iteration(&fm, 3, ViOptions::default()).unwrap();
        prop_assert!(vi.converged);
        for w in vi.deltas.windows(2).skip(1) {
            prop_assert!(w[1] <= w[0] * 1.01, "{:?}", vi.deltas);
        }
    }

    #[test]
    fn drives_terminate(seed in any::<u64>()) {
        let model = common::random_model(seed, 4, 7, 1, 64);
        let fm = FullModel::new(&model).unwrap();
        let net = model.network();
        let dest = net.num_nodes() - 1;
        let vi = value_iteration(&fm, dest, ViOptions::default()).unwrap();
        let table = TableOracle::new("vi", fm.space(), vi.policy);
        let edsger = EdsgerOracle::new(&fm);
        let star = StarOracle::new(StarEngine::new(&model, None).unwrap());
        let ds = DsOracle::new(net);
        let dd = DdOracle::new(&model);
        let oracles: [&dyn Oracle; 5] = [&table, &edsger, &star, &ds, &dd];
        for (i, oracle) in oracles.into_iter().enumerate() {
            let s0 = fm.space().state(seed as usize % fm.n_states());
            let mut traj = Trajectory::sample(&model, s0, 5.0, substream(seed, i as u64)).unwrap();
            let rec = drive(oracle, &mut traj, 0, dest, 0.0).unwrap();
            prop_assert!(rec.epochs.len() <= 10 * net.num_nodes());
            prop_assert_eq!(rec.epochs.last().unwrap().node, dest);
        }
        // Extracted tables are usable oracles too.
        let t = extract_policy(&fm, &ds, dest).unwrap();
        prop_assert!(t.get(0, 0).is_some());
    }
}
