//! Independent reference computations, with their values frozen.

mod common;

use mmroute::background::{kronecker_sum, CompositeState, Generator};
use mmroute::network::{ArcId, Network, NodeId};
use mmroute::reduction::{hypoexp_cdf, yen_k_shortest};
use mmroute::routing::FullModel;
use mmroute::simulator::{optimal_realized, realized_arc_time, stationary_distribution, substream, Trajectory};
use mmroute::transit::{dense_block, dense_expm, ExpmWorkspace};

#[test]
fn kronecker_sum_matches_hand_computed_matrix() {
    let (a1, a2, b1, b2) = (1.0, 2.0, 3.0, 4.0);
    let q1 = Generator::two_state(a1, b1);
    let q2 = Generator::two_state(a2, b2);
    let expected = vec![
        vec![-a1 - a2, a1, a2, 0.0],
        vec![b1, -b1 - a2, 0.0, a2],
        vec![b2, 0.0, -a1 - b2, a1],
        vec![0.0, b2, b1, -b1 - b2],
    ];
    assert_eq!(kronecker_sum(&q2, &q1).to_rows(), expected);
}

/// P(Exp(1) + Exp(2) <= 1) by composite Simpson on the convolution integral
/// ∫_0^M λ1 e^{-λ1 x} (1 - e^{-λ2 (M - x)}) dx.
fn convolution_cdf(l1: f64, l2: f64, m: f64) -> f64 {
    let n = 20_000;
    let h = m / n as f64;
    let f = |x: f64| l1 * (-l1 * x).exp() * (1.0 - (-l2 * (m - x)).exp());
    let mut s = f(0.0) + f(m);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn hypoexp_two_rates_matches_convolution() {
    const FROZEN: f64 = 0.399_576_400_893_728_2;
    let conv = convolution_cdf(1.0, 2.0, 1.0);
    assert!((conv - FROZEN).abs() < 1e-12, "{conv}");
    let closed = 1.0 - 2.0 * (-1.0f64).exp() + (-2.0f64).exp();
    assert!((closed - FROZEN).abs() < 1e-15);
    assert!((hypoexp_cdf(&[1.0, 2.0], 1.0).unwrap() - FROZEN).abs() < 1e-12);
}

#[test]
fn hypoexp_three_rates_matches_nested_convolution() {
    // P(X1 + X2 + X3 <= M) = ∫ f_{X3}(x) P(X1 + X2 <= M - x) dx.
    let (l1, l2, l3, m) = (0.5, 1.5, 4.0, 2.0);
    let n = 4000;
    let h = m / n as f64;
    let f = |x: f64| l3 * (-l3 * x).exp() * hypoexp_cdf(&[l1, l2], m - x).unwrap();
    let mut s = f(0.0) + f(m);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let reference = s * h / 3.0;
    assert!((hypoexp_cdf(&[l1, l2, l3], m).unwrap() - reference).abs() < 1e-10);
}

#[test]
fn arc_kernel_matches_dense_exponential() {
    for seed in 0..8 {
        let model = common::random_model(seed, 3, 4, (seed % 2) as usize, 64);
        let fm = FullModel::new(&model).unwrap();
        let q = model.generator(fm.space());
        let n = fm.n_states();
        let mut ws = ExpmWorkspace::new(1e-13).unwrap();
        for a in 0..model.network().num_arcs() {
            let speeds = model.speeds_on(fm.space(), a);
            let d = model.network().arcs()[a].length_km;
            let e = dense_expm(&dense_block(&q, &speeds, d));
            let phi = fm.kernel(a).phi(&mut ws).unwrap();
            let p = fm.kernel(a).transition_matrix(&mut ws).unwrap();
            for s in 0..n {
                assert!((phi[s] - e[s][n]).abs() < 1e-9 * phi[s].max(1.0), "seed {seed} arc {a}");
                let mut start = vec![0.0; n];
                start[s] = 1.0;
                let (row, time) = fm.kernel(a).propagate(&mut ws, &start).unwrap();
                assert!((time - e[s][n]).abs() < 1e-9 * time.max(1.0));
                for t in 0..n {
                    assert!((row[t] - e[s][t]).abs() < 1e-9);
                }
                for t in 0..n {
                    assert!((p[s][t] - e[s][t]).abs() < 1e-9);
                }
            }
        }
    }
}

fn simple_paths(net: &Network, from: NodeId, to: NodeId) -> Vec<Vec<ArcId>> {
    fn go(
        net: &Network,
        at: NodeId,
        to: NodeId,
        seen: &mut Vec<bool>,
        path: &mut Vec<ArcId>,
        out: &mut Vec<Vec<ArcId>>,
    ) {
        if at == to {
            out.push(path.clone());
            return;
        }
        for &a in net.out_arcs(at) {
            let h = net.arcs()[a].head;
            if !seen[h] {
                seen[h] = true;
                path.push(a);
                go(net, h, to, seen, path, out);
                path.pop();
                seen[h] = false;
            }
        }
    }
    let mut seen = vec![false; net.num_nodes()];
    seen[from] = true;
    let mut out = Vec::new();
    go(net, from, to, &mut seen, &mut Vec::new(), &mut out);
    out
}

#[test]
fn yen_matches_exhaustive_enumeration() {
    let mut rng = common::rng(11);
    for trial in 0..30 {
        let net = common::random_network(&mut rng, 5, 9);
        let dest = net.num_nodes() - 1;
        let mut costs: Vec<f64> =
            simple_paths(&net, 0, dest).iter().map(|p| mmroute::routing::path_min_time(&net, p)).collect();
        costs.sort_by(f64::total_cmp);
        for m in 1..=4 {
            let yen = yen_k_shortest(&net, 0, dest, m).unwrap();
            assert_eq!(yen.len(), m.min(costs.len()), "trial {trial}");
            for (p, c) in yen.iter().zip(&costs) {
                assert!((p.cost - c).abs() < 1e-12, "trial {trial} m {m}");
                assert!(net.is_path_from(0, &p.arcs) && net.path_end(0, &p.arcs) == dest);
            }
        }
    }
}

#[test]
fn optimal_realized_matches_path_enumeration() {
    for seed in 0..10 {
        let model = common::random_model(100 + seed, 4, 6, 1, 64);
        let net = model.network();
        let dest = net.num_nodes() - 1;
        let paths = simple_paths(net, 0, dest);
        for rep in 0..20 {
            let s0 = CompositeState::all_free(net.num_arcs());
            let mut traj = Trajectory::sample(&model, s0, 5.0, substream(seed, rep)).unwrap();
            let brute = paths
                .iter()
                .map(|p| p.iter().fold(0.0, |t, &a| t + realized_arc_time(&mut traj, a, t)))
                .fold(f64::INFINITY, f64::min);
            let best = optimal_realized(&mut traj, 0, dest, 0.0).unwrap();
            assert!((best - brute).abs() < 1e-9, "seed {seed} rep {rep}: {best} vs {brute}");
        }
    }
}

#[test]
fn independent_chains_have_product_stationary_law() {
    let model = common::random_model(5, 3, 3, 0, 64);
    let space = model.full_space().unwrap();
    let pi = stationary_distribution(&model.generator(&space)).unwrap();
    let marginals: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let g = &model.chain(a).generator;
            let q = mmroute::sparse::CsrMatrix::from_dense(&g.to_rows());
            stationary_distribution(&q).unwrap()
        })
        .collect();
    for (i, s) in space.iter().enumerate() {
        let prod: f64 = s.arcs.iter().enumerate().map(|(a, &x)| marginals[a][x]).product();
        assert!((pi[i] - prod).abs() < 1e-12);
    }
}
