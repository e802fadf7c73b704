//! Sample-path simulation and experiment harness behavior.

mod common;

use mmroute::background::{Background, CompositeState, Model, VelocityModel};
use mmroute::fixtures;
use mmroute::simulator::{run_experiment, substream, ExperimentConfig, Trajectory};

#[test]
fn two_state_time_fraction_is_ergodic() {
    // fig6 arcs switch free -> busy at 0.1/h and back at 1/h.
    let model = fixtures::fig6();
    let horizon = 20_000.0;
    let traj = Trajectory::sample(&model, CompositeState::all_free(4), horizon, substream(3, 0)).unwrap();
    let segs: Vec<(f64, CompositeState)> = traj.segments().map(|(t, s)| (t, s.clone())).collect();
    let mut free = 0.0;
    for (i, (t, s)) in segs.iter().enumerate() {
        let end = segs.get(i + 1).map_or(horizon, |x| x.0).min(horizon);
        if s.arcs[0] == 0 && *t < horizon {
            free += end - t;
        }
    }
    let frac = free / horizon;
    assert!((frac - 1.0 / 1.1).abs() < 0.01, "{frac}");
}

#[test]
fn equal_seeds_give_equal_paths() {
    let model = fixtures::two_arc();
    let s0 = CompositeState::all_free(2);
    let a = Trajectory::sample(&model, s0.clone(), 50.0, substream(9, 4)).unwrap();
    let b = Trajectory::sample(&model, s0.clone(), 50.0, substream(9, 4)).unwrap();
    let c = Trajectory::sample(&model, s0, 50.0, substream(9, 5)).unwrap();
    assert_eq!(a.jump_times(), b.jump_times());
    assert_ne!(a.jump_times(), c.jump_times());
}

fn constant_model() -> Model {
    let mut rng = common::rng(21);
    let net = common::random_network(&mut rng, 5, 9);
    let bg = Background {
        chains: Vec::new(),
        global: None,
        velocity: VelocityModel::constant(Vec::new()),
        incident_cap: None,
    };
    Model::new(net, bg).unwrap()
}

#[test]
fn constant_background_has_no_loss() {
    let model = constant_model();
    let cfg = ExperimentConfig::from_json(
        r#"{"policies": ["vi", "edsger", "edsger-star", "ds", "dd"], "od_pairs": [[0, 4], [1, 3]],
            "replications": 30, "initial_state": "both", "exact_state_limit": 0}"#,
    )
    .unwrap();
    let res = run_experiment(&model, &cfg).unwrap();
    let losses: Vec<_> = res.rows.iter().filter(|r| r.metric.starts_with("loss_pct")).collect();
    assert!(!losses.is_empty());
    for r in losses {
        assert!(r.value.abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn same_config_gives_identical_csv() {
    let model = fixtures::by_name("grid2").unwrap();
    let cfg = ExperimentConfig::from_json(
        r#"{"policies": ["vi", "edsger-star", "dd"], "od_pairs": [["S", "D"]],
            "replications": 50, "seed": 17, "initial_state": "both"}"#,
    )
    .unwrap();
    let a = run_experiment(&model, &cfg).unwrap().to_csv(Some("abc"));
    let b = run_experiment(&model, &cfg).unwrap().to_csv(Some("abc"));
    assert_eq!(a, b);
    assert!(a.starts_with("# manifest abc\npolicy,od,metric,value,se,reps\n"));
}

#[test]
fn vi_has_the_smallest_weighted_loss() {
    let model = fixtures::by_name("grid2").unwrap();
    let cfg = ExperimentConfig::from_json(
        r#"{"policies": ["vi", "ds", "dd"], "od_pairs": [["S", "D"]],
            "replications": 400, "seed": 5, "initial_state": "stationary"}"#,
    )
    .unwrap();
    let res = run_experiment(&model, &cfg).unwrap();
    let vi = res.value("vi", "weighted_mean").unwrap().value;
    for p in ["ds", "dd"] {
        assert!(vi <= res.value(p, "weighted_mean").unwrap().value + 1e-9);
    }
}
