use anyhow::Result;
use clap::{Args, ValueEnum};
use mmroute::background::{CompositeState, Model};
use mmroute::network::{ArcId, NodeId};
use mmroute::routing::{
    dd_route, ds_route, edsger_sp, lower_bounds, value_iteration, FullModel, StarEngine, ViOptions,
};
use mmroute::transit::{ExpmWorkspace, DEFAULT_TOL};
use serde_json::json;

use crate::input::{self, ModelArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Vi,
    Edsger,
    EdsgerStar,
    Ds,
    Dd,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Origin node id or label.
    #[arg(long)]
    pub origin: String,
    /// Destination node id or label.
    #[arg(long)]
    pub dest: String,
    /// Current background state, 0-based: `x1,...,xn`, or `y,x1,...,xn`
    /// with a global process. Defaults to all arcs free.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, value_enum, default_value = "edsger-star")]
    pub algo: Algo,
    /// Neighbourhood radius of the reduced searches (at least the velocity radius).
    #[arg(long)]
    pub radius: Option<usize>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

pub struct Route {
    pub path: Vec<ArcId>,
    /// Expected arrival time after each leg when following `path`.
    pub cumulative: Vec<f64>,
    /// Expected total time of the algorithm's policy from the origin.
    pub total: f64,
    /// Whether leg times are exact (full space) or reduced-space estimates.
    pub exact_legs: bool,
}

/// Expected cumulative times along a fixed path, exactly on the full space.
fn exact_legs(fm: &FullModel, path: &[ArcId], s0: usize) -> Result<Vec<f64>> {
    let mut ws = ExpmWorkspace::new(DEFAULT_TOL)?;
    let mut p = vec![0.0; fm.n_states()];
    p[s0] = 1.0;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(path.len());
    for &a in path {
        let (next, dt) = fm.kernel(a).propagate(&mut ws, &p)?;
        p = next;
        t += dt;
        out.push(t);
    }
    Ok(out)
}

/// Reduced-space estimate of the same, as used by the EDSGER* search.
fn estimated_legs(engine: &StarEngine<&Model>, path: &[ArcId], s0: &CompositeState) -> Result<Vec<f64>> {
    let mut ws = ExpmWorkspace::new(DEFAULT_TOL)?;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(path.len());
    for &a in path {
        t += engine.relax(&mut ws, a, s0, t)?;
        out.push(t);
    }
    Ok(out)
}

/// Legs for a fixed path: exact when the full space is tractable.
fn legs(model: &Model, radius: Option<usize>, path: &[ArcId], s0: &CompositeState) -> Result<(Vec<f64>, bool)> {
    match FullModel::new(model) {
        Ok(fm) => Ok((exact_legs(&fm, path, fm.state_index(s0)?)?, true)),
        Err(mmroute::Error::StateSpaceTooLarge { .. }) => {
            Ok((estimated_legs(&StarEngine::new(model, radius)?, path, s0)?, false))
        }
        Err(e) => Err(e.into()),
    }
}

/// Path the VI policy takes if the background stayed in `s0`.
fn policy_path(fm: &FullModel, policy: &mmroute::routing::PolicyTable, origin: NodeId, s0: usize) -> Vec<ArcId> {
    let net = fm.model().network();
    let mut path = Vec::new();
    let mut k = origin;
    while k != policy.destination && path.len() <= net.num_nodes() {
        let Some(a) = policy.get(k, s0) else { break };
        path.push(a);
        k = net.arcs()[a].head;
    }
    path
}

pub fn compute(
    model: &Model,
    algo: Algo,
    origin: NodeId,
    dest: NodeId,
    s0: &CompositeState,
    radius: Option<usize>,
) -> Result<Route> {
    let net = model.network();
    let lb = lower_bounds(net, dest)?;
    if !lb.reachable(origin) {
        return Err(mmroute::Error::Unreachable { origin, destination: dest }.into());
    }
    if origin == dest {
        return Ok(Route { path: Vec::new(), cumulative: Vec::new(), total: 0.0, exact_legs: true });
    }
    let route = match algo {
        Algo::Vi => {
            let fm = FullModel::new(model)?;
            let s = fm.state_index(s0)?;
            let vi = value_iteration(&fm, dest, ViOptions::default())?;
            let path = policy_path(&fm, &vi.policy, origin, s);
            Route { cumulative: exact_legs(&fm, &path, s)?, path, total: vi.values.get(origin, s), exact_legs: true }
        }
        Algo::Edsger => {
            let fm = FullModel::new(model)?;
            let res = edsger_sp(&fm, origin, fm.state_index(s0)?, dest, &lb)?;
            Route { total: res.expected, path: res.path, cumulative: res.cumulative, exact_legs: true }
        }
        Algo::EdsgerStar => {
            let res = StarEngine::new(model, radius)?.shortest_path(origin, s0, dest, &lb)?;
            Route { total: res.expected, path: res.path, cumulative: res.cumulative, exact_legs: false }
        }
        Algo::Ds | Algo::Dd => {
            let path = if algo == Algo::Ds { ds_route(net, origin, dest)? } else { dd_route(model, origin, s0, dest)? };
            let (cumulative, exact) = legs(model, radius, &path, s0)?;
            Route { total: cumulative.last().copied().unwrap_or(0.0), path, cumulative, exact_legs: exact }
        }
    };
    Ok(route)
}

fn node_name(model: &Model, k: NodeId) -> String {
    let label = &model.network().nodes()[k].label;
    if label.is_empty() {
        k.to_string()
    } else {
        label.clone()
    }
}

pub fn run(args: &RouteArgs) -> Result<()> {
    let model = args.model.load()?;
    let origin = input::node(&model, &args.origin)?;
    let dest = input::node(&model, &args.dest)?;
    let s0 = input::state(&model, args.state.as_deref())?;
    let route = compute(&model, args.algo, origin, dest, &s0, args.radius)?;
    let net = model.network();
    let algo = args.algo.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let mut prev = 0.0;
    let legs: Vec<_> = route
        .path
        .iter()
        .zip(&route.cumulative)
        .map(|(&a, &c)| {
            let arc = &net.arcs()[a];
            let leg = json!({
                "arc": a,
                "from": node_name(&model, arc.tail),
                "to": node_name(&model, arc.head),
                "expected_h": c - prev,
                "cumulative_h": c,
            });
            prev = c;
            leg
        })
        .collect();
    if args.json {
        let out = json!({
            "algorithm": algo,
            "origin": node_name(&model, origin),
            "destination": node_name(&model, dest),
            "path": route.path,
            "legs": legs,
            "total_h": route.total,
            "exact_legs": route.exact_legs,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!("algorithm {algo}: {} -> {}", node_name(&model, origin), node_name(&model, dest));
    println!("{:>4} {:>6} {:>16} {:>12} {:>12}", "leg", "arc", "from -> to", "expected_h", "cumulative_h");
    for (i, leg) in legs.iter().enumerate() {
        println!(
            "{:>4} {:>6} {:>16} {:>12.6} {:>12.6}",
            i + 1,
            leg["arc"].as_u64().unwrap_or(0),
            format!("{} -> {}", leg["from"].as_str().unwrap_or(""), leg["to"].as_str().unwrap_or("")),
            leg["expected_h"].as_f64().unwrap_or(f64::NAN),
            leg["cumulative_h"].as_f64().unwrap_or(f64::NAN),
        );
    }
    if args.algo == Algo::Vi {
        println!("legs follow the policy's choices if the state stayed fixed; the total adapts to changes");
    }
    if !route.exact_legs {
        println!("leg times are reduced-space estimates");
    }
    println!("total expected time: {:.6} h", route.total);
    Ok(())
}
