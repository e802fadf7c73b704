use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmroute::reduction::{prune_states_hitting, ReducedModel};
use mmroute::routing::lower_bounds;

use crate::input::{self, ModelArgs};
use crate::manifest::Manifest;

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub origin: String,
    #[arg(long)]
    pub dest: String,
    /// Number of shortest paths kept.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Detours added around arcs shared by all kept paths.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Drop background states whose hitting bound is at most this.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Hitting horizon in hours (default: three times the free-flow time).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Current state for state pruning (see `route --state`).
    #[arg(long)]
    pub state: Option<String>,
    /// Extra neighbourhood radius kept around routable arcs.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Output directory for the reduced model files.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ReduceArgs) -> Result<()> {
    let mut manifest = Manifest::new("reduce", args.model.describe(), &args.model.content()?, None);
    let model = manifest.phase("load", || args.model.load())?;
    let origin = input::node(&model, &args.origin)?;
    let dest = input::node(&model, &args.dest)?;
    let s0 = input::state(&model, args.state.as_deref())?;
    let mut reduced =
        manifest.phase("reduce", || ReducedModel::build(&model, origin, dest, args.m, args.l, args.radius))?;

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    reduced.model.network().save(args.out.join("network.json"))?;
    reduced.model.background().save(args.out.join("background.json"))?;

    if let Some(eps) = args.epsilon {
        let horizon = match args.horizon {
            Some(h) => h,
            None => 3.0 * lower_bounds(model.network(), dest)?.get(origin),
        };
        if horizon.is_nan() || horizon <= 0.0 {
            bail!("hitting horizon must be positive, got {horizon}");
        }
        let space = reduced.model.full_space()?;
        let start = reduced.project_state(&s0);
        let kept = manifest.phase("prune", || prune_states_hitting(&reduced.model, &space, &start, horizon, eps))?;
        let path = args.out.join("kept_states.json");
        std::fs::write(&path, serde_json::to_string(&kept)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        reduced.report.epsilon = Some(eps);
        reduced.report.horizon = Some(horizon);
        reduced.report.states_pruned = Some(kept.len());
    }
    let report = serde_json::to_string_pretty(&reduced.report)?;
    std::fs::write(args.out.join("report.json"), report.clone() + "\n")?;
    manifest.write(&args.out.join("manifest.json"))?;
    println!("{report}");
    Ok(())
}
