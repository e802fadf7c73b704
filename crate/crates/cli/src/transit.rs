use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmroute::transit::{arc_transit, ArcTransit};

use crate::input::{self, ModelArgs};
use crate::manifest::{self, Manifest};

#[derive(Debug, Args)]
pub struct TransitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Arc id.
    #[arg(long)]
    pub arc: usize,
    /// Start state (see `route --state`).
    #[arg(long)]
    pub state: Option<String>,
    /// Work in the arc's local space of this radius instead of the full space.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Number of distance points between 0 and the arc length.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// CSV output (stdout when absent); a manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Expected travel time as a function of distance covered, plus the
/// end-state distribution at the full arc length.
pub fn run(args: &TransitArgs) -> Result<()> {
    let mut manifest = Manifest::new("transit", args.model.describe(), &args.model.content()?, None);
    let model = manifest.phase("load", || args.model.load())?;
    let arc = model.network().arc(args.arc)?.clone();
    if args.points == 0 {
        bail!("--points must be positive");
    }
    let s0 = input::state(&model, args.state.as_deref())?;
    let space = match args.radius {
        Some(r) => model.reduced_space(arc.id, r)?,
        None => model.full_space()?,
    };
    let s = model.truncate(&space, &s0).with_context(|| "start state is not in the space (incident cap?)")?;
    let q = model.generator(&space);
    let speeds = model.speeds_on(&space, arc.id);
    let curve: Vec<(f64, ArcTransit)> = manifest.phase("kernel", || {
        (0..=args.points)
            .map(|i| {
                let d = arc.length_km * i as f64 / args.points as f64;
                arc_transit(arc.id, &q, &speeds, d).map(|t| (d, t))
            })
            .collect::<mmroute::Result<_>>()
    })?;
    let mut csv = format!("# manifest {}\ndistance_km,expected_h\n", manifest.id());
    for (d, t) in &curve {
        writeln!(csv, "{d},{}", t.phi[s])?;
    }
    let last = &curve.last().expect("at least one point").1;
    csv.push_str("# end-state distribution at full length\nend_state,probability\n");
    for (j, p) in last.p[s].iter().enumerate().filter(|(_, &p)| p > 0.0) {
        let st = space.state(j);
        let label = st.arcs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let label = if space.has_global() { format!("{} | {label}", st.global) } else { label };
        writeln!(csv, "{label},{p}")?;
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            manifest.write(&manifest::path_for(path))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}
