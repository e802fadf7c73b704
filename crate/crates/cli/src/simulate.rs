use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use mmroute::simulator::{run_experiment, ExperimentConfig};

use crate::input::ModelArgs;
use crate::manifest::{self, Manifest};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configuration's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configuration's replication count.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Overrides the configuration's neighbourhood radius.
    #[arg(long)]
    pub radius: Option<usize>,
    /// CSV output; the manifest is written next to it.
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(r) = args.reps {
        config.replications = r;
    }
    if args.radius.is_some() {
        config.radius = args.radius;
    }
    let mut content = args.model.content()?;
    content.extend(serde_json::to_vec(&config)?);
    let mut inputs = args.model.describe();
    inputs.push(args.config.display().to_string());
    let mut manifest = Manifest::new("simulate", inputs, &content, Some(config.seed));

    let model = manifest.phase("load", || args.model.load())?;
    let result = manifest.phase("simulate", || run_experiment(&model, &config))?;
    let csv = result.to_csv(Some(manifest.id()));
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    let mpath = manifest::path_for(&args.out);
    manifest.write(&mpath)?;
    eprintln!("wrote {} ({} rows) and {}", args.out.display(), result.rows.len(), mpath.display());
    Ok(())
}
