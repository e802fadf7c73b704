use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmroute::fixtures;

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Fixture name; omit with --list.
    pub name: Option<String>,
    /// Directory receiving `<name>.network.json` and `<name>.background.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub list: bool,
}

pub fn run(args: &FixtureArgs) -> Result<()> {
    if args.list {
        for name in fixtures::NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let Some(name) = &args.name else { bail!("give a fixture name or --list") };
    let model = fixtures::by_name(name)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let net = args.out.join(format!("{name}.network.json"));
    let bg = args.out.join(format!("{name}.background.json"));
    model.network().save(&net)?;
    model.background().save(&bg)?;
    println!("{}\n{}", net.display(), bg.display());
    Ok(())
}
