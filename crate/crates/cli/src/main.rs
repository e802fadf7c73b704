//! `mmroute`: routing, reduction and simulation on Markov-modulated road networks.

mod fixture;
mod input;
mod manifest;
mod reduce;
mod route;
mod simulate;
mod transit;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mmroute",
    version,
    about = "Routing on road networks whose speeds follow a Markov background process"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected-time route from an origin in a given background state.
    Route(route::RouteArgs),
    /// Monte-Carlo comparison of policies from an experiment file.
    Simulate(simulate::SimulateArgs),
    /// Shrink a model to the arcs relevant for one origin-destination pair.
    Reduce(reduce::ReduceArgs),
    /// Expected travel time along one arc as a function of distance.
    Transit(transit::TransitArgs),
    /// Write a bundled instance as JSON files.
    Fixture(fixture::FixtureArgs),
}

/// 1: bad input, 2: destination unreachable, 3: state space too large.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<mmroute::Error>()) {
        Some(mmroute::Error::Unreachable { .. }) => 2,
        Some(mmroute::Error::StateSpaceTooLarge { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MMROUTE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Route(a) => route::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Reduce(a) => reduce::run(a),
        Command::Transit(a) => transit::run(a),
        Command::Fixture(a) => fixture::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = exit_code(&e);
            if code == 3 {
                eprintln!("hint: `mmroute reduce` shrinks the model; `--algo edsger-star` works on local spaces");
            }
            ExitCode::from(code)
        }
    }
}
