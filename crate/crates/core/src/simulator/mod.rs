//! Sampling of background trajectories, realized travel times and
//! simulation experiments.

mod experiment;
mod realized;
mod stationary;
mod trajectory;

pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentResult, InitialScheme, NodeKey, PolicyKind, ReductionParams, ResultRow,
};
pub use realized::optimal_realized;
pub use stationary::{is_irreducible, residual, stationary_distribution};
pub use trajectory::{realized_arc_time, substream, Trajectory};
