//! Routing policies: value iteration, the two stochastic label-setting
//! searches, deterministic baselines, exact policy evaluation and driving.

mod drive;
mod edsger;
mod evaluate;
mod full;
mod oracle;
mod search;
mod star;
mod vi;

pub use drive::{drive, DriveRecord, Epoch};
pub use edsger::{edsger_sp, SearchResult};
pub use evaluate::{evaluate_policy, evaluate_policy_with, EvalOptions, Evaluation};
pub use full::{FullModel, PolicyTable, ValueTable};
pub(crate) use oracle::DecisionCache;
pub use oracle::{
    extract_policy, fixed_path_policy, BoundsCache, DdOracle, DsOracle, EdsgerOracle, Oracle, StarOracle, TableOracle,
};
pub(crate) use search::HeapEntry;
pub use search::{astar, dd_route, dd_step, ds_route, lower_bounds, path_min_time, LowerBounds};
pub use star::{edsger_star_sp, ReducedArc, StarEngine};
pub use vi::{value_iteration, ViOptions, ViResult, SENTINEL};
