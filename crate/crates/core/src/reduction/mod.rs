//! Preprocessing that shrinks the network and the state space before routing.

mod hitting;
mod reduce;
mod yen;

pub use hitting::{hit_prob_bound, hypoexp_cdf, prune_states_historical, prune_states_hitting, HitBound};
pub use reduce::{reduce_network, NetworkReduction, ReducedModel, ReducedQuery, ReducedStarOracle, ReductionReport};
pub use yen::{yen_excluding, yen_k_shortest, RankedPath};
