//! Markov-modulated background process: per-arc chains, an optional global
//! modulator, composite state spaces and the local speed model.

mod chain;
mod model;
mod space;
mod velocity;

pub use chain::{kronecker_sum, ArcChain, ChainOverride, Generator, GlobalProcess};
pub use model::{neighborhood, Background, Model};
pub use space::{CompositeState, StateSpace, DEFAULT_STATE_LIMIT};
pub use velocity::{ExplicitState, Rule, VelocityModel};
