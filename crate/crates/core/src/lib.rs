//! Routing on road networks whose arc speeds are driven by a continuous-time
//! Markov background process.

pub mod background;
pub mod error;
pub mod fixtures;
pub mod network;
mod par;
pub mod reduction;
pub mod routing;
pub mod simulator;
pub mod sparse;
pub mod transit;

pub use error::{Error, Result};
