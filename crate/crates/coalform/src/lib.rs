//! Coalition formation in two partition-form games: a constant-sum Erlang-B
//! congestion game where customers split by Wardrop equilibrium, and a
//! Kelly-mechanism resource sharing game.

pub mod dynamics;
pub mod erlang;
pub mod kelly;
pub mod lp;
pub mod oracles;
pub mod shapley;
pub mod error;
pub mod partition;
pub mod queue;
pub mod rng;
pub mod wardrop;

pub use error::{Error, Result};
pub use partition::{AgentSet, Coalition, Configuration, Partition, PayoffVector};
pub use wardrop::{QueueSystem, WardropSplit};
