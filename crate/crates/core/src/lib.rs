//! Workbench for k-restricted dynamic memory-hard functions.
//!
//! The crate is split the same way an experiment flows: graphs are built
//! ([`builders`]) on top of the [`graph`] primitives, attacked with pebbling
//! strategies ([`pebbling`]), evaluated through a two-tier memory
//! ([`memory`], [`mhf`]) and finally fed to the leakage game ([`game`]).

pub mod builders;
pub mod flow;
pub mod game;
pub mod graph;
pub mod memory;
pub mod mhf;
pub mod pebbling;
pub mod seed;
pub mod stats;

pub use graph::{Dag, DynamicGraphSpec, GraphError, NodeId, ResolvedDynamicGraph};
pub use seed::Seed;
