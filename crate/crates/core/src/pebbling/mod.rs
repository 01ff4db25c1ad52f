//! Pebbling traces, legality, cost accounting and attack strategies.
//!
//! Legality is the usual black-pebble rule with one refinement: a pebble
//! placed in round `t` needs its parents both in `P_{t-1}` and still in
//! `P_t`. Under this rule the cheapest sequential pebbling of a path of `n`
//! nodes costs `2n - 1`.

mod attack;
mod distribution;
mod strategies;
mod trace;
mod valiant;

pub use attack::{attack_cost_bound, generic_attack, optimal_g, AttackParams};
pub use distribution::{cc_distribution, empirical_cc, DistributionReport};
pub use strategies::{exhaustive_min_cc, greedy_discard, keep_all, run_strategy, strategy_suite, Strategy};
pub use trace::{check_legal, legality, CostReport, Illegal, Mode, Phase, PebblingTrace, TraceBuilder};
pub use valiant::{valiant_bounds, valiant_reduce, valiant_with_target};

use crate::graph::GraphError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PebbleError {
    #[error("eta = {eta} out of range for n = {n} (need 1 <= eta < log2 n)")]
    EtaOutOfRange { eta: usize, n: usize },
    #[error("illegal trace: {0}")]
    Illegal(#[from] Illegal),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("{0}")]
    Range(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
