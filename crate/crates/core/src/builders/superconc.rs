//! Superconcentrators built from Beneš-style rearrangeable networks.
//!
//! Inputs are the first `n` nodes and outputs the last `n`. Each switch is
//! modelled with nodes: a node in the next level takes both nodes of the
//! switch pair as parents.

use super::Gadget;
use crate::graph::{Dag, GraphError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// Beneš network on `n = 2^m` wires: `2m` levels of `n` nodes.
    Butterfly,
    /// Recursive Beneš construction for any `n >= 1`.
    Recursive,
}

impl std::str::FromStr for Flavor {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Flavor, GraphError> {
        match s {
            "butterfly" => Ok(Flavor::Butterfly),
            "recursive" => Ok(Flavor::Recursive),
            _ => Err(GraphError::Range(format!("unknown superconcentrator flavor {s:?}"))),
        }
    }
}

pub fn superconcentrator(n: usize, flavor: Flavor) -> Result<Gadget, GraphError> {
    let parents = match flavor {
        Flavor::Butterfly => {
            if n < 2 || !n.is_power_of_two() {
                return Err(GraphError::Range(format!("butterfly needs a power of two >= 2, got {n}")));
            }
            butterfly(n)
        }
        Flavor::Recursive => {
            if n == 0 {
                return Err(GraphError::Range("superconcentrator needs n >= 1".into()));
            }
            let mut parents = vec![Vec::new(); n];
            let ins: Vec<usize> = (1..=n).collect();
            let outs = network(&mut parents, &ins);
            debug_assert_eq!(outs, (parents.len() - n + 1..=parents.len()).collect::<Vec<_>>());
            parents
        }
    };
    Ok(Gadget { dag: Dag::new(2, parents)?, outputs: n })
}

fn butterfly(n: usize) -> Vec<Vec<usize>> {
    let m = n.trailing_zeros() as usize;
    let levels = 2 * m;
    let id = |level: usize, i: usize| level * n + i + 1;
    let mut parents = vec![Vec::new(); n];
    for stage in 0..levels - 1 {
        // bit order m-1, ..., 1, 0, 1, ..., m-1
        let bit = if stage < m { m - 1 - stage } else { stage - m + 1 };
        for i in 0..n {
            parents.push(vec![id(stage, i), id(stage, i ^ (1 << bit))]);
        }
    }
    parents
}

/// Appends a network over the existing wire nodes `ins` and returns its
/// output nodes. An odd last wire is routed through the lower half only.
fn network(parents: &mut Vec<Vec<usize>>, ins: &[usize]) -> Vec<usize> {
    let n = ins.len();
    let push = |parents: &mut Vec<Vec<usize>>, ps: Vec<usize>| {
        parents.push(ps);
        parents.len()
    };
    match n {
        1 => return ins.to_vec(),
        2 => return (0..2).map(|_| push(parents, vec![ins[0], ins[1]])).collect(),
        _ => {}
    }
    let half = n / 2;
    let upper: Vec<usize> = (0..half).map(|t| push(parents, vec![ins[2 * t], ins[2 * t + 1]])).collect();
    let mut lower: Vec<usize> = (0..half).map(|t| push(parents, vec![ins[2 * t], ins[2 * t + 1]])).collect();
    if n % 2 == 1 {
        lower.push(push(parents, vec![ins[n - 1]]));
    }
    let upper_out = network(parents, &upper);
    let lower_out = network(parents, &lower);
    let mut outs = Vec::with_capacity(n);
    for t in 0..half {
        outs.push(push(parents, vec![upper_out[t], lower_out[t]]));
        outs.push(push(parents, vec![upper_out[t], lower_out[t]]));
    }
    if n % 2 == 1 {
        outs.push(push(parents, vec![lower_out[half]]));
    }
    outs
}
