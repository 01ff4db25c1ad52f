//! Baseline strategies and the exhaustive optimum for tiny graphs.

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;
use std::str::FromStr;

use super::attack::{generic_attack, optimal_g, AttackParams};
use super::trace::{legality, Mode, Phase, PebblingTrace, Runner};
use super::{CostReport, PebbleError};
use crate::graph::{Dag, DynamicGraphSpec, ResolvedDynamicGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    KeepAll,
    GreedyDiscard,
    Generic { eta: usize, g: Option<usize> },
}

impl FromStr for Strategy {
    type Err = PebbleError;

    /// `keep-all`, `greedy-discard`, `generic` (eta 2, tuned g) or
    /// `generic:eta=E[,g=G]`.
    fn from_str(s: &str) -> Result<Strategy, PebbleError> {
        match s {
            "keep-all" => return Ok(Strategy::KeepAll),
            "greedy-discard" => return Ok(Strategy::GreedyDiscard),
            "generic" => return Ok(Strategy::Generic { eta: 2, g: None }),
            _ => {}
        }
        let rest = s.strip_prefix("generic:").ok_or_else(|| PebbleError::UnknownStrategy(s.into()))?;
        let (mut eta, mut g) = (2, None);
        for kv in rest.split(',') {
            let bad = || PebbleError::UnknownStrategy(s.into());
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: usize = v.parse().map_err(|_| bad())?;
            match k {
                "eta" => eta = v,
                "g" => g = Some(v),
                _ => return Err(bad()),
            }
        }
        Ok(Strategy::Generic { eta, g })
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::KeepAll => f.write_str("keep-all"),
            Strategy::GreedyDiscard => f.write_str("greedy-discard"),
            Strategy::Generic { eta, g: None } => write!(f, "generic:eta={eta}"),
            Strategy::Generic { eta, g: Some(g) } => write!(f, "generic:eta={eta},g={g}"),
        }
    }
}

/// Sequentially pebbles `1..=n` and never removes anything.
pub fn keep_all(spec: &DynamicGraphSpec, res: &ResolvedDynamicGraph) -> PebblingTrace {
    let mut run = Runner::new(spec, &res.dag, Mode::Sequential);
    for v in 1..=spec.n() {
        run.b.begin(Phase::Other);
        run.b.add(v);
        run.close();
    }
    run.finish()
}

/// Sequential pebbling that drops a pebble one round after its last
/// potential child has been placed. The last node is kept.
pub fn greedy_discard(spec: &DynamicGraphSpec, res: &ResolvedDynamicGraph) -> PebblingTrace {
    let n = spec.n();
    // last_child[u] = latest node that may use u, or u itself if none
    let mut last_child: Vec<usize> = (0..=n).collect();
    for v in 1..=n {
        for p in spec.all_potential_parents(v) {
            last_child[p] = last_child[p].max(v);
        }
    }
    let mut drop_after: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for u in 1..n {
        drop_after[last_child[u]].push(u);
    }
    let mut run = Runner::new(spec, &res.dag, Mode::Sequential);
    for v in 1..=n {
        run.b.begin(Phase::Other);
        for &u in &drop_after[v - 1] {
            run.b.remove(u);
        }
        run.b.add(v);
        run.close();
    }
    run.finish()
}

pub fn run_strategy(
    spec: &DynamicGraphSpec,
    res: &ResolvedDynamicGraph,
    strategy: &Strategy,
) -> Result<(PebblingTrace, CostReport), PebbleError> {
    let trace = match strategy {
        Strategy::KeepAll => keep_all(spec, res),
        Strategy::GreedyDiscard => greedy_discard(spec, res),
        Strategy::Generic { eta, g } => {
            let p = AttackParams::for_spec(spec, *eta, *g)?;
            generic_attack(spec, &p, res)?.0
        }
    };
    legality(&trace, &res.dag, Some(spec))?;
    let cost = trace.cost();
    Ok((trace, cost))
}

/// Costs of the named strategies on one resolution. `generic-grid` expands
/// to eta in 1..=3 times g in {g*/2, g*, 2g*}; its best entry is also
/// reported as `generic-best`.
pub fn strategy_suite(
    spec: &DynamicGraphSpec,
    res: &ResolvedDynamicGraph,
    names: &[&str],
) -> Result<BTreeMap<String, CostReport>, PebbleError> {
    let mut out = BTreeMap::new();
    for &name in names {
        if name == "generic-grid" {
            let n = spec.n();
            let mut best: Option<CostReport> = None;
            for eta in 1..=3usize {
                if eta as f64 >= (n as f64).log2() {
                    continue;
                }
                let g0 = optimal_g(n, spec.k().max(1), eta);
                let mut gs = vec![(g0 / 2).max(1), g0, (2 * g0).min(n)];
                gs.dedup();
                for g in gs {
                    let s = Strategy::Generic { eta, g: Some(g) };
                    let (_, c) = run_strategy(spec, res, &s)?;
                    if best.as_ref().map_or(true, |b| c.cc < b.cc) {
                        best = Some(c.clone());
                    }
                    out.insert(s.to_string(), c);
                }
            }
            if let Some(b) = best {
                out.insert("generic-best".into(), b);
            }
        } else {
            let s: Strategy = name.parse()?;
            let (_, c) = run_strategy(spec, res, &s)?;
            out.insert(name.to_string(), c);
        }
    }
    Ok(out)
}

/// Minimum cc over all legal sequential pebblings that end with the last
/// node pebbled. Dijkstra over configurations; `n <= 16`.
pub fn exhaustive_min_cc(g: &Dag) -> u64 {
    let n = g.n();
    assert!((1..=16).contains(&n), "exhaustive search only for 1..=16 nodes");
    let pmask: Vec<u32> = (1..=n).map(|v| g.parents_of(v).iter().fold(0u32, |m, &p| m | 1 << (p - 1))).collect();
    let target = 1u32 << (n - 1);
    let mut dist = vec![u64::MAX; 1 << n];
    let mut heap = BinaryHeap::new();
    dist[0] = 0;
    heap.push(Reverse((0u64, 0u32)));
    while let Some(Reverse((c, p))) = heap.pop() {
        if c > dist[p as usize] {
            continue;
        }
        if p & target != 0 {
            return c;
        }
        // every kept subset, optionally plus one new pebble
        let mut keep = p;
        loop {
            let mut relax = |next: u32| {
                let nc = c + next.count_ones() as u64;
                if nc < dist[next as usize] {
                    dist[next as usize] = nc;
                    heap.push(Reverse((nc, next)));
                }
            };
            relax(keep);
            for v in 0..n {
                let bit = 1u32 << v;
                if p & bit == 0 && pmask[v] & !keep == 0 {
                    relax(keep | bit);
                }
            }
            if keep == 0 {
                break;
            }
            keep = (keep - 1) & p;
        }
    }
    unreachable!("the last node is always reachable")
}
