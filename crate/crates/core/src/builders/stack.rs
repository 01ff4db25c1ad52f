//! Seeded layered DAG standing in for Schnitger's grates graphs.
//!
//! `n` isolated input nodes are followed by `ceil(1/eps)` layers of `n` nodes.
//! A layer node has its horizontal predecessor, one edge from a seeded
//! permutation of the previous layer (so every node there gets a child) and one
//! uniformly random edge from the previous layer. The robustness constants
//! are only estimated, see [`audit_depth_robust`].

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Gadget;
use crate::graph::{Dag, GraphError};
use crate::pebbling::valiant_reduce;
use crate::seed::Seed;

/// Empirical robustness estimate; nothing here is proven.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRobustProfile {
    pub n: usize,
    pub epsilon: f64,
    /// fraction of `n` below which no audited removal set got under `d_target`
    pub e_target: f64,
    pub d_target: usize,
    pub gamma: f64,
    pub c: f64,
    pub empirical: bool,
    /// (|S|, depth(G - S)) for every audited removal set
    pub audited: Vec<(usize, usize)>,
}

pub const STACK_INDEGREE: usize = 3;

pub fn depth_robust_stack(n: usize, epsilon: f64, seed: &Seed) -> Result<(Gadget, DepthRobustProfile), GraphError> {
    let g = stack_graph(n, epsilon, seed)?;
    let profile = audit_depth_robust(&g.dag, n, epsilon, seed);
    Ok((g, profile))
}

/// The graph alone, without running the audit.
pub fn stack_graph(n: usize, epsilon: f64, seed: &Seed) -> Result<Gadget, GraphError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GraphError::Range(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    if n < 2 {
        return Err(GraphError::Range("depth-robust stack needs n >= 2".into()));
    }
    let layers = (1.0 / epsilon).ceil() as usize;
    let mut rng = seed.derive("stack").rng();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in 1..=layers {
        let prev = (l - 1) * n;
        let mut perm: Vec<usize> = (1..=n).collect();
        perm.shuffle(&mut rng);
        for p in 1..=n {
            let v = l * n + p;
            let mut ps = vec![perm[p - 1] + prev, prev + rng.gen_range(1..=n)];
            if p > 1 {
                ps.push(v - 1);
            }
            parents.push(ps);
        }
    }
    Ok(Gadget { dag: Dag::new(STACK_INDEGREE, parents)?, outputs: n })
}

/// Estimates `(gamma, c)` by attacking the graph with depth-reducing sets.
///
/// Starts from `gamma = 1/2`; any audited set `S` with `depth(G - S) <
/// n^{1-eps}/4` and `|S| <= gamma n` pulls `gamma` below `|S| / n`. `c` is the
/// smallest `depth / n^{1-eps}` seen among sets still within `gamma n`, capped
/// just under 1 so the profile stays in range.
pub fn audit_depth_robust(g: &Dag, n: usize, epsilon: f64, seed: &Seed) -> DepthRobustProfile {
    let scale = (n as f64).powf(1.0 - epsilon);
    let d_target = (scale / 4.0).ceil() as usize;
    let mut audited = Vec::new();
    let max_eta = (g.n() as f64).log2().floor() as usize;
    for eta in 1..max_eta.min(4) {
        if let Ok(s) = valiant_reduce(g, eta) {
            let m = g.mask(&s).expect("valiant set in range");
            audited.push((s.len(), g.depth_masked(g.n(), Some(&m))));
        }
    }
    // random removal sets of a few sizes
    let mut rng = seed.derive("audit").rng();
    for frac in [0.05, 0.1, 0.25] {
        let size = ((frac * n as f64) as usize).min(g.n());
        let mut nodes: Vec<usize> = (1..=g.n()).collect();
        nodes.shuffle(&mut rng);
        let s = &nodes[..size];
        let m = g.mask(s).expect("in range");
        audited.push((size, g.depth_masked(g.n(), Some(&m))));
    }
    let mut gamma: f64 = 0.5;
    for &(size, depth) in &audited {
        let frac = size as f64 / n as f64;
        if depth < d_target && frac <= gamma {
            gamma = frac * 0.99;
        }
    }
    let mut c: f64 = 0.99;
    for &(size, depth) in &audited {
        if size as f64 <= gamma * n as f64 {
            c = c.min(depth as f64 / scale);
        }
    }
    c = c.min(g.depth() as f64 / scale);
    gamma = gamma.min(c).max(f64::MIN_POSITIVE);
    DepthRobustProfile {
        n,
        epsilon,
        e_target: gamma,
        d_target: d_target.min(g.n()),
        gamma,
        c: c.max(gamma),
        empirical: true,
        audited,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pebbling::valiant_reduce;

    #[test]
    fn smallest_stack() {
        let (g, p) = depth_robust_stack(2, 0.5, &Seed::from_u64(1)).unwrap();
        assert_eq!(g.dag.n(), 6);
        assert_eq!(g.dag.sources(), vec![1, 2]);
        assert!(g.dag.max_indegree() <= STACK_INDEGREE);
        assert_eq!(g.output_range(), 5..=6);
        assert!(p.gamma > 0.0 && p.gamma <= p.c && p.c < 1.0);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = stack_graph(64, 0.5, &Seed::from_u64(3)).unwrap();
        let b = stack_graph(64, 0.5, &Seed::from_u64(3)).unwrap();
        let c = stack_graph(64, 0.5, &Seed::from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn every_previous_layer_node_has_a_child() {
        let g = stack_graph(32, 0.34, &Seed::from_u64(2)).unwrap();
        let ch = g.dag.children();
        // layers = 3, so nodes 1..=96 all feed the next layer
        assert!((1..=96).all(|v| !ch[v - 1].is_empty()));
    }

    #[test]
    fn valiant_cannot_beat_profile_at_128() {
        let (g, p) = depth_robust_stack(128, 0.5, &Seed::from_u64(11)).unwrap();
        let s = valiant_reduce(&g.dag, 2).unwrap();
        let target = (128f64.sqrt() / 4.0).ceil() as usize;
        let m = g.dag.mask(&s).unwrap();
        let depth = g.dag.depth_masked(g.dag.n(), Some(&m));
        assert!(s.len() as f64 > p.gamma * 128.0 || depth >= target);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(stack_graph(8, 0.0, &Seed::default()).is_err());
        assert!(stack_graph(8, 1.0, &Seed::default()).is_err());
        assert!(stack_graph(1, 0.5, &Seed::default()).is_err());
    }
}
