//! Depth reduction by edge classes.
//!
//! Edge `(u, v)` has class `msb((u-1) xor (v-1))`. Dropping the parent
//! endpoint of every edge in `eta` of the `B = ceil(log2 n)` classes leaves a
//! graph whose paths strictly increase on the remaining bits, hence depth at
//! most `2^{B - eta}`. The `eta` lightest classes are removed, ties to the
//! lower bit.

use super::PebbleError;
use crate::graph::{Dag, NodeId};

/// `(e, d) = (ceil(eta delta n / (log2 n - eta)), ceil(n / 2^eta))`.
pub fn valiant_bounds(n: usize, delta: usize, eta: usize) -> (usize, usize) {
    let lg = (n as f64).log2();
    let e = ((eta * delta * n) as f64 / (lg - eta as f64) - 1e-9).ceil().max(0.0) as usize;
    let d = n.div_ceil(1usize << eta.min(63));
    (e, d)
}

fn class(u: NodeId, v: NodeId) -> usize {
    let x = (u - 1) ^ (v - 1);
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

/// Valiant's set for `G_{<=limit}`, then extra classes until its depth is at
/// most `target` (only needed when `limit` is not a power of two).
pub fn valiant_with_target(g: &Dag, limit: usize, eta: usize, target: usize) -> Vec<NodeId> {
    if limit <= 1 {
        return Vec::new();
    }
    let bits = (usize::BITS - (limit - 1).leading_zeros()) as usize;
    let mut count = vec![0usize; bits];
    for v in 1..=limit {
        for &u in g.parents_of(v) {
            count[class(u, v)] += 1;
        }
    }
    let mut order: Vec<usize> = (0..bits).collect();
    order.sort_by_key(|&c| (count[c], c));
    let mut chosen = vec![false; bits];
    let mut mask = vec![false; limit];
    let mut take = eta.min(bits);
    let mut next = 0;
    loop {
        while next < take {
            chosen[order[next]] = true;
            next += 1;
        }
        for v in 1..=limit {
            for &u in g.parents_of(v) {
                if chosen[class(u, v)] {
                    mask[u - 1] = true;
                }
            }
        }
        if take >= bits || g.depth_masked(limit, Some(&mask)) <= target {
            break;
        }
        take += 1;
    }
    (1..=limit).filter(|&v| mask[v - 1]).collect()
}

/// `S` with `|S| <= ceil(eta delta N / (log2 N - eta))` and
/// `depth(G - S) <= ceil(N / 2^eta)`.
pub fn valiant_reduce(g: &Dag, eta: usize) -> Result<Vec<NodeId>, PebbleError> {
    let n = g.n();
    if n <= 1 {
        return Ok(Vec::new());
    }
    if eta == 0 || eta as f64 >= (n as f64).log2() {
        return Err(PebbleError::EtaOutOfRange { eta, n });
    }
    let (_, d) = valiant_bounds(n, g.indeg_bound(), eta);
    Ok(valiant_with_target(g, n, eta, d))
}
