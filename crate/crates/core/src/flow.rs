//! Node-disjoint path counting by max-flow on the split-node network.

use std::collections::VecDeque;

use crate::graph::{Dag, NodeId};

struct Net {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i32>,
}

impl Net {
    fn new(n: usize) -> Net {
        Net { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add(&mut self, a: usize, b: usize, c: i32) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; self.head.len()];
            let mut q = VecDeque::from([s]);
            prev[s] = usize::MAX - 1;
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && prev[v] == usize::MAX {
                        prev[v] = e;
                        q.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                v = self.to[e ^ 1];
            }
            flow += 1;
        }
    }
}

/// Maximum number of node-disjoint directed paths from `from` to `to`,
/// with `removed` nodes unusable.
pub fn disjoint_paths(g: &Dag, from: &[NodeId], to: &[NodeId], removed: Option<&[bool]>) -> usize {
    let n = g.n();
    // node v: in = 2(v-1), out = 2(v-1)+1; source 2n, sink 2n+1
    let (src, snk) = (2 * n, 2 * n + 1);
    let mut net = Net::new(2 * n + 2);
    let gone = |v: NodeId| removed.map_or(false, |r| r[v - 1]);
    for v in 1..=n {
        if gone(v) {
            continue;
        }
        net.add(2 * (v - 1), 2 * (v - 1) + 1, 1);
        for &p in g.parents_of(v) {
            if !gone(p) {
                net.add(2 * (p - 1) + 1, 2 * (v - 1), 1);
            }
        }
    }
    for &v in from {
        if !gone(v) {
            net.add(src, 2 * (v - 1), 1);
        }
    }
    for &v in to {
        if !gone(v) {
            net.add(2 * (v - 1) + 1, snk, 1);
        }
    }
    net.max_flow(src, snk)
}
