//! The three-phase evaluator: label the static prefix, shuffle every block
//! inside the cache, then walk the dynamic path reading parents through the
//! shuffled slots.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::perm::{Identity, KeyedPerm, LazyPerm, PermutationFamily};
use super::Oracle;
use crate::builders::check_amenable;
use crate::graph::{label_mod, DynamicGraphSpec, GraphError, NodeId, Resolver};
use crate::memory::{EventKind, LeakagePattern, MemError, Policy, TieredMemory};

/// Registers the evaluator keeps besides one block: `L(i-1)`, `L(i)`,
/// `L(r(i))` and one spare line.
pub const WORKING_LINES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    /// keyed pseudorandom permutation
    Full,
    /// lazily sampled random permutation table
    Hybrid,
    /// identity permutation
    NoShuffle,
}

impl std::str::FromStr for EvaluatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" | "eval" => Ok(EvaluatorKind::Full),
            "hybrid" => Ok(EvaluatorKind::Hybrid),
            "noshuffle" | "no-shuffle" => Ok(EvaluatorKind::NoShuffle),
            _ => Err(format!("unknown evaluator {s:?} (full, hybrid, noshuffle)")),
        }
    }
}

impl std::fmt::Display for EvaluatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvaluatorKind::Full => "full",
            EvaluatorKind::Hybrid => "hybrid",
            EvaluatorKind::NoShuffle => "noshuffle",
        })
    }
}

impl EvaluatorKind {
    /// The permutation family drawn from coins `R`.
    pub fn family(self, coins: &[u8]) -> Box<dyn PermutationFamily> {
        match self {
            EvaluatorKind::Full => Box::new(KeyedPerm::new(&setup(coins))),
            EvaluatorKind::Hybrid => {
                let mut h = Sha256::new();
                h.update(b"pebblemark/hybrid");
                h.update(coins);
                Box::new(LazyPerm::new(ChaCha20Rng::from_seed(h.finalize().into())))
            }
            EvaluatorKind::NoShuffle => Box::new(Identity),
        }
    }
}

/// `K = Setup(1^λ; R)`.
pub fn setup(coins: &[u8]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(b"pebblemark/setup");
    h.update(coins);
    h.finalize().to_vec()
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("contract: {0}")]
    Contract(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Memory(#[from] MemError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `U_j`: 1-based indices into a block, the first `b - s + 1` of which are
/// unused at selection step `s`.
#[derive(Clone, Debug)]
pub struct UsedArray {
    slots: Vec<usize>,
    taken: Vec<bool>,
    steps: usize,
}

impl UsedArray {
    pub fn new(b: usize) -> UsedArray {
        UsedArray { slots: (1..=b).collect(), taken: vec![false; b], steps: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.slots.len() - self.steps
    }

    pub fn unused(&self) -> &[usize] {
        &self.slots[..self.remaining()]
    }

    /// Picks `u = U[m]` with `m = label mod (b - s + 1) + 1`, then swaps
    /// positions `m` and `b - s + 1`. Returns `(m, u)`.
    pub fn select(&mut self, label: &[u8]) -> Option<(usize, usize)> {
        let top = self.remaining();
        if top == 0 {
            return None;
        }
        let m = label_mod(label, top) + 1;
        let u = self.slots[m - 1];
        self.slots.swap(m - 1, top - 1);
        self.steps += 1;
        self.taken[u - 1] = true;
        debug_assert!(self.prefix_invariant());
        Some((m, u))
    }

    pub fn prefix_invariant(&self) -> bool {
        let top = self.remaining();
        self.slots[..top].iter().all(|&u| !self.taken[u - 1]) && self.slots[top..].iter().all(|&u| self.taken[u - 1])
    }
}

#[derive(Clone, Debug)]
pub struct EvalOutput {
    pub output: Vec<u8>,
    pub resolved: Vec<NodeId>,
    pub leakage: LeakagePattern,
}

/// A spec checked once and ready to evaluate many times.
#[derive(Clone, Debug)]
pub struct Evaluator {
    spec: DynamicGraphSpec,
    oracle: Oracle,
    /// `blocks[g][p]` is node `v_p` of block `g`
    blocks: Vec<Vec<NodeId>>,
    block_size: usize,
}

impl Evaluator {
    pub fn new(spec: &DynamicGraphSpec, oracle: &Oracle) -> Result<Evaluator, EvalError> {
        if *spec.resolver() != Resolver::UsedArray {
            return Err(EvalError::Contract("evaluator needs the used-array resolver".into()));
        }
        let report = check_amenable(spec, None, 0);
        if !report.pass {
            let failed: Vec<&str> = report.clauses.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            return Err(EvalError::Contract(format!("spec is not amenable to shuffling: {}", failed.join(", "))));
        }
        let blocks = spec.groups().to_vec();
        let block_size = blocks.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Evaluator { spec: spec.clone(), oracle: oracle.clone(), blocks, block_size })
    }

    pub fn spec(&self) -> &DynamicGraphSpec {
        &self.spec
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Smallest cache, in lines, the evaluator agrees to run with.
    pub fn required_cache(&self) -> usize {
        self.block_size.max(self.spec.indeg_bound()) + WORKING_LINES
    }

    /// Memory round of dynamic step `t` (1-based). Static node `v` runs in
    /// round `v`; block `g` (0-based) is staged in round `B + 2g + 1` and
    /// shuffled and flushed in round `B + 2g + 2`; the output is read in the
    /// round after the last step.
    pub fn dynamic_round(&self, t: usize) -> u64 {
        (self.spec.static_len() + 2 * self.blocks.len() + t) as u64
    }

    pub fn stage_round(&self, g: usize) -> u64 {
        (self.spec.static_len() + 2 * g + 1) as u64
    }

    pub fn shuffle_round(&self, g: usize) -> u64 {
        self.stage_round(g) + 1
    }

    pub fn dynamic_rounds(&self) -> std::ops::RangeInclusive<u64> {
        self.dynamic_round(1)..=self.dynamic_round(self.spec.dynamic_len())
    }

    pub fn new_memory(&self, capacity: usize, policy: Policy) -> Result<TieredMemory, EvalError> {
        Ok(TieredMemory::new(capacity, policy, self.oracle.width_bytes())?)
    }

    /// Builds the permutation family from `coins` and evaluates on a fresh
    /// memory.
    pub fn eval(
        &self,
        kind: EvaluatorKind,
        x: &[u8],
        coins: &[u8],
        capacity: usize,
        policy: Policy,
    ) -> Result<EvalOutput, EvalError> {
        let mut mem = self.new_memory(capacity, policy)?;
        let mut perms = kind.family(coins);
        self.run(x, perms.as_mut(), &mut mem)
    }

    pub fn run(
        &self,
        x: &[u8],
        perms: &mut dyn PermutationFamily,
        mem: &mut TieredMemory,
    ) -> Result<EvalOutput, EvalError> {
        if mem.capacity() < self.required_cache() {
            return Err(EvalError::Config(format!(
                "cache of {} lines is below the required {} (block of {} + {} working lines)",
                mem.capacity(),
                self.required_cache(),
                self.block_size,
                WORKING_LINES
            )));
        }
        if mem.width() != self.oracle.width_bytes() {
            return Err(EvalError::Config("memory line width differs from the label width".into()));
        }
        let h = &self.oracle;
        let b = self.spec.static_len();
        let base = self.spec.base();

        // static prefix, ascending
        let mut last = Vec::new();
        for v in 1..=b {
            mem.next_round();
            let ps = base.parents_of(v);
            last = if ps.is_empty() {
                h.query(v, &[x])
            } else {
                let mut parts = Vec::with_capacity(ps.len());
                for &p in ps {
                    parts.push(mem.load(p as u64)?);
                }
                let refs: Vec<&[u8]> = parts.iter().map(Vec::as_slice).collect();
                h.query(v, &refs)
            };
            mem.store(v as u64, &last)?;
        }

        // shuffle: L(v_p) moves to the slot of v_q, q = Enc(j ∘ K, p)
        let mut tables = Vec::with_capacity(self.blocks.len());
        for (g, block) in self.blocks.iter().enumerate() {
            mem.next_round();
            mem.drain();
            let m = block.len();
            let mut ascending = block.clone();
            ascending.sort_unstable();
            for &v in &ascending {
                mem.load(v as u64)?;
            }
            mem.next_round();
            let before = mem.event_count();
            let table = perms.table(g as u64 + 1, m);
            let mut inv = vec![0; m];
            for (p, &q) in table.iter().enumerate() {
                inv[q] = p;
            }
            let mut by_node: HashMap<NodeId, Vec<u8>> = HashMap::with_capacity(m);
            for &v in &ascending {
                by_node.insert(v, mem.load(v as u64)?);
            }
            let mut writes: Vec<(NodeId, usize)> = (0..m).map(|q| (block[q], q)).collect();
            writes.sort_unstable();
            for (slot, q) in writes {
                mem.store(slot as u64, &by_node[&block[inv[q]]])?;
            }
            debug_assert_eq!(mem.event_count(), before, "shuffle left the cache");
            mem.flush_block_ascending(ascending[0] as u64..=ascending[m - 1] as u64);
            mem.drain();
            tables.push(table);
        }

        // dynamic walk; L(i - 1) stays in a register
        let mut used: Vec<UsedArray> = self.blocks.iter().map(|blk| UsedArray::new(blk.len())).collect();
        let mut resolved = Vec::with_capacity(self.spec.dynamic_len());
        for i in self.spec.dynamic_range() {
            mem.next_round();
            let g = self.spec.group_of(i).expect("dynamic node");
            let (_, u) = used[g]
                .select(&last)
                .ok_or_else(|| EvalError::Contract(format!("block {} exhausted at node {i}", g + 1)))?;
            let r = self.blocks[g][u - 1];
            let slot = self.blocks[g][tables[g][u - 1]];
            let lr = mem.load(slot as u64)?;
            last = h.query(i, &[&lr, &last]);
            mem.store(i as u64, &last)?;
            resolved.push(r);
        }
        mem.drain();

        // output: sinks ascending, static ones fetched from their slots
        mem.next_round();
        let mut is_parent = vec![false; self.spec.n() + 1];
        for v in 1..=b {
            for &p in base.parents_of(v) {
                is_parent[p] = true;
            }
        }
        for (t, &r) in resolved.iter().enumerate() {
            is_parent[r] = true;
            is_parent[b + t] = true;
        }
        let mut location: HashMap<NodeId, NodeId> = HashMap::new();
        for (g, block) in self.blocks.iter().enumerate() {
            for (p, &v) in block.iter().enumerate() {
                location.insert(v, block[tables[g][p]]);
            }
        }
        let sinks: Vec<NodeId> = (1..=self.spec.n()).filter(|&v| !is_parent[v]).collect();
        let mut fetch: Vec<(NodeId, NodeId)> =
            sinks.iter().map(|&v| (*location.get(&v).unwrap_or(&v), v)).collect();
        fetch.sort_unstable();
        let mut sink_labels: HashMap<NodeId, Vec<u8>> = HashMap::new();
        for (addr, v) in fetch {
            sink_labels.insert(v, mem.load(addr as u64)?);
        }
        let output = sinks.iter().flat_map(|v| sink_labels[v].clone()).collect();
        Ok(EvalOutput { output, resolved, leakage: mem.leakage() })
    }

    /// Requests issued during the dynamic walk, as `(step, address)`.
    pub fn dynamic_requests(&self, lp: &LeakagePattern) -> Vec<(usize, u64)> {
        let first = self.dynamic_round(1);
        let rounds = self.dynamic_rounds();
        lp.events
            .iter()
            .filter(|e| e.kind == EventKind::Request && rounds.contains(&e.round))
            .map(|e| ((e.round - first) as usize + 1, e.address))
            .collect()
    }
}

/// One-shot full evaluation: `K = Setup(R)` drives a keyed permutation.
pub fn eval(
    spec: &DynamicGraphSpec,
    oracle: &Oracle,
    x: &[u8],
    coins: &[u8],
    mem: &mut TieredMemory,
) -> Result<(Vec<u8>, LeakagePattern), EvalError> {
    let e = Evaluator::new(spec, oracle)?;
    let out = e.run(x, EvaluatorKind::Full.family(coins).as_mut(), mem)?;
    Ok((out.output, out.leakage))
}

/// As [`eval`] with the permutation replaced by a lazily sampled table.
pub fn eval_hybrid(
    spec: &DynamicGraphSpec,
    oracle: &Oracle,
    x: &[u8],
    coins: &[u8],
    mem: &mut TieredMemory,
) -> Result<(Vec<u8>, LeakagePattern), EvalError> {
    let e = Evaluator::new(spec, oracle)?;
    let out = e.run(x, EvaluatorKind::Hybrid.family(coins).as_mut(), mem)?;
    Ok((out.output, out.leakage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{cr_block_partition, line_graph, sample_fig4, Gadget};
    use crate::mhf::label::{f, resolve};
    use crate::seed::Seed;
    use proptest::prelude::*;

    fn toy() -> DynamicGraphSpec {
        // 4 node prefix + 8 outputs, k = 2: two blocks of four
        let host = Gadget { dag: line_graph(12).unwrap(), outputs: 8 };
        cr_block_partition(&host, 2).unwrap().0
    }

    fn run(e: &Evaluator, kind: EvaluatorKind, x: &[u8], coins: &[u8]) -> EvalOutput {
        e.eval(kind, x, coins, e.required_cache(), Policy::Lru).unwrap()
    }

    #[test]
    fn output_matches_reference_and_ignores_key() {
        let spec = toy();
        let h = Oracle::default();
        let e = Evaluator::new(&spec, &h).unwrap();
        for x in [&b"a"[..], b"bb", b""] {
            let res = resolve(&spec, &h, x).unwrap();
            let want = f(&res, &h, x);
            for kind in [EvaluatorKind::Full, EvaluatorKind::Hybrid, EvaluatorKind::NoShuffle] {
                for coins in [&b"k1"[..], b"k2"] {
                    let out = run(&e, kind, x, coins);
                    assert_eq!(out.output, want);
                    assert_eq!(out.resolved, res.resolved);
                }
            }
        }
    }

    #[test]
    fn replay_is_byte_identical() {
        let spec = toy();
        let e = Evaluator::new(&spec, &Oracle::default()).unwrap();
        let a = run(&e, EvaluatorKind::Full, b"x", b"r");
        let b = run(&e, EvaluatorKind::Full, b"x", b"r");
        assert_eq!(a.leakage.to_text(), b.leakage.to_text());
        let c = run(&e, EvaluatorKind::Full, b"x", b"other");
        assert_eq!(a.output, c.output);
    }

    #[test]
    fn shuffle_is_silent_and_flush_is_canonical() {
        let spec = toy();
        let e = Evaluator::new(&spec, &Oracle::default()).unwrap();
        for policy in [Policy::Lru, Policy::Fifo] {
            let mut seen = None;
            for coins in [&b"1"[..], b"2", b"3"] {
                let out = e.eval(EvaluatorKind::Full, b"x", coins, e.required_cache(), policy).unwrap();
                // staging requests the block ascending; the shuffle round
                // only stores it back, ascending
                let mut per_block = Vec::new();
                for (g, block) in e.blocks().iter().enumerate() {
                    let stage = out.leakage.in_rounds(e.stage_round(g)..=e.stage_round(g));
                    let shuffle = out.leakage.in_rounds(e.shuffle_round(g)..=e.shuffle_round(g));
                    let reqs: Vec<u64> = stage.iter().filter(|ev| ev.kind == EventKind::Request).map(|ev| ev.address).collect();
                    assert!(shuffle.iter().all(|ev| ev.kind == EventKind::Store));
                    let stores: Vec<u64> = shuffle.iter().map(|ev| ev.address).collect();
                    let mut asc: Vec<u64> = block.iter().map(|&v| v as u64).collect();
                    asc.sort_unstable();
                    assert_eq!(reqs, asc);
                    assert_eq!(stores, asc);
                    per_block.push(stores);
                }
                if let Some(prev) = &seen {
                    assert_eq!(prev, &per_block);
                }
                seen = Some(per_block);
            }
        }
    }

    #[test]
    fn dynamic_requests_are_distinct_per_block() {
        let spec = toy();
        let e = Evaluator::new(&spec, &Oracle::default()).unwrap();
        for x in 0u8..50 {
            let out = run(&e, EvaluatorKind::Full, &[x], b"k");
            let reqs = e.dynamic_requests(&out.leakage);
            assert_eq!(reqs.len(), spec.dynamic_len());
            let mut addrs: Vec<u64> = reqs.iter().map(|r| r.1).collect();
            addrs.sort_unstable();
            addrs.dedup();
            assert_eq!(addrs.len(), spec.dynamic_len());
        }
    }

    #[test]
    fn noshuffle_leaks_the_parents() {
        let spec = toy();
        let e = Evaluator::new(&spec, &Oracle::default()).unwrap();
        let out = run(&e, EvaluatorKind::NoShuffle, b"x", b"k");
        let reqs: Vec<usize> = e.dynamic_requests(&out.leakage).iter().map(|r| r.1 as usize).collect();
        assert_eq!(reqs, out.resolved);
    }

    #[test]
    fn refuses_small_cache_and_bad_specs() {
        let spec = toy();
        let h = Oracle::default();
        let e = Evaluator::new(&spec, &h).unwrap();
        let small = e.eval(EvaluatorKind::Full, b"x", b"k", e.required_cache() - 1, Policy::Lru);
        assert!(matches!(small, Err(EvalError::Config(_))));
        let fig4 = sample_fig4(16, 0.5, 4, &Seed::from_u64(1)).unwrap();
        assert!(matches!(Evaluator::new(&fig4.spec, &h), Err(EvalError::Contract(_))));
        let no_resolver = spec.with_resolver(Resolver::Unspecified);
        assert!(matches!(Evaluator::new(&no_resolver, &h), Err(EvalError::Contract(_))));
    }

    #[test]
    fn used_array_prefix_exhaustive() {
        // every label residue sequence for b <= 6, and a sample up to 16
        fn walk(u: &UsedArray, depth: usize) {
            if depth == 0 {
                return;
            }
            for r in 0..u.remaining() {
                let mut next = u.clone();
                next.select(&[r as u8]).unwrap();
                assert!(next.prefix_invariant());
                walk(&next, depth - 1);
            }
        }
        for b in 1..=6 {
            walk(&UsedArray::new(b), b);
        }
        let mut u = UsedArray::new(16);
        for s in 1..=16u8 {
            let before: Vec<usize> = u.unused().to_vec();
            let (m, picked) = u.select(&[s.wrapping_mul(37)]).unwrap();
            assert_eq!(before[m - 1], picked);
            assert!(!u.unused().contains(&picked));
        }
        assert!(u.select(&[0]).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn used_array_matches_resolver(x in proptest::collection::vec(any::<u8>(), 0..8)) {
            let spec = toy();
            let h = Oracle::default();
            let e = Evaluator::new(&spec, &h).unwrap();
            let out = run(&e, EvaluatorKind::Full, &x, b"c");
            prop_assert_eq!(out.resolved, resolve(&spec, &h, &x).unwrap().resolved);
        }
    }
}
