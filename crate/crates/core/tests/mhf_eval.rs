use std::collections::HashMap;

use pebblemark::builders::sample_fig5;
use pebblemark::memory::Policy;
use pebblemark::mhf::{f, resolve, Evaluator, EvaluatorKind, Oracle};
use pebblemark::{NodeId, ResolvedDynamicGraph, Seed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Labels by memoised recursion from the sinks down, hashing directly.
fn recursive_label(g: &ResolvedDynamicGraph, x: &[u8], v: NodeId, memo: &mut HashMap<NodeId, Vec<u8>>) -> Vec<u8> {
    if let Some(l) = memo.get(&v) {
        return l.clone();
    }
    let b = g.dag.n() - g.resolved.len();
    let parents: Vec<NodeId> = if v > b { vec![g.r(v), v - 1] } else { g.dag.parents_of(v).to_vec() };
    let mut h = Sha256::new();
    h.update(b"pebblemark/H");
    h.update(0u64.to_be_bytes());
    h.update((v as u64).to_be_bytes());
    if parents.is_empty() {
        h.update(x);
    }
    for p in parents {
        h.update(recursive_label(g, x, p, memo));
    }
    let l = h.finalize().to_vec();
    memo.insert(v, l.clone());
    l
}

#[test]
fn fig5_output_matches_recursive_oracle() {
    let s = sample_fig5(64, 0.5, 8, &Seed::from_u64(9)).unwrap();
    let h = Oracle::default();
    let e = Evaluator::new(&s.spec, &h).unwrap();
    for x in [&b"pw"[..], b"", &[0xff; 16]] {
        let res = resolve(&s.spec, &h, x).unwrap();
        let mut memo = HashMap::new();
        let want: Vec<u8> = res.dag.sinks().into_iter().flat_map(|v| recursive_label(&res, x, v, &mut memo)).collect();
        assert_eq!(f(&res, &h, x), want);
        let out = e.eval(EvaluatorKind::Full, x, b"coins", e.required_cache(), Policy::Fifo).unwrap();
        assert_eq!(out.output, want);
    }
}

#[test]
fn parents_never_collide_within_a_block() {
    let s = sample_fig5(64, 0.5, 8, &Seed::from_u64(9)).unwrap();
    let h = Oracle::default();
    let e = Evaluator::new(&s.spec, &h).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x: [u8; 16] = rng.gen();
        let out = e.eval(EvaluatorKind::Full, &x, &[1], e.required_cache(), Policy::Lru).unwrap();
        let mut per_block: HashMap<usize, Vec<NodeId>> = HashMap::new();
        for (t, &r) in out.resolved.iter().enumerate() {
            per_block.entry(s.layout.block_for_step(t + 1)).or_default().push(r);
        }
        for (j, rs) in per_block {
            let block = s.layout.block(j);
            assert!(rs.iter().all(|r| block.contains(r)));
            let mut d = rs.clone();
            d.sort_unstable();
            d.dedup();
            assert_eq!(d.len(), rs.len(), "block {j} repeated a parent");
        }
    }
}

#[test]
fn leakage_depends_on_key_not_output() {
    let s = sample_fig5(32, 0.5, 4, &Seed::from_u64(2)).unwrap();
    let e = Evaluator::new(&s.spec, &Oracle::default()).unwrap();
    let a = e.eval(EvaluatorKind::Full, b"x", b"k1", e.required_cache(), Policy::Lru).unwrap();
    let b = e.eval(EvaluatorKind::Full, b"x", b"k2", e.required_cache(), Policy::Lru).unwrap();
    assert_eq!(a.output, b.output);
    assert_ne!(a.leakage, b.leakage);
    // same number of events either way; only addresses move
    assert_eq!(a.leakage.events.len(), b.leakage.events.len());
}
