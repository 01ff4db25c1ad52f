use std::collections::HashMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Dag, GraphError, NodeId};
use crate::seed::Seed;

/// How `r(i)` is picked out of `R_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolver {
    /// Uniform over `R_i`, keyed by a seed and the caller's key material;
    /// labels are ignored, so the choice is data-independent.
    Uniform { seed: Seed },
    /// Per-group used-array walk: each draw takes a not-yet-used member of
    /// the group's potential parents, indexed by the label of `i - 1`.
    /// Collision-free by construction.
    UsedArray,
    /// No resolver recorded (e.g. parsed from a file without one).
    Unspecified,
}

/// A k-restricted dynamic graph: a static prefix plus path nodes whose
/// second parent is chosen from `R_i` at evaluation time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicGraphSpec {
    base: Dag,
    indeg_bound: usize,
    potential: Vec<Vec<NodeId>>,
    group_of: Vec<usize>,
    groups: Vec<Vec<NodeId>>,
    k: usize,
    resolver: Resolver,
}

impl DynamicGraphSpec {
    /// `potential[t]` is `R_i` for dynamic node `i = base.n() + 1 + t`.
    pub fn new(
        base: Dag,
        potential: Vec<Vec<NodeId>>,
        resolver: Resolver,
        indeg_bound: Option<usize>,
    ) -> Result<DynamicGraphSpec, GraphError> {
        let b = base.n();
        if b == 0 && !potential.is_empty() {
            return Err(GraphError::Shape("dynamic nodes need a non-empty static prefix".into()));
        }
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        let mut index: HashMap<Vec<NodeId>, usize> = HashMap::new();
        let mut group_of = Vec::with_capacity(potential.len());
        for (t, r) in potential.iter().enumerate() {
            let i = b + 1 + t;
            if r.is_empty() {
                return Err(GraphError::Resolution { node: i, msg: "empty potential parent set".into() });
            }
            let mut sorted = r.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != r.len() {
                return Err(GraphError::Resolution { node: i, msg: "repeated potential parent".into() });
            }
            // i - 1 itself only shows up when a single block holds every
            // output, so the first appended node may draw its predecessor
            if sorted[0] == 0 || *sorted.last().unwrap() >= i {
                return Err(GraphError::Resolution {
                    node: i,
                    msg: "potential parents must lie in 1..=i-1".into(),
                });
            }
            let g = *index.entry(r.clone()).or_insert_with(|| {
                groups.push(r.clone());
                groups.len() - 1
            });
            group_of.push(g);
        }
        let k = potential.iter().map(Vec::len).max().unwrap_or(0);
        let natural = if potential.is_empty() { base.indeg_bound() } else { base.indeg_bound().max(2) };
        let indeg_bound = match indeg_bound {
            Some(d) if d < natural.max(base.max_indegree()) => {
                return Err(GraphError::IndegreeExceeded { v: 0, deg: natural, bound: d })
            }
            Some(d) => d,
            None => natural,
        };
        Ok(DynamicGraphSpec { base, indeg_bound, potential, group_of, groups, k, resolver })
    }

    /// A spec with no dynamic nodes, useful for running dynamic tooling on static graphs.
    pub fn from_static(g: Dag) -> DynamicGraphSpec {
        DynamicGraphSpec::new(g, Vec::new(), Resolver::Unspecified, None).expect("static spec")
    }

    pub fn with_resolver(mut self, resolver: Resolver) -> DynamicGraphSpec {
        self.resolver = resolver;
        self
    }

    pub fn n(&self) -> usize {
        self.base.n() + self.potential.len()
    }

    pub fn base(&self) -> &Dag {
        &self.base
    }

    pub fn static_len(&self) -> usize {
        self.base.n()
    }

    pub fn dynamic_len(&self) -> usize {
        self.potential.len()
    }

    pub fn dynamic_range(&self) -> RangeInclusive<NodeId> {
        self.base.n() + 1..=self.n()
    }

    pub fn is_dynamic(&self, v: NodeId) -> bool {
        v > self.base.n() && v <= self.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn indeg_bound(&self) -> usize {
        self.indeg_bound
    }

    pub fn resolver(&self) -> &Resolver {
        &self.resolver
    }

    /// `R_i` for a dynamic node, `None` for static nodes.
    pub fn potential_parents(&self, i: NodeId) -> Option<&[NodeId]> {
        if self.is_dynamic(i) {
            Some(&self.potential[i - self.base.n() - 1])
        } else {
            None
        }
    }

    pub fn potential_lists(&self) -> &[Vec<NodeId>] {
        &self.potential
    }

    /// Distinct `R` sets in order of first appearance.
    pub fn groups(&self) -> &[Vec<NodeId>] {
        &self.groups
    }

    pub fn group_of(&self, i: NodeId) -> Option<usize> {
        self.is_dynamic(i).then(|| self.group_of[i - self.base.n() - 1])
    }

    /// Every node that could be a parent of `v`: the stored parents for
    /// static nodes, `{v - 1} ∪ R_v` for dynamic ones.
    pub fn all_potential_parents(&self, v: NodeId) -> Vec<NodeId> {
        match self.potential_parents(v) {
            Some(r) => {
                let mut out = r.to_vec();
                out.push(v - 1);
                out.sort_unstable();
                out
            }
            None => self.base.parents_of(v).to_vec(),
        }
    }

    pub fn resolver_state(&self, key: &[u8]) -> ResolverState<'_> {
        ResolverState::new(self, key)
    }

    /// Resolves every dynamic node, using hash-derived stand-ins for labels.
    /// Good enough for pebbling, where only the parent structure matters.
    pub fn resolve_pseudo(&self, key: &[u8]) -> Result<ResolvedDynamicGraph, GraphError> {
        let mut st = self.resolver_state(key);
        let mut resolved = Vec::with_capacity(self.dynamic_len());
        for i in self.dynamic_range() {
            resolved.push(st.resolve(i, &pseudo_label(key, i - 1))?);
        }
        ResolvedDynamicGraph::from_parts(
            self,
            resolved,
            Provenance { input: String::new(), key: hex::encode(key), oracle_seed: None },
        )
    }
}

/// Stand-in for `L(v)` when no oracle is in play.
pub fn pseudo_label(key: &[u8], v: NodeId) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pebblemark/pseudo-label");
    h.update((key.len() as u64).to_be_bytes());
    h.update(key);
    h.update((v as u64).to_be_bytes());
    h.finalize().into()
}

/// Big-endian unsigned value of `label` reduced mod `m`.
pub fn label_mod(label: &[u8], m: usize) -> usize {
    assert!(m > 0, "modulus must be positive");
    let m = m as u128;
    let mut acc: u128 = 0;
    for &b in label {
        acc = (acc * 256 + b as u128) % m;
    }
    acc as usize
}

/// Incremental resolution of a spec; call [`ResolverState::resolve`] for the
/// dynamic nodes in ascending order.
pub struct ResolverState<'a> {
    spec: &'a DynamicGraphSpec,
    key: Vec<u8>,
    used: Vec<Vec<usize>>,
    selected: Vec<usize>,
    next: NodeId,
}

impl<'a> ResolverState<'a> {
    fn new(spec: &'a DynamicGraphSpec, key: &[u8]) -> ResolverState<'a> {
        let used = spec.groups.iter().map(|g| (1..=g.len()).collect()).collect();
        ResolverState {
            spec,
            key: key.to_vec(),
            used,
            selected: vec![0; spec.groups.len()],
            next: spec.static_len() + 1,
        }
    }

    /// Used-array contents of a group, 1-based indices into its `R` set.
    pub fn used(&self, group: usize) -> &[usize] {
        &self.used[group]
    }

    pub fn resolve(&mut self, i: NodeId, prev_label: &[u8]) -> Result<NodeId, GraphError> {
        if i != self.next {
            return Err(GraphError::Resolution { node: i, msg: format!("expected node {}", self.next) });
        }
        let r_set = self
            .spec
            .potential_parents(i)
            .ok_or_else(|| GraphError::Resolution { node: i, msg: "not a dynamic node".into() })?;
        let r = match &self.spec.resolver {
            Resolver::Uniform { seed } => {
                let mut h = Sha256::new();
                h.update(b"pebblemark/uniform");
                h.update(seed.0);
                h.update((self.key.len() as u64).to_be_bytes());
                h.update(&self.key);
                h.update((i as u64).to_be_bytes());
                let d = h.finalize();
                r_set[label_mod(&d[..16], r_set.len())]
            }
            Resolver::UsedArray => {
                let g = self.spec.group_of[i - self.spec.static_len() - 1];
                let b = r_set.len();
                let s = self.selected[g] + 1;
                if s > b {
                    return Err(GraphError::Resolution { node: i, msg: "group exhausted".into() });
                }
                let top = b - s + 1;
                let m = label_mod(prev_label, top) + 1;
                let u = self.used[g][m - 1];
                self.used[g].swap(m - 1, top - 1);
                self.selected[g] = s;
                r_set[u - 1]
            }
            Resolver::Unspecified => {
                return Err(GraphError::Resolution { node: i, msg: "spec has no resolver".into() })
            }
        };
        self.next += 1;
        Ok(r)
    }
}

/// Where a resolved graph came from; byte strings are hex encoded.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub input: String,
    pub key: String,
    pub oracle_seed: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedDynamicGraph {
    pub dag: Dag,
    /// `r(i)` for each dynamic node in order.
    pub resolved: Vec<NodeId>,
    pub provenance: Provenance,
}

impl ResolvedDynamicGraph {
    pub fn from_parts(
        spec: &DynamicGraphSpec,
        resolved: Vec<NodeId>,
        provenance: Provenance,
    ) -> Result<ResolvedDynamicGraph, GraphError> {
        if resolved.len() != spec.dynamic_len() {
            return Err(GraphError::Shape(format!(
                "{} resolutions for {} dynamic nodes",
                resolved.len(),
                spec.dynamic_len()
            )));
        }
        let mut parents = spec.base.parent_lists().to_vec();
        for (t, &r) in resolved.iter().enumerate() {
            let i = spec.static_len() + 1 + t;
            if !spec.potential[t].contains(&r) {
                return Err(GraphError::Resolution { node: i, msg: format!("{r} not in R_{i}") });
            }
            parents.push(vec![r, i - 1]);
        }
        let dag = Dag::new(spec.indeg_bound, parents)?;
        Ok(ResolvedDynamicGraph { dag, resolved, provenance })
    }

    pub fn r(&self, i: NodeId) -> NodeId {
        let b = self.dag.n() - self.resolved.len();
        self.resolved[i - b - 1]
    }
}
