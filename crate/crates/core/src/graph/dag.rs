use serde::{Deserialize, Serialize};

use super::{GraphError, NodeId};

/// Immutable DAG over nodes `1..=n`, parents kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    indeg_bound: usize,
    parents: Vec<Vec<NodeId>>,
}

/// `new_to_old[v - 1]` is the original id of node `v` of a derived graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    pub new_to_old: Vec<NodeId>,
    pub old_to_new: Vec<Option<NodeId>>,
}

impl IndexMap {
    pub fn to_old(&self, v: NodeId) -> NodeId {
        self.new_to_old[v - 1]
    }

    pub fn to_new(&self, v: NodeId) -> Option<NodeId> {
        self.old_to_new[v - 1]
    }
}

impl Dag {
    /// Builds a DAG from per-node parent lists (`parents[v - 1]`).
    /// Lists are sorted and deduplicated.
    pub fn new(indeg_bound: usize, mut parents: Vec<Vec<NodeId>>) -> Result<Dag, GraphError> {
        for (idx, ps) in parents.iter_mut().enumerate() {
            let v = idx + 1;
            ps.sort_unstable();
            ps.dedup();
            if let Some(&u) = ps.first() {
                if u == 0 {
                    return Err(GraphError::NodeOutOfRange { node: 0, n: v });
                }
            }
            if let Some(&u) = ps.last() {
                if u >= v {
                    return Err(GraphError::NotTopological { u, v });
                }
            }
            if ps.len() > indeg_bound {
                return Err(GraphError::IndegreeExceeded { v, deg: ps.len(), bound: indeg_bound });
            }
        }
        Ok(Dag { indeg_bound, parents })
    }

    /// Like [`Dag::new`] but declares the bound as the observed max indegree.
    pub fn with_tight_bound(parents: Vec<Vec<NodeId>>) -> Result<Dag, GraphError> {
        let bound = parents
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.sort_unstable();
                q.dedup();
                q.len()
            })
            .max()
            .unwrap_or(0);
        Dag::new(bound, parents)
    }

    pub fn empty(n: usize) -> Dag {
        Dag { indeg_bound: 0, parents: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn indeg_bound(&self) -> usize {
        self.indeg_bound
    }

    pub fn max_indegree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn parent_lists(&self) -> &[Vec<NodeId>] {
        &self.parents
    }

    pub fn into_parent_lists(self) -> Vec<Vec<NodeId>> {
        self.parents
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if v == 0 || v > self.n() {
            Err(GraphError::NodeOutOfRange { node: v, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub fn parents(&self, v: NodeId) -> Result<&[NodeId], GraphError> {
        self.check(v)?;
        Ok(&self.parents[v - 1])
    }

    /// Panics on out-of-range nodes; for hot loops over known-good ids.
    #[inline]
    pub fn parents_of(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v - 1]
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(i, ps)| ps.iter().map(move |&u| (u, i + 1)))
    }

    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.n()];
        for (u, v) in self.edges() {
            ch[u - 1].push(v);
        }
        ch
    }

    pub fn sources(&self) -> Vec<NodeId> {
        (1..=self.n()).filter(|&v| self.parents[v - 1].is_empty()).collect()
    }

    pub fn sinks(&self) -> Vec<NodeId> {
        let mut has_child = vec![false; self.n()];
        for (u, _) in self.edges() {
            has_child[u - 1] = true;
        }
        (1..=self.n()).filter(|&v| !has_child[v - 1]).collect()
    }

    /// All proper ancestors of `vs`; a member of `vs` is included only when
    /// it is reachable from another member.
    pub fn ancestors(&self, vs: &[NodeId]) -> Result<Vec<NodeId>, GraphError> {
        for &v in vs {
            self.check(v)?;
        }
        Ok(self.ancestors_masked(vs, None))
    }

    /// Ancestors inside `G - removed` (removed nodes are neither traversed nor reported).
    pub fn ancestors_masked(&self, vs: &[NodeId], removed: Option<&[bool]>) -> Vec<NodeId> {
        let n = self.n();
        let mut seen = vec![false; n + 1];
        let mut stack: Vec<NodeId> = Vec::new();
        let gone = |v: NodeId| removed.map_or(false, |r| r[v - 1]);
        for &v in vs {
            if gone(v) {
                continue;
            }
            for &p in self.parents_of(v) {
                if !gone(p) && !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        while let Some(v) = stack.pop() {
            for &p in self.parents_of(v) {
                if !gone(p) && !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        (1..=n).filter(|&v| seen[v]).collect()
    }

    /// `len[v - 1]` = number of nodes on the longest path of `G_{<=limit} - removed`
    /// ending at `v` (0 for removed nodes).
    pub fn path_lengths(&self, limit: usize, removed: Option<&[bool]>) -> Vec<u32> {
        let mut len = vec![0u32; limit];
        for v in 1..=limit {
            if removed.map_or(false, |r| r[v - 1]) {
                continue;
            }
            let best = self.parents[v - 1].iter().map(|&p| len[p - 1]).max().unwrap_or(0);
            len[v - 1] = best + 1;
        }
        len
    }

    /// Number of nodes on the longest directed path.
    pub fn depth(&self) -> usize {
        self.depth_masked(self.n(), None)
    }

    pub fn depth_masked(&self, limit: usize, removed: Option<&[bool]>) -> usize {
        self.path_lengths(limit, removed).into_iter().max().unwrap_or(0) as usize
    }

    pub fn mask(&self, s: &[NodeId]) -> Result<Vec<bool>, GraphError> {
        let mut m = vec![false; self.n()];
        for &v in s {
            self.check(v)?;
            m[v - 1] = true;
        }
        Ok(m)
    }

    /// Induced subgraph on `V \ s`, relative order preserved.
    pub fn remove(&self, s: &[NodeId]) -> Result<(Dag, IndexMap), GraphError> {
        let gone = self.mask(s)?;
        let mut old_to_new = vec![None; self.n()];
        let mut new_to_old = Vec::new();
        for v in 1..=self.n() {
            if !gone[v - 1] {
                new_to_old.push(v);
                old_to_new[v - 1] = Some(new_to_old.len());
            }
        }
        let parents = new_to_old
            .iter()
            .map(|&v| self.parents[v - 1].iter().filter_map(|&p| old_to_new[p - 1]).collect())
            .collect();
        let dag = Dag { indeg_bound: self.indeg_bound, parents };
        Ok((dag, IndexMap { new_to_old, old_to_new }))
    }

    /// `G_{<=i}`.
    pub fn prefix(&self, i: NodeId) -> Result<Dag, GraphError> {
        self.check(i)?;
        Ok(Dag { indeg_bound: self.indeg_bound, parents: self.parents[..i].to_vec() })
    }

    /// True iff `depth(G - s) <= d`.
    pub fn check_reducibility_witness(&self, s: &[NodeId], d: usize) -> bool {
        match self.mask(s) {
            Ok(m) => self.depth_masked(self.n(), Some(&m)) <= d,
            Err(_) => false,
        }
    }
}
