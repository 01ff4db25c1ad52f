//! Reference labeling, computed directly with no memory model.

use super::Oracle;
use crate::graph::{Dag, DynamicGraphSpec, GraphError, NodeId, Provenance, ResolvedDynamicGraph};

#[derive(Clone, Copy, Debug)]
pub enum GraphRef<'a> {
    Static(&'a Dag),
    Resolved(&'a ResolvedDynamicGraph),
}

impl<'a> From<&'a Dag> for GraphRef<'a> {
    fn from(g: &'a Dag) -> Self {
        GraphRef::Static(g)
    }
}

impl<'a> From<&'a ResolvedDynamicGraph> for GraphRef<'a> {
    fn from(g: &'a ResolvedDynamicGraph) -> Self {
        GraphRef::Resolved(g)
    }
}

impl<'a> GraphRef<'a> {
    pub fn dag(&self) -> &'a Dag {
        match self {
            GraphRef::Static(g) => g,
            GraphRef::Resolved(r) => &r.dag,
        }
    }

    /// `r(v)` if `v` is a dynamic node.
    fn dynamic_parent(&self, v: NodeId) -> Option<NodeId> {
        match self {
            GraphRef::Static(_) => None,
            GraphRef::Resolved(r) => {
                let b = r.dag.n() - r.resolved.len();
                (v > b).then(|| r.resolved[v - b - 1])
            }
        }
    }
}

/// One step of the recursion, given the labels of everything before `v`.
/// Sources hash `v ∘ x`; static nodes hash their parents' labels in
/// ascending order; dynamic nodes hash `L(r(v)) ∘ L(v - 1)`.
pub fn label_step(g: GraphRef<'_>, oracle: &Oracle, x: &[u8], v: NodeId, prev: &[Vec<u8>]) -> Vec<u8> {
    if let Some(r) = g.dynamic_parent(v) {
        return oracle.query(v, &[&prev[r - 1], &prev[v - 2]]);
    }
    let ps = g.dag().parents_of(v);
    if ps.is_empty() {
        return oracle.query(v, &[x]);
    }
    let parts: Vec<&[u8]> = ps.iter().map(|&p| prev[p - 1].as_slice()).collect();
    oracle.query(v, &parts)
}

/// All labels, `out[v - 1] = L(v)`.
pub fn labels<'a>(g: impl Into<GraphRef<'a>>, oracle: &Oracle, x: &[u8]) -> Vec<Vec<u8>> {
    let g = g.into();
    let n = g.dag().n();
    let mut out = Vec::with_capacity(n);
    for v in 1..=n {
        let l = label_step(g, oracle, x, v, &out);
        out.push(l);
    }
    out
}

pub fn label<'a>(g: impl Into<GraphRef<'a>>, oracle: &Oracle, x: &[u8], v: NodeId) -> Result<Vec<u8>, GraphError> {
    let g = g.into();
    let n = g.dag().n();
    if v == 0 || v > n {
        return Err(GraphError::NodeOutOfRange { node: v, n });
    }
    let mut out = Vec::with_capacity(v);
    for u in 1..=v {
        let l = label_step(g, oracle, x, u, &out);
        out.push(l);
    }
    Ok(out.pop().unwrap())
}

/// Concatenated sink labels, sinks ascending.
pub fn f<'a>(g: impl Into<GraphRef<'a>>, oracle: &Oracle, x: &[u8]) -> Vec<u8> {
    let g = g.into();
    let all = labels(g, oracle, x);
    g.dag().sinks().into_iter().flat_map(|s| all[s - 1].clone()).collect()
}

/// Resolves the spec with honest labels on input `x`. For a uniform
/// resolver the key is `x`.
pub fn resolve(spec: &DynamicGraphSpec, oracle: &Oracle, x: &[u8]) -> Result<ResolvedDynamicGraph, GraphError> {
    let b = spec.static_len();
    let mut prefix = labels(spec.base(), oracle, x);
    let mut st = spec.resolver_state(x);
    let mut resolved = Vec::with_capacity(spec.dynamic_len());
    for i in spec.dynamic_range() {
        let r = st.resolve(i, &prefix[i - 2])?;
        resolved.push(r);
        let l = oracle.query(i, &[&prefix[r - 1], &prefix[i - 2]]);
        prefix.push(l);
    }
    debug_assert_eq!(prefix.len(), b + resolved.len());
    ResolvedDynamicGraph::from_parts(
        spec,
        resolved,
        Provenance {
            input: hex::encode(x),
            key: String::new(),
            oracle_seed: Some(hex::encode(oracle.seed())),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::line_graph;
    use crate::graph::Resolver;

    #[test]
    fn line_graph_unrolled() {
        let h = Oracle::default();
        let g = line_graph(3).unwrap();
        let l1 = h.query(1, &[b"x"]);
        let l2 = h.query(2, &[&l1]);
        let l3 = h.query(3, &[&l2]);
        assert_eq!(label(&g, &h, b"x", 3).unwrap(), l3);
        assert_eq!(f(&g, &h, b"x"), l3);
        assert!(label(&g, &h, b"x", 4).is_err());
    }

    #[test]
    fn isolated_sources() {
        let h = Oracle::default();
        let g = Dag::empty(2);
        let mut want = h.query(1, &[b"x"]);
        want.extend(h.query(2, &[b"x"]));
        assert_eq!(f(&g, &h, b"x"), want);
    }

    #[test]
    fn parents_hashed_ascending() {
        let h = Oracle::default();
        let g = Dag::new(2, vec![vec![], vec![], vec![2, 1]]).unwrap();
        let (a, b) = (h.query(1, &[b""]), h.query(2, &[b""]));
        assert_eq!(label(&g, &h, b"", 3).unwrap(), h.query(3, &[&a, &b]));
    }

    #[test]
    fn dynamic_node_rule() {
        let h = Oracle::default();
        let base = line_graph(3).unwrap();
        let spec = DynamicGraphSpec::new(base, vec![vec![1, 2], vec![1, 3]], Resolver::UsedArray, None).unwrap();
        let res = resolve(&spec, &h, b"in").unwrap();
        let ls = labels(&res, &h, b"in");
        for i in 4..=5 {
            let r = res.r(i);
            assert_eq!(ls[i - 1], h.query(i, &[&ls[r - 1], &ls[i - 2]]));
        }
        let unresolved = spec.clone().with_resolver(Resolver::Unspecified);
        assert!(matches!(resolve(&unresolved, &h, b"in"), Err(GraphError::Resolution { .. })));
    }
}
