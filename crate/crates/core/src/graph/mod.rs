//! Static DAGs, k-restricted dynamic graph specs and their text format.
//!
//! Nodes are 1-based and numbered in topological order: every edge `(u, v)`
//! has `u < v`.

mod dag;
mod dynamic;
mod text;

pub use dag::{Dag, IndexMap};
pub use dynamic::{
    label_mod, DynamicGraphSpec, Provenance, ResolvedDynamicGraph, Resolver, ResolverState,
};
pub use text::{graph_hash, parse, parse_dag, parse_spec, GraphFile};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("edge ({u}, {v}) is not topological")]
    NotTopological { u: NodeId, v: NodeId },
    #[error("node {v} has {deg} parents, bound is {bound}")]
    IndegreeExceeded { v: NodeId, deg: usize, bound: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot resolve node {node}: {msg}")]
    Resolution { node: NodeId, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0}")]
    Range(String),
}
