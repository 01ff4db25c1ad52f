use super::stack::stack_graph;
use super::superconc::{superconcentrator, Flavor};
use super::{line_graph, Gadget};
use crate::graph::{Dag, GraphError};
use crate::seed::Seed;

/// `overlay(G1, H, G2)`: the edges of `H`, of `G1` placed on the first
/// `g1.n()` nodes and of `G2` shifted onto the last `g2.n()` nodes.
///
/// The first `g1.n()` nodes of `H` must be sources. The last `g2.n()` nodes
/// are not required to be sinks, since the grates stand-in already threads its
/// outputs on a path.
pub fn overlay(g1: &Dag, h: &Dag, g2: &Dag) -> Result<Dag, GraphError> {
    let n = h.n();
    if g1.n() > n || g2.n() > n {
        return Err(GraphError::Shape(format!(
            "overlay of {} and {} nodes onto {} nodes",
            g1.n(),
            g2.n(),
            n
        )));
    }
    if let Some(v) = (1..=g1.n()).find(|&v| !h.parents_of(v).is_empty()) {
        return Err(GraphError::Shape(format!("node {v} of H is not a source")));
    }
    let shift = n - g2.n();
    let mut parents: Vec<Vec<usize>> = h.parent_lists().to_vec();
    for (u, v) in g1.edges() {
        parents[v - 1].push(u);
    }
    for (u, v) in g2.edges() {
        parents[v + shift - 1].push(u + shift);
    }
    Dag::with_tight_bound(parents)
}

/// Prepends `pad` isolated nodes, shifting the gadget's ids.
fn pad(h: &Dag, pad: usize) -> Dag {
    let mut parents = vec![Vec::new(); pad];
    parents.extend(h.parent_lists().iter().map(|ps| ps.iter().map(|p| p + pad).collect()));
    Dag::new(h.indeg_bound(), parents).expect("shifted gadget stays valid")
}

fn overlay_outputs(g: &Gadget, gadget: &Gadget) -> Result<Gadget, GraphError> {
    if gadget.dag.sources().len() < g.outputs
        || (1..=g.outputs).any(|v| !gadget.dag.parents_of(v).is_empty())
    {
        return Err(GraphError::Shape("gadget inputs must be its first nodes".into()));
    }
    // the gadget's inputs line up with g's outputs
    let h = pad(&gadget.dag, g.dag.n() - g.outputs);
    let l = line_graph(gadget.outputs)?;
    let dag = overlay(&g.dag, &h, &l)?;
    Ok(Gadget { dag, outputs: gadget.outputs })
}

/// `superconc(G)` with a superconcentrator over `G`'s `N` outputs.
pub fn superconc_overlay(g: &Gadget, flavor: Flavor) -> Result<Gadget, GraphError> {
    let sc = superconcentrator(g.outputs, flavor)?;
    overlay_outputs(g, &sc)
}

/// `grates_eps(G)` with the seeded stand-in over `G`'s `N` outputs.
pub fn grates_overlay(g: &Gadget, epsilon: f64, seed: &Seed) -> Result<Gadget, GraphError> {
    let st = stack_graph(g.outputs, epsilon, seed)?;
    overlay_outputs(g, &st)
}
