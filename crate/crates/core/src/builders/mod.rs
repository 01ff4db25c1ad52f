//! Graph families and gadgets: line graphs, the depth-robust stand-in,
//! superconcentrators, overlays, block partitions and the two samplers.

mod amenable;
mod overlay;
mod partition;
mod stack;
mod superconc;

pub use amenable::{check_amenable, AmenabilityReport, ClauseResult, CLAUSES};
pub use overlay::{grates_overlay, overlay, superconc_overlay};
pub use partition::{random_k1, 
    block_partition, cr_block_partition, sample_fig4, sample_fig5, BlockLayout, Sample,
};
pub use stack::{audit_depth_robust, depth_robust_stack, DepthRobustProfile};
pub use superconc::{superconcentrator, Flavor};

use crate::graph::{Dag, GraphError, NodeId};

/// A DAG whose last `outputs` nodes are its designated outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    pub dag: Dag,
    pub outputs: usize,
}

impl Gadget {
    pub fn output_range(&self) -> std::ops::RangeInclusive<NodeId> {
        self.dag.n() - self.outputs + 1..=self.dag.n()
    }
}

pub fn line_graph(n: usize) -> Result<Dag, GraphError> {
    if n == 0 {
        return Err(GraphError::Range("line graph needs n >= 1".into()));
    }
    Dag::new(1, (1..=n).map(|v| if v > 1 { vec![v - 1] } else { vec![] }).collect())
}
