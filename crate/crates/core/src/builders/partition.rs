//! Block-partition extensions and the two full samplers.
//!
//! With `B = g.n()` nodes in the host graph, the appended path nodes are
//! `B + t` for `t = 1..=N`; node `B + t` draws from block
//! `j = ((t - 1) mod N/k) + 1`, so the blocks are visited round robin and the
//! `s`-th visit of block `j` is `t = j + (s - 1) N/k`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::overlay::{grates_overlay, superconc_overlay};
use super::stack::{depth_robust_stack, DepthRobustProfile};
use super::superconc::Flavor;
use super::Gadget;
use crate::graph::{DynamicGraphSpec, GraphError, NodeId, Resolver};
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub n_blocks: usize,
    pub block_size: usize,
    /// first node of each block `O_1 .. O_{N/k}`
    pub offsets: Vec<NodeId>,
}

impl BlockLayout {
    fn new(first: NodeId, n_blocks: usize, block_size: usize) -> BlockLayout {
        let offsets = (0..n_blocks).map(|j| first + j * block_size).collect();
        BlockLayout { n_blocks, block_size, offsets }
    }

    /// Nodes of block `j` (1-based).
    pub fn block(&self, j: usize) -> Vec<NodeId> {
        let s = self.offsets[j - 1];
        (s..s + self.block_size).collect()
    }

    pub fn block_of_node(&self, v: NodeId) -> Option<usize> {
        let first = *self.offsets.first()?;
        if v < first || v >= first + self.n_blocks * self.block_size {
            return None;
        }
        Some((v - first) / self.block_size + 1)
    }

    /// Block visited by dynamic step `t` (1-based).
    pub fn block_for_step(&self, t: usize) -> usize {
        (t - 1) % self.n_blocks + 1
    }
}

fn blocks(g: &Gadget, n: usize, k: usize, block_size: usize) -> Result<BlockLayout, GraphError> {
    if k == 0 || n % k != 0 {
        return Err(GraphError::Shape(format!("k = {k} must divide N = {n}")));
    }
    let n_blocks = n / k;
    if g.outputs != n_blocks * block_size {
        return Err(GraphError::Shape(format!(
            "host exposes {} outputs, need {}",
            g.outputs,
            n_blocks * block_size
        )));
    }
    Ok(BlockLayout::new(g.dag.n() - g.outputs + 1, n_blocks, block_size))
}

fn extend(g: &Gadget, layout: &BlockLayout, n: usize, resolver: Resolver) -> Result<DynamicGraphSpec, GraphError> {
    let potential = (1..=n).map(|t| layout.block(layout.block_for_step(t))).collect();
    DynamicGraphSpec::new(g.dag.clone(), potential, resolver, None)
}

/// `BlockPartition_k(G)`: `N` path nodes, each drawing uniformly from the
/// `k`-node block it is assigned to. Draws depend only on `seed` and the
/// resolution key, never on labels.
pub fn block_partition(g: &Gadget, k: usize, seed: &Seed) -> Result<(DynamicGraphSpec, BlockLayout), GraphError> {
    let n = g.outputs;
    let layout = blocks(g, n, k, k)?;
    let spec = extend(g, &layout, n, Resolver::Uniform { seed: *seed })?;
    Ok((spec, layout))
}

/// `CR-BlockPartition_k(G)` over `2N` outputs: `N/k` blocks of `2k` nodes,
/// each block visited `k` times, parents picked by the used-array walk so no
/// block repeats a parent.
pub fn cr_block_partition(g: &Gadget, k: usize) -> Result<(DynamicGraphSpec, BlockLayout), GraphError> {
    if g.outputs % 2 != 0 {
        return Err(GraphError::Shape("collision-resistant partition needs 2N outputs".into()));
    }
    let n = g.outputs / 2;
    let layout = blocks(g, n, k, 2 * k)?;
    let spec = extend(g, &layout, n, Resolver::UsedArray)?;
    Ok((spec, layout))
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub spec: DynamicGraphSpec,
    pub layout: BlockLayout,
    /// total size of the static part divided by `N`
    pub alpha: f64,
    pub profile: DepthRobustProfile,
}

fn flavor_for(n: usize) -> Flavor {
    if n >= 2 && n.is_power_of_two() {
        Flavor::Butterfly
    } else {
        Flavor::Recursive
    }
}

fn layers(inputs: usize, epsilon: f64, seed: &Seed) -> Result<(Gadget, DepthRobustProfile), GraphError> {
    let (g1, profile) = depth_robust_stack(inputs, epsilon, &seed.derive("g1"))?;
    let g2 = superconc_overlay(&g1, flavor_for(inputs))?;
    let g3 = grates_overlay(&g2, epsilon, &seed.derive("g3"))?;
    Ok((g3, profile))
}

/// grates_N -> superconc -> grates overlay -> BlockPartition_k.
pub fn sample_fig4(n: usize, epsilon: f64, k: usize, seed: &Seed) -> Result<Sample, GraphError> {
    if k == 0 || n % k != 0 {
        return Err(GraphError::Shape(format!("k = {k} must divide N = {n}")));
    }
    let (g3, profile) = layers(n, epsilon, seed)?;
    let (spec, layout) = block_partition(&g3, k, &seed.derive("partition"))?;
    let alpha = g3.dag.n() as f64 / n as f64;
    Ok(Sample { spec, layout, alpha, profile })
}

/// grates_2N -> superconc -> grates overlay -> CR-BlockPartition_k.
pub fn sample_fig5(n: usize, epsilon: f64, k: usize, seed: &Seed) -> Result<Sample, GraphError> {
    if k == 0 || n % k != 0 {
        return Err(GraphError::Shape(format!("k = {k} must divide N = {n}")));
    }
    let (g3, profile) = layers(2 * n, epsilon, seed)?;
    let (spec, layout) = cr_block_partition(&g3, k)?;
    let alpha = g3.dag.n() as f64 / n as f64;
    Ok(Sample { spec, layout, alpha, profile })
}

/// Random static baseline with `k = 1`: nodes 1 and 2 form a path, every
/// later node `i` has parents `i - 1` and one fixed node drawn uniformly from
/// `[1, i - 2]`.
pub fn random_k1(n: usize, seed: &Seed) -> Result<DynamicGraphSpec, GraphError> {
    if n < 3 {
        return Err(GraphError::Range(format!("random k=1 spec needs n >= 3 (got {n})")));
    }
    let mut rng = seed.rng();
    let potential = (3..=n).map(|i| vec![rng.gen_range(1..=i - 2)]).collect();
    DynamicGraphSpec::new(crate::builders::line_graph(2)?, potential, Resolver::Uniform { seed: *seed }, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::line_graph;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn random_k1_shape() {
        let s = random_k1(50, &Seed::from_u64(1)).unwrap();
        assert_eq!((s.n(), s.static_len(), s.k()), (50, 2, 1));
        for i in 3..=50 {
            let r = s.potential_parents(i).unwrap();
            assert!(r.len() == 1 && r[0] <= i - 2);
        }
        assert_eq!(random_k1(50, &Seed::from_u64(1)).unwrap(), s);
        assert!(random_k1(2, &Seed::from_u64(1)).is_err());
    }

    fn host(outputs: usize) -> Gadget {
        Gadget { dag: line_graph(outputs + 3).unwrap(), outputs }
    }

    #[test]
    fn layout_partitions_outputs() {
        let (spec, layout) = block_partition(&host(12), 4, &Seed::from_u64(1)).unwrap();
        assert_eq!(layout.n_blocks, 3);
        let mut all: Vec<usize> = (1..=3).flat_map(|j| layout.block(j)).collect();
        all.sort_unstable();
        assert_eq!(all, (4..=15).collect::<Vec<_>>());
        assert_eq!(spec.n(), 27);
        assert_eq!(spec.k(), 4);
        assert_eq!(spec.potential_parents(16).unwrap(), &layout.block(1)[..]);
        assert_eq!(spec.potential_parents(19).unwrap(), &layout.block(1)[..]);
        assert_eq!(spec.potential_parents(18).unwrap(), &layout.block(3)[..]);
        assert_eq!(layout.block_of_node(8), Some(2));
        assert_eq!(layout.block_of_node(3), None);
    }

    #[test]
    fn k_equals_n_single_block() {
        let (spec, layout) = block_partition(&host(6), 6, &Seed::from_u64(1)).unwrap();
        assert_eq!(layout.n_blocks, 1);
        for i in spec.dynamic_range() {
            assert_eq!(spec.potential_parents(i).unwrap(), &[4, 5, 6, 7, 8, 9]);
        }
    }

    #[test]
    fn divisibility_errors() {
        assert!(block_partition(&host(12), 5, &Seed::default()).is_err());
        assert!(cr_block_partition(&host(12), 4).is_err());
        assert!(cr_block_partition(&host(13), 1).is_err());
    }

    #[test]
    fn resolved_parent_in_block() {
        let (spec, layout) = block_partition(&host(16), 4, &Seed::from_u64(2)).unwrap();
        for key in 0..20u8 {
            let g = spec.resolve_pseudo(&[key]).unwrap();
            for (t, i) in spec.dynamic_range().enumerate() {
                let j = layout.block_for_step(t + 1);
                assert_eq!(layout.block_of_node(g.r(i)), Some(j));
            }
        }
    }

    #[test]
    fn uniform_draws_pass_chi_square() {
        let (spec, layout) = block_partition(&host(8), 8, &Seed::from_u64(3)).unwrap();
        let first = spec.static_len() + 1;
        let mut counts = [0f64; 8];
        let trials = 10_000u32;
        for key in 0..trials {
            let g = spec.resolve_pseudo(&key.to_le_bytes()).unwrap();
            counts[g.r(first) - layout.offsets[0]] += 1.0;
        }
        let e = trials as f64 / 8.0;
        let stat: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
        let p = 1.0 - ChiSquared::new(7.0).unwrap().cdf(stat);
        assert!(p > 0.001, "chi2 = {stat}, p = {p}");
    }

    #[test]
    fn cr_blocks_of_2k_and_k_subset_image() {
        let (spec, layout) = cr_block_partition(&host(16), 4).unwrap();
        assert_eq!(layout.block_size, 8);
        assert_eq!(layout.n_blocks, 2);
        assert_eq!(spec.k(), 8);
        for key in 0..200u16 {
            let g = spec.resolve_pseudo(&key.to_le_bytes()).unwrap();
            for j in 1..=2 {
                let mut img: Vec<usize> = spec
                    .dynamic_range()
                    .enumerate()
                    .filter(|(t, _)| layout.block_for_step(t + 1) == j)
                    .map(|(_, i)| g.r(i))
                    .collect();
                assert_eq!(img.len(), 4);
                img.sort_unstable();
                img.dedup();
                assert_eq!(img.len(), 4);
                assert!(img.iter().all(|&v| layout.block_of_node(v) == Some(j)));
            }
        }
    }

    #[test]
    fn samplers_bookkeeping() {
        let s4 = sample_fig4(16, 0.5, 4, &Seed::from_u64(5)).unwrap();
        assert_eq!(s4.spec.k(), 4);
        assert_eq!(s4.spec.dynamic_len(), 16);
        assert!((s4.alpha * 16.0 - s4.spec.static_len() as f64).abs() < 1e-9);
        assert_eq!(s4.spec.n() as f64, (s4.alpha + 1.0) * 16.0);
        let s5 = sample_fig5(16, 0.5, 4, &Seed::from_u64(5)).unwrap();
        assert_eq!(s5.spec.k(), 8);
        assert_eq!(s5.layout.block_size, 8);
        assert_eq!(s5.spec.dynamic_len(), 16);
        // no resolver-dependent edge inside the static part
        let last_static = s5.spec.static_len();
        for r in s5.spec.potential_lists() {
            assert!(r.iter().all(|&v| v < last_static + 1));
        }
        let again = sample_fig5(16, 0.5, 4, &Seed::from_u64(5)).unwrap();
        assert_eq!(again.spec, s5.spec);
    }

    #[test]
    fn non_power_of_two_sizes_use_recursive_flavor() {
        let s = sample_fig5(12, 0.5, 3, &Seed::from_u64(1)).unwrap();
        assert_eq!(s.layout.n_blocks, 4);
        assert_eq!(s.layout.block_size, 6);
    }
}
