use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetBundle, Task};
use crate::autodiff::Matrix;
use crate::error::Result;
use crate::graph::{Edge, Graph};
use crate::scalar::Scalar;

pub const BA_BASE_NODES: usize = 300;
/// Edges added per new node in the preferential-attachment base.
pub const BA_ATTACH: usize = 5;
pub const MOTIF_COUNT: usize = 80;
/// Levels below the root of the balanced binary tree (2^9 - 1 nodes).
pub const TREE_DEPTH: u32 = 8;
pub const SYNTHETIC_FEATURE_DIM: usize = 10;

/// Barabási–Albert base (300 nodes, m = 5) with 80 houses, each hung off a
/// uniformly chosen base node by a single edge.
///
/// Labels: 0 base, 1 roof, 2 middle (the two nodes under the roof),
/// 3 bottom. Features are all-ones.
pub fn gen_ba_shapes<T: Scalar>(seed: u64) -> Result<DatasetBundle<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = barabasi_albert(BA_BASE_NODES, BA_ATTACH, &mut rng);
    let mut labels = vec![0usize; BA_BASE_NODES];
    for k in 0..MOTIF_COUNT {
        let s = BA_BASE_NODES + 5 * k;
        // 0,1 bottom; 2,3 middle; 4 roof
        edges.extend([(s, s + 1), (s, s + 2), (s + 1, s + 3), (s + 2, s + 3), (s + 2, s + 4), (s + 3, s + 4)]);
        labels.extend([3, 3, 2, 2, 1]);
        let anchor = rng.gen_range(0..BA_BASE_NODES);
        edges.push((anchor, s));
    }
    finish("ba-shapes", edges, labels, 4)
}

/// Balanced binary tree of depth 8 with 80 six-cycles, each joined to a
/// uniformly chosen tree node by a single edge. Labels: 0 tree, 1 cycle.
pub fn gen_tree_cycles<T: Scalar>(seed: u64) -> Result<DatasetBundle<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree_nodes = (1usize << (TREE_DEPTH + 1)) - 1;
    let mut edges: Vec<Edge> = (1..tree_nodes).map(|v| ((v - 1) / 2, v)).collect();
    let mut labels = vec![0usize; tree_nodes];
    for k in 0..MOTIF_COUNT {
        let s = tree_nodes + 6 * k;
        edges.extend((0..6).map(|i| (s + i, s + (i + 1) % 6)));
        labels.extend([1; 6]);
        let anchor = rng.gen_range(0..tree_nodes);
        edges.push((anchor, s));
    }
    finish("tree-cycles", edges, labels, 2)
}

fn finish<T: Scalar>(
    name: &str,
    edges: Vec<Edge>,
    labels: Vec<usize>,
    class_count: usize,
) -> Result<DatasetBundle<T>> {
    let n = labels.len();
    let g = Graph::new(n, edges, Matrix::filled(n, SYNTHETIC_FEATURE_DIM, T::one()))?
        .with_node_labels(labels)?;
    Ok(DatasetBundle {
        name: name.into(),
        task: Task::NodeClassification,
        graphs: vec![g],
        class_count,
        split: None,
    })
}

/// Preferential attachment: a star on `m + 1` nodes, then every new node
/// links to `m` distinct existing nodes sampled proportionally to degree.
fn barabasi_albert(n: usize, m: usize, rng: &mut impl Rng) -> Vec<Edge> {
    let mut edges: Vec<Edge> = (1..=m).map(|v| (0, v)).collect();
    // each node appears once per incident edge endpoint
    let mut pool: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    for v in m + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = pool[rng.gen_range(0..pool.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, v));
            pool.extend([t, v]);
        }
    }
    edges
}
