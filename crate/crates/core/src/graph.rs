//! Graphs, adjacency normalization, computation subgraphs and edge masks.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::sync::Arc;

use crate::autodiff::{Matrix, Topology};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undirected edge, always stored as `(lo, hi)` with `lo < hi`.
pub type Edge = (usize, usize);

/// Simple undirected graph with node features and optional labels.
///
/// The adjacency is binary and symmetric with an empty diagonal; it is kept
/// as a sorted edge list plus neighbor index rather than a dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph<T> {
    topo: Arc<Topology>,
    features: Matrix<T>,
    node_labels: Option<Vec<usize>>,
    graph_label: Option<usize>,
}

impl<T: Scalar> Graph<T> {
    /// Edges may be given in either orientation and may repeat; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Matrix<T>,
    ) -> Result<Self> {
        if features.rows() != node_count {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                node_count
            )));
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on node {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Graph {
            topo: Arc::new(Topology::from_sorted(node_count, list)),
            features,
            node_labels: None,
            graph_label: None,
        })
    }

    pub fn with_node_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::InvalidArgument(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_graph_label(mut self, label: usize) -> Self {
        self.graph_label = Some(label);
        self
    }

    pub fn node_count(&self) -> usize {
        self.topo.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.topo.edge_count()
    }

    pub fn edges(&self) -> &[Edge] {
        self.topo.edges()
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topo
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn node_labels(&self) -> Option<&[usize]> {
        self.node_labels.as_deref()
    }

    pub fn graph_label(&self) -> Option<usize> {
        self.graph_label
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.topo.edge_id(a, b).is_some()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.topo.degree(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.topo.neighbors(v).iter().map(|&(u, _)| u)
    }

    pub fn adjacency_dense(&self) -> Matrix<T> {
        let n = self.node_count();
        let mut a = Matrix::zeros(n, n);
        for &(i, j) in self.edges() {
            a[(i, j)] = T::one();
            a[(j, i)] = T::one();
        }
        a
    }

    /// Same structure, different features.
    pub fn with_features(&self, features: Matrix<T>) -> Result<Self> {
        if features.rows() != self.node_count() {
            return Err(Error::shape("with_features", features.shape(), self.features.shape()));
        }
        Ok(Graph {
            features,
            ..self.clone()
        })
    }

    /// Same nodes, features and labels, keeping only `edges`.
    pub fn edge_subgraph(&self, edges: &[Edge]) -> Result<Self> {
        for &(a, b) in edges {
            if !self.has_edge(a, b) {
                return Err(Error::SupportViolation(a, b));
            }
        }
        let mut g = Graph::new(self.node_count(), edges.iter().copied(), self.features.clone())?;
        g.node_labels = self.node_labels.clone();
        g.graph_label = self.graph_label;
        Ok(g)
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        let mut feats = Matrix::zeros(n, self.feature_dim());
        for (v, &p) in perm.iter().enumerate() {
            feats.row_mut(p).copy_from_slice(self.features.row(v));
        }
        let edges = self.edges().iter().map(|&(a, b)| (perm[a], perm[b]));
        let mut g = Graph::new(n, edges, feats)?;
        if let Some(labels) = &self.node_labels {
            let mut l = vec![0; n];
            for v in 0..n {
                l[perm[v]] = labels[v];
            }
            g.node_labels = Some(l);
        }
        g.graph_label = self.graph_label;
        Ok(g)
    }
}

/// `D^{-1/2}(A + I)D^{-1/2}` with `D` the degree matrix of `A + I`, dense.
pub fn normalize_adjacency<T: Scalar>(g: &Graph<T>) -> Matrix<T> {
    let n = g.node_count();
    let inv: Vec<T> = (0..n)
        .map(|v| T::of_usize(g.degree(v) + 1).sqrt().recip())
        .collect();
    let mut a = Matrix::zeros(n, n);
    for v in 0..n {
        a[(v, v)] = inv[v] * inv[v];
    }
    for &(i, j) in g.edges() {
        let w = inv[i] * inv[j];
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    a
}

/// Local/global id translation for an extracted subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeMap {
    /// Global id of each local node, ascending.
    pub global: Vec<usize>,
    /// Local id of the extraction center.
    pub center: usize,
}

impl NodeMap {
    pub fn to_global(&self, local: usize) -> usize {
        self.global[local]
    }

    pub fn to_local(&self, global: usize) -> Option<usize> {
        self.global.binary_search(&global).ok()
    }

    pub fn edge_to_global(&self, (a, b): Edge) -> Edge {
        let (x, y) = (self.global[a], self.global[b]);
        (x.min(y), x.max(y))
    }
}

/// Induced subgraph on every node within `hops` edges of `center`.
///
/// Local ids preserve the global order, so neighbor iteration order (and
/// therefore floating point summation order) matches the parent graph.
pub fn khop_subgraph<T: Scalar>(
    g: &Graph<T>,
    center: usize,
    hops: usize,
) -> Result<(Graph<T>, NodeMap)> {
    let n = g.node_count();
    if center >= n {
        return Err(Error::InvalidArgument(format!(
            "center {center} out of range for {n} nodes"
        )));
    }
    if hops == 0 {
        return Err(Error::InvalidArgument("hops must be >= 1".into()));
    }
    let mut dist = vec![usize::MAX; n];
    dist[center] = 0;
    let mut queue = VecDeque::from([center]);
    while let Some(v) = queue.pop_front() {
        if dist[v] == hops {
            continue;
        }
        for u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let global: Vec<usize> = (0..n).filter(|&v| dist[v] != usize::MAX).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in global.iter().enumerate() {
        local[v] = i;
    }
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
        .map(|&(a, b)| (local[a], local[b]))
        .collect();
    let mut feats = Matrix::zeros(global.len(), g.feature_dim());
    for (i, &v) in global.iter().enumerate() {
        feats.row_mut(i).copy_from_slice(g.features().row(v));
    }
    let mut sub = Graph::new(global.len(), edges, feats)?;
    if let Some(labels) = g.node_labels() {
        sub.node_labels = Some(global.iter().map(|&v| labels[v]).collect());
    }
    sub.graph_label = g.graph_label();
    let map = NodeMap {
        center: local[center],
        global,
    };
    Ok((sub, map))
}

/// Symmetric edge-importance matrix with entries in `[0, 1]`, stored
/// sparsely as one value per undirected pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<T> {
    n: usize,
    entries: Vec<(Edge, T)>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        WeightMatrix {
            n,
            entries: Vec::new(),
        }
    }

    /// One weight per edge of `g`, in `g.edges()` order.
    pub fn from_edge_weights(g: &Graph<T>, weights: &[T]) -> Result<Self> {
        if weights.len() != g.edge_count() {
            return Err(Error::shape("weights", (weights.len(), 1), (g.edge_count(), 1)));
        }
        Self::from_entries(
            g.node_count(),
            g.edges().iter().copied().zip(weights.iter().copied()).collect(),
        )
    }

    /// Arbitrary `(i, j, w)` entries; orientation is normalized and the
    /// result is symmetric. Duplicate pairs are rejected.
    pub fn from_entries(n: usize, entries: Vec<(Edge, T)>) -> Result<Self> {
        let mut out = Vec::with_capacity(entries.len());
        for ((a, b), w) in entries {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidArgument(format!("weight at invalid pair ({a}, {b})")));
            }
            if !(w >= T::zero() && w <= T::one()) {
                return Err(Error::InvalidArgument(format!("weight {w} at ({a}, {b}) outside [0, 1]")));
            }
            out.push(((a.min(b), a.max(b)), w));
        }
        out.sort_by_key(|x| x.0);
        if out.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidArgument("duplicate weight entries".into()));
        }
        Ok(WeightMatrix { n, entries: out })
    }

    /// Rejects asymmetric input, nonzero diagonals and values outside `[0, 1]`.
    pub fn from_dense(m: &Matrix<T>) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::shape("weight matrix", m.shape(), (n, n)));
        }
        let mut entries = Vec::new();
        for i in 0..n {
            if m[(i, i)] != T::zero() {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in i + 1..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({i}, {j})")));
                }
                if m[(i, j)] != T::zero() {
                    entries.push(((i, j), m[(i, j)]));
                }
            }
        }
        Self::from_entries(n, entries)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        let key = (a.min(b), a.max(b));
        self.entries
            .binary_search_by(|e| e.0.cmp(&key))
            .map_or(T::zero(), |i| self.entries[i].1)
    }

    /// Stored `(pair, weight)` entries, zero weights included.
    pub fn entries(&self) -> &[(Edge, T)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n, self.n);
        for &((a, b), w) in &self.entries {
            m[(a, b)] = w;
            m[(b, a)] = w;
        }
        m
    }

    /// Pairs with nonzero weight that are not edges of `g`.
    pub fn support_violations(&self, g: &Graph<T>) -> Vec<Edge> {
        self.entries
            .iter()
            .filter(|&&((a, b), w)| w != T::zero() && !g.has_edge(a, b))
            .map(|&(e, _)| e)
            .collect()
    }

    /// Weights aligned with `g.edges()`; errors on a support violation.
    pub fn edge_weights(&self, g: &Graph<T>) -> Result<Vec<T>> {
        if self.n != g.node_count() {
            return Err(Error::shape("mask", (self.n, self.n), (g.node_count(), g.node_count())));
        }
        if let Some(&(a, b)) = self.support_violations(g).first() {
            return Err(Error::SupportViolation(a, b));
        }
        let mut out = vec![T::zero(); g.edge_count()];
        for &((a, b), w) in &self.entries {
            if let Some(e) = g.topology().edge_id(a, b) {
                out[e] = w;
            }
        }
        Ok(out)
    }
}

/// Weighted (or top-K binary) explanation subgraph of an input graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Explanation<T> {
    topo: Arc<Topology>,
    weights: Vec<T>,
    edge_set: Vec<Edge>,
    target: Option<usize>,
}

impl<T: Scalar> Explanation<T> {
    /// Weight of each edge of the input graph, in edge-id order.
    pub fn edge_weights(&self) -> &[T] {
        &self.weights
    }

    /// Selected edges, ascending by `(lo, hi)`.
    pub fn edge_set(&self) -> &[Edge] {
        &self.edge_set
    }

    /// Explained node (node tasks), in the ids of the graph this
    /// explanation refers to.
    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn with_target(mut self, target: Option<usize>) -> Self {
        self.target = target;
        self
    }

    pub fn node_count(&self) -> usize {
        self.topo.node_count()
    }

    pub fn weighted_dense(&self) -> Matrix<T> {
        let n = self.topo.node_count();
        let mut m = Matrix::zeros(n, n);
        for (&(a, b), &w) in self.topo.edges().iter().zip(&self.weights) {
            m[(a, b)] = w;
            m[(b, a)] = w;
        }
        m
    }
}

/// `Exp = W ⊙ A`. Fails if `w` puts weight on a pair that is not an edge.
pub fn apply_mask<T: Scalar>(g: &Graph<T>, w: &WeightMatrix<T>) -> Result<Explanation<T>> {
    let weights = w.edge_weights(g)?;
    let edge_set = g
        .edges()
        .iter()
        .zip(&weights)
        .filter(|(_, &x)| x > T::zero())
        .map(|(&e, _)| e)
        .collect();
    Ok(Explanation {
        topo: Arc::clone(g.topology()),
        weights,
        edge_set,
        target: None,
    })
}

/// Keeps the `min(k, |E|)` heaviest edges with weight 1 and zeroes the rest.
/// Ties go to the lexicographically smaller `(lo, hi)` edge.
pub fn topk_edges<T: Scalar>(exp: &Explanation<T>, k: usize) -> Result<Explanation<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let mut order: Vec<usize> = (0..exp.weights.len()).collect();
    // edge ids are already in lexicographic order, so a stable sort on
    // weight alone implements the tie rule
    order.sort_by(|&a, &b| {
        exp.weights[b]
            .partial_cmp(&exp.weights[a])
            .unwrap_or(Ordering::Equal)
    });
    order.truncate(k);
    order.sort_unstable();
    let mut weights = vec![T::zero(); exp.weights.len()];
    for &e in &order {
        weights[e] = T::one();
    }
    let edges = exp.topo.edges();
    Ok(Explanation {
        topo: Arc::clone(&exp.topo),
        weights,
        edge_set: order.iter().map(|&e| edges[e]).collect(),
        target: exp.target,
    })
}
