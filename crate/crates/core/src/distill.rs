//! Ground-truth edge weights from single-edge deletion.
//!
//! Each edge is scored by how much deleting it raises the model's
//! cross-entropy against its own original prediction. Positive scores are
//! scaled so the most influential edge gets weight 1; the rest are zero.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{DatasetBundle, Part};
use crate::error::{Error, Result};
use crate::gnn::TargetModel;
use crate::graph::{Graph, WeightMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DistilledTarget<T> {
    pub instance_id: usize,
    /// Weights in the ids of the graph that was distilled (the computation
    /// subgraph for node tasks).
    pub weights: WeightMatrix<T>,
    /// Cross-entropy of the unmodified instance against its own prediction.
    pub origin_loss: T,
    /// Set when the model output is uniform, so nothing can be attributed.
    pub degenerate: bool,
}

/// Scores every edge of `g` by deletion. `target` is the explained node for
/// node models. The returned `instance_id` is `target` or 0; [`distill_all`]
/// fills in bundle ids.
pub fn distill<T: Scalar>(model: &TargetModel<T>, g: &Graph<T>, target: Option<usize>) -> Result<DistilledTarget<T>> {
    let deltas = deletion_deltas(model, g, target)?;
    let n = g.node_count();
    let instance_id = target.unwrap_or(0);
    let Some((origin_loss, deltas)) = deltas else {
        log::warn!("uniform model output on instance {instance_id}; distilled target is empty");
        return Ok(DistilledTarget {
            instance_id,
            weights: WeightMatrix::zeros(n),
            origin_loss: T::of_usize(model.class_count()).ln(),
            degenerate: true,
        });
    };
    let top = deltas.iter().fold(T::zero(), |m, &d| m.max(d));
    let weights: Vec<T> = if top > T::zero() {
        deltas.iter().map(|&d| d.max(T::zero()) / top).collect()
    } else {
        vec![T::zero(); deltas.len()]
    };
    Ok(DistilledTarget {
        instance_id,
        weights: WeightMatrix::from_edge_weights(g, &weights)?,
        origin_loss,
        degenerate: false,
    })
}

/// `loss(g \ e) - loss(g)` per edge, with the loss taken against the
/// original argmax. `None` when the output row is uniform.
pub fn deletion_deltas<T: Scalar>(
    model: &TargetModel<T>,
    g: &Graph<T>,
    target: Option<usize>,
) -> Result<Option<(T, Vec<T>)>> {
    let row = model.output_row(target)?;
    let probs = model.forward_edges(g, None)?;
    let out = probs.row(row);
    let lo = out.iter().fold(T::infinity(), |m, &x| m.min(x));
    let hi = out.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    if hi - lo <= T::of(1e-12) {
        return Ok(None);
    }
    let class = probs.argmax_row(row);
    let ce = |p: T| -p.max(T::min_positive_value()).ln();
    let base = ce(out[class]);
    let mut w = vec![T::one(); g.edge_count()];
    let mut deltas = Vec::with_capacity(w.len());
    for e in 0..w.len() {
        w[e] = T::zero();
        let p = model.forward_edges(g, Some(&w))?;
        deltas.push(ce(p[(row, class)]) - base);
        w[e] = T::one();
    }
    Ok(Some((base, deltas)))
}

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    instance_id: usize,
    model_checksum: String,
    nodes: usize,
    origin_loss: f64,
    degenerate: bool,
    weights: Vec<(usize, usize, f64)>,
}

impl<T: Scalar> DistilledTarget<T> {
    fn to_doc(&self, checksum: &str) -> CacheDoc {
        CacheDoc {
            instance_id: self.instance_id,
            model_checksum: checksum.to_string(),
            nodes: self.weights.node_count(),
            origin_loss: self.origin_loss.as_f64(),
            degenerate: self.degenerate,
            weights: self
                .weights
                .entries()
                .iter()
                .map(|&((a, b), w)| (a, b, w.as_f64()))
                .collect(),
        }
    }

    fn from_doc(doc: CacheDoc) -> Result<Self> {
        let entries = doc.weights.iter().map(|&(a, b, w)| ((a, b), T::of(w))).collect();
        Ok(DistilledTarget {
            instance_id: doc.instance_id,
            weights: WeightMatrix::from_entries(doc.nodes, entries)?,
            origin_loss: T::of(doc.origin_loss),
            degenerate: doc.degenerate,
        })
    }
}

/// Where `distill_all` keeps instance `id` of `dataset`.
pub fn cache_path(dir: &Path, dataset: &str, id: usize) -> PathBuf {
    dir.join(dataset).join(format!("{id}.json"))
}

/// Distills every explained train and validation instance (motif nodes for
/// node tasks). With a cache directory, results are read back when the
/// stored model checksum matches and recomputed otherwise.
pub fn distill_all<T: Scalar>(
    model: &TargetModel<T>,
    bundle: &DatasetBundle<T>,
    cache_dir: Option<&Path>,
) -> Result<Vec<DistilledTarget<T>>> {
    let checksum = model.checksum()?;
    let mut ids = bundle.explain_instances(Part::Train)?;
    ids.extend(bundle.explain_instances(Part::Validation)?);
    let mut out = Vec::with_capacity(ids.len());
    let (mut hits, mut misses) = (0usize, 0usize);
    for id in ids {
        let path = cache_dir.map(|d| cache_path(d, &bundle.name, id));
        if let Some(t) = path.as_deref().and_then(|p| read_cached(p, &checksum, id)) {
            hits += 1;
            out.push(t);
            continue;
        }
        misses += 1;
        let inst = model.instance(bundle, id)?;
        let mut t = distill(model, &inst.graph, inst.target)?;
        t.instance_id = id;
        if let Some(p) = &path {
            write_atomic(p, &serde_json::to_string(&t.to_doc(&checksum))?)?;
        }
        out.push(t);
    }
    log::info!("distilled {} instances of {} ({hits} cached, {misses} computed)", out.len(), bundle.name);
    Ok(out)
}

fn read_cached<T: Scalar>(path: &Path, checksum: &str, id: usize) -> Option<DistilledTarget<T>> {
    let text = fs::read_to_string(path).ok()?;
    let doc: CacheDoc = serde_json::from_str(&text).ok()?;
    if doc.model_checksum != checksum || doc.instance_id != id {
        log::debug!("stale distillation cache at {}", path.display());
        return None;
    }
    DistilledTarget::from_doc(doc).ok()
}

/// Writes to a sibling temp file and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
