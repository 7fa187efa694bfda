//! The target model: a 3-layer GCN node classifier or a GCN graph
//! classifier with mean-pool readout, plus training and frozen inference.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autodiff::{softmax_rows, Adam, Matrix, Tape, Var};
use crate::datasets::{DatasetBundle, Part, Task};
use crate::error::{Error, Result};
use crate::graph::{khop_subgraph, Graph, NodeMap, WeightMatrix};
use crate::nn::{stack_from_docs, stack_to_docs, Dense, GcnStack, LayerDoc, Module};
use crate::scalar::Scalar;

pub const HIDDEN: usize = 20;
pub const DEPTH: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Node,
    Graph,
}

impl From<Task> for ModelKind {
    fn from(t: Task) -> Self {
        match t {
            Task::NodeClassification => ModelKind::Node,
            Task::GraphClassification => ModelKind::Graph,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetModel<T> {
    kind: ModelKind,
    convs: GcnStack<T>,
    readout: Option<Dense<T>>,
    class_count: usize,
}

impl<T: Scalar> TargetModel<T> {
    /// Node kind: convs `in -> 20 -> 20 -> classes`. Graph kind: convs
    /// `in -> 20 -> 20 -> 20`, mean pool, dense `20 -> classes`.
    pub fn new(kind: ModelKind, in_dim: usize, class_count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match kind {
            ModelKind::Node => TargetModel {
                kind,
                convs: GcnStack::new(&[in_dim, HIDDEN, HIDDEN, class_count], &mut rng),
                readout: None,
                class_count,
            },
            ModelKind::Graph => TargetModel {
                kind,
                convs: GcnStack::new(&[in_dim, HIDDEN, HIDDEN, HIDDEN], &mut rng),
                readout: Some(Dense::new(HIDDEN, class_count, &mut rng)),
                class_count,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn in_dim(&self) -> usize {
        self.convs.in_dim()
    }

    /// Number of graph convolutions.
    pub fn depth(&self) -> usize {
        self.convs.depth()
    }

    /// Raw class scores on `tape`: `n x C` for node models, `1 x C` for
    /// graph models. `p` comes from [`Module::bind`].
    pub fn logits_on(
        &self,
        tape: &mut Tape<T>,
        p: &[Var],
        g: &Graph<T>,
        x: Var,
        edge_weights: Var,
    ) -> Result<Var> {
        let (rows, cols) = tape.shape(x);
        if cols != self.in_dim() || rows != g.node_count() {
            return Err(Error::shape("target forward", (rows, cols), (g.node_count(), self.in_dim())));
        }
        let nconv = 2 * self.convs.depth();
        match &self.readout {
            None => self.convs.forward(tape, &p[..nconv], x, edge_weights, g.topology(), false),
            Some(_) => {
                let h = self.convs.forward(tape, &p[..nconv], x, edge_weights, g.topology(), true)?;
                let pooled = tape.mean_rows(h)?;
                Dense::forward(tape, &p[nconv..], pooled)
            }
        }
    }

    /// Class probabilities with optional per-edge weights (aligned with
    /// `g.edges()`; `None` means all ones).
    pub fn forward_edges(&self, g: &Graph<T>, edge_weights: Option<&[T]>) -> Result<Matrix<T>> {
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, false);
        let w = match edge_weights {
            Some(w) if w.len() != g.edge_count() => {
                return Err(Error::shape("mask", (w.len(), 1), (g.edge_count(), 1)))
            }
            Some(w) => Matrix::from_vec(w.len(), 1, w.to_vec())?,
            None => Matrix::filled(g.edge_count(), 1, T::one()),
        };
        let w = tape.constant(w);
        let x = tape.constant(g.features().clone());
        let logits = self.logits_on(&mut tape, &p, g, x, w)?;
        Ok(softmax_rows(tape.value(logits)))
    }

    /// Class probabilities; a mask scales messages along each edge before
    /// renormalization.
    pub fn forward(&self, g: &Graph<T>, mask: Option<&WeightMatrix<T>>) -> Result<Matrix<T>> {
        match mask {
            Some(m) => self.forward_edges(g, Some(&m.edge_weights(g)?)),
            None => self.forward_edges(g, None),
        }
    }

    /// Argmax class of node `target` (node models) or of the graph.
    pub fn predict(&self, g: &Graph<T>, mask: Option<&WeightMatrix<T>>, target: Option<usize>) -> Result<usize> {
        let probs = self.forward(g, mask)?;
        Ok(probs.argmax_row(self.output_row(target)?))
    }

    pub fn predict_edges(&self, g: &Graph<T>, edge_weights: Option<&[T]>, target: Option<usize>) -> Result<usize> {
        let probs = self.forward_edges(g, edge_weights)?;
        Ok(probs.argmax_row(self.output_row(target)?))
    }

    pub(crate) fn output_row(&self, target: Option<usize>) -> Result<usize> {
        match (self.kind, target) {
            (ModelKind::Node, Some(v)) => Ok(v),
            (ModelKind::Node, None) => Err(Error::InvalidArgument("node model needs a target node".into())),
            (ModelKind::Graph, _) => Ok(0),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub(crate) fn to_doc(&self) -> ModelDoc {
        ModelDoc {
            kind: self.kind,
            class_count: self.class_count,
            layers: stack_to_docs(&self.convs),
            readout: self.readout.as_ref().map(LayerDoc::from_dense),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(s)?;
        let convs = stack_from_docs(&doc.layers)?;
        let readout = doc.readout.as_ref().map(LayerDoc::to_dense).transpose()?;
        let out = readout.as_ref().map_or(convs.out_dim(), |r| r.fan_out());
        if out != doc.class_count || (doc.kind == ModelKind::Graph) != readout.is_some() {
            return Err(Error::InvalidArgument("checkpoint layout does not match its kind".into()));
        }
        Ok(TargetModel {
            kind: doc.kind,
            convs,
            readout,
            class_count: doc.class_count,
        })
    }

    /// SHA-256 of the checkpoint JSON.
    pub fn checksum(&self) -> Result<String> {
        Ok(sha256_hex(self.to_json()?.as_bytes()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// One unit of explanation: the graph the model sees for it, plus the
/// output row to read.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    /// Node id (node tasks) or graph id (graph tasks) in the bundle.
    pub id: usize,
    pub graph: Graph<T>,
    /// Local id of the explained node; `None` for graph tasks.
    pub target: Option<usize>,
    /// Local-to-global ids for node tasks.
    pub map: Option<NodeMap>,
}

impl<T: Scalar> TargetModel<T> {
    /// Hops kept around an explained node. One more than the number of
    /// convolutions: the extra ring fixes the normalization degrees of the
    /// outermost nodes, so the prediction on the subgraph equals the
    /// prediction on the whole graph.
    pub fn computation_hops(&self) -> usize {
        self.depth() + 1
    }

    /// Computation subgraph of node `v` (node models) or the whole graph
    /// `id` (graph models).
    pub fn instance(&self, bundle: &DatasetBundle<T>, id: usize) -> Result<Instance<T>> {
        match self.kind {
            ModelKind::Node => {
                let g = bundle
                    .graphs
                    .first()
                    .ok_or_else(|| Error::InvalidArgument("node dataset has no graph".into()))?;
                let (graph, map) = khop_subgraph(g, id, self.computation_hops())?;
                Ok(Instance {
                    id,
                    graph,
                    target: Some(map.center),
                    map: Some(map),
                })
            }
            ModelKind::Graph => {
                let graph = bundle.graphs.get(id).cloned().ok_or_else(|| {
                    Error::InvalidArgument(format!("graph {id} out of range for {}", bundle.graphs.len()))
                })?;
                Ok(Instance {
                    id,
                    graph,
                    target: None,
                    map: None,
                })
            }
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Checkpoint layout shared with the explainer's networks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct ModelDoc {
    pub kind: ModelKind,
    pub class_count: usize,
    pub layers: Vec<LayerDoc>,
    pub readout: Option<LayerDoc>,
}

impl<T: Scalar> Module<T> for TargetModel<T> {
    fn params(&self) -> Vec<&Matrix<T>> {
        let mut p = self.convs.params();
        if let Some(r) = &self.readout {
            p.extend(r.params());
        }
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut p = self.convs.params_mut();
        if let Some(r) = &mut self.readout {
            p.extend(r.params_mut());
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub weight_decay: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Graphs per optimizer step (graph tasks only).
    pub batch_size: usize,
    /// Fresh initializations to try when training stalls at the label
    /// prior (see [`train_target`]).
    #[serde(default)]
    pub restarts: usize,
}

impl TrainConfig {
    pub fn for_task(task: Task) -> Self {
        match task {
            // constant-feature node tasks converge slowly at this rate
            Task::NodeClassification => TrainConfig {
                epochs: 10000,
                lr: 1e-3,
                seed: 0,
                weight_decay: 0.0,
                patience: 2000,
                batch_size: 1,
                restarts: 4,
            },
            Task::GraphClassification => TrainConfig {
                epochs: 100,
                lr: 1e-3,
                seed: 0,
                weight_decay: 0.0,
                patience: 20,
                batch_size: 32,
                restarts: 2,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub epochs_run: usize,
    pub final_train_loss: f64,
    /// Seed of the initialization that was kept.
    pub init_seed: u64,
    /// Number of initializations tried.
    pub attempts: usize,
}

/// Trains with softmax cross-entropy on the train split and returns the
/// parameters with the best validation accuracy (first best wins).
///
/// With ReLU units and near-constant inputs a run can lock into predicting
/// the label prior. When the final training loss is still above
/// `PLATEAU` times the prior's entropy, training restarts from the initialization seeded by
/// `seed + attempt`, up to `cfg.restarts` times; the run with the best
/// validation accuracy is kept.
pub fn train_target<T: Scalar>(
    bundle: &DatasetBundle<T>,
    cfg: &TrainConfig,
) -> Result<(TargetModel<T>, TrainReport)> {
    if cfg.epochs == 0 || !(cfg.lr > 0.0) {
        return Err(Error::InvalidArgument("epochs must be >= 1 and lr > 0".into()));
    }
    let prior = prior_entropy(bundle)?;
    let mut kept: Option<(TargetModel<T>, TrainReport)> = None;
    for attempt in 0..=cfg.restarts {
        let seed = cfg.seed.wrapping_add(attempt as u64);
        let (model, mut report) = train_attempt(bundle, cfg, seed, prior)?;
        report.attempts = attempt + 1;
        let stalled = prior > 0.01 && report.final_train_loss > PLATEAU * prior;
        if stalled {
            log::warn!("training from seed {seed} stalled at loss {:.4} (prior {prior:.4})", report.final_train_loss);
        }
        if kept.as_ref().is_none_or(|k| report.best_val_accuracy > k.1.best_val_accuracy) {
            kept = Some((model, report));
        }
        if !stalled {
            break;
        }
    }
    let (model, mut report) = kept.expect("at least one attempt");
    report.attempts = report.attempts.max(1);
    Ok((model, report))
}

/// Loss fraction of the prior entropy below which a run counts as having
/// left the prior plateau. Early stopping is suspended until then.
const PLATEAU: f64 = 0.8;

/// Cross-entropy of always predicting the train label frequencies.
fn prior_entropy<T: Scalar>(bundle: &DatasetBundle<T>) -> Result<f64> {
    let train = &bundle.split()?.train;
    let mut counts = vec![0usize; bundle.class_count];
    for &i in train {
        if let Some(l) = bundle.label(i).filter(|&l| l < counts.len()) {
            counts[l] += 1;
        }
    }
    let n = train.len().max(1) as f64;
    Ok(counts.iter().filter(|&&c| c > 0).map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum())
}

fn train_attempt<T: Scalar>(
    bundle: &DatasetBundle<T>,
    cfg: &TrainConfig,
    seed: u64,
    prior: f64,
) -> Result<(TargetModel<T>, TrainReport)> {
    let split = bundle.split()?;
    let in_dim = bundle.graphs.first().map_or(0, Graph::feature_dim);
    let mut model = TargetModel::new(bundle.task.into(), in_dim, bundle.class_count, seed);
    let mut adam = Adam::with_lr(T::of(cfg.lr))?.weight_decay(T::of(cfg.weight_decay));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);

    let mut best = (model.clone(), -1.0f64, 0usize);
    let mut last_loss = f64::NAN;
    let mut epochs_run = 0;
    for epoch in 0..cfg.epochs {
        epochs_run = epoch + 1;
        let val_acc = match bundle.task {
            Task::NodeClassification => {
                let g = &bundle.graphs[0];
                let labels = g.node_labels().ok_or_else(|| Error::InvalidArgument("node labels missing".into()))?;
                let mut tape = Tape::new();
                let p = model.bind(&mut tape, true);
                let w = tape.constant(Matrix::filled(g.edge_count(), 1, T::one()));
                let x = tape.constant(g.features().clone());
                let logits = model.logits_on(&mut tape, &p, g, x, w)?;
                let ys: Vec<usize> = split.train.iter().map(|&v| labels[v]).collect();
                let loss = tape.softmax_cross_entropy(logits, &split.train, &ys)?;
                last_loss = tape.value(loss).item().as_f64();
                if !last_loss.is_finite() {
                    return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
                }
                // accuracy of the parameters that produced these logits
                let lv = tape.value(logits);
                let acc = accuracy(split.validation.iter().map(|&v| (lv.argmax_row(v), labels[v])));
                if acc > best.1 {
                    best = (model.clone(), acc, epoch);
                }
                let grads = tape.backward(loss)?;
                let gs: Vec<Matrix<T>> = p.iter().map(|&v| grads.get(v).cloned().expect("param grad")).collect();
                adam.step(&mut model.params_mut(), &gs)?;
                acc
            }
            Task::GraphClassification => {
                let acc = graph_accuracy(&model, bundle, Part::Validation)?;
                if acc > best.1 {
                    best = (model.clone(), acc, epoch);
                }
                let mut order = split.train.clone();
                order.shuffle(&mut rng);
                let mut total = 0.0;
                for batch in order.chunks(cfg.batch_size.max(1)) {
                    let mut sum: Option<Vec<Matrix<T>>> = None;
                    for &gi in batch {
                        let g = &bundle.graphs[gi];
                        let y = g.graph_label().ok_or_else(|| Error::InvalidArgument(format!("graph {gi} unlabeled")))?;
                        let mut tape = Tape::new();
                        let p = model.bind(&mut tape, true);
                        let w = tape.constant(Matrix::filled(g.edge_count(), 1, T::one()));
                        let x = tape.constant(g.features().clone());
                        let logits = model.logits_on(&mut tape, &p, g, x, w)?;
                        let loss = tape.softmax_cross_entropy(logits, &[0], &[y])?;
                        total += tape.value(loss).item().as_f64();
                        let grads = tape.backward(loss)?;
                        let gs: Vec<Matrix<T>> = p.iter().map(|&v| grads.get_or_zeros(v, tape.shape(v))).collect();
                        match &mut sum {
                            None => sum = Some(gs),
                            Some(acc) => acc.iter_mut().zip(&gs).for_each(|(a, g)| a.add_assign(g)),
                        }
                    }
                    let inv = T::one() / T::of_usize(batch.len());
                    let gs: Vec<Matrix<T>> = sum.unwrap_or_default().iter().map(|m| m.map(|x| x * inv)).collect();
                    adam.step(&mut model.params_mut(), &gs)?;
                }
                last_loss = total / split.train.len().max(1) as f64;
                if !last_loss.is_finite() {
                    return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
                }
                acc
            }
        };
        log::debug!("epoch {epoch}: loss {last_loss:.5} val acc {val_acc:.4}");
        // patience only runs once the loss has left the prior plateau
        if last_loss < PLATEAU * prior && epoch - best.2 >= cfg.patience {
            break;
        }
    }
    let report = TrainReport {
        best_epoch: best.2,
        best_val_accuracy: best.1,
        epochs_run,
        final_train_loss: last_loss,
        init_seed: seed,
        attempts: 1,
    };
    Ok((best.0, report))
}

fn accuracy(pairs: impl Iterator<Item = (usize, usize)>) -> f64 {
    let (mut hit, mut n) = (0usize, 0usize);
    for (p, y) in pairs {
        hit += usize::from(p == y);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        hit as f64 / n as f64
    }
}

fn graph_accuracy<T: Scalar>(model: &TargetModel<T>, bundle: &DatasetBundle<T>, part: Part) -> Result<f64> {
    let ids = bundle.split()?.part(part);
    let mut pairs = Vec::with_capacity(ids.len());
    for &gi in ids {
        let g = &bundle.graphs[gi];
        pairs.push((model.predict_edges(g, None, None)?, g.graph_label().unwrap_or(usize::MAX)));
    }
    Ok(accuracy(pairs.into_iter()))
}

/// Fraction of `part` instances whose predicted class equals the label.
pub fn label_accuracy<T: Scalar>(model: &TargetModel<T>, bundle: &DatasetBundle<T>, part: Part) -> Result<f64> {
    match bundle.task {
        Task::NodeClassification => {
            let g = &bundle.graphs[0];
            let probs = model.forward_edges(g, None)?;
            let labels = g.node_labels().ok_or_else(|| Error::InvalidArgument("node labels missing".into()))?;
            Ok(accuracy(bundle.split()?.part(part).iter().map(|&v| (probs.argmax_row(v), labels[v]))))
        }
        Task::GraphClassification => graph_accuracy(model, bundle, part),
    }
}
