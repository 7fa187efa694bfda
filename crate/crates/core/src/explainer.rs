//! Adversarial explainer: a GCN encoder with a dense edge decoder that
//! emits edge-weight masks, a GCN discriminator that tells input graphs from
//! masked ones, and the fidelity-augmented generator objective.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{sigmoid, Adam, Matrix, Tape, Var};
use crate::datasets::{DatasetBundle, Part};
use crate::distill::DistilledTarget;
use crate::error::{Error, Result};
use crate::gnn::{Instance, TargetModel};
use crate::graph::{apply_mask, topk_edges, Edge, Explanation, Graph, NodeMap, WeightMatrix};
use crate::nn::{stack_from_docs, stack_to_docs, Dense, GcnStack, LayerDoc, Module};
use crate::scalar::Scalar;

pub const EMBED: usize = 20;
pub const DISC_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainerConfig {
    /// Weight of the fidelity term.
    pub lambda: f64,
    pub epochs: usize,
    pub gen_lr: f64,
    pub disc_lr: f64,
    pub seed: u64,
    pub encoder_depth: usize,
    /// Discriminator updates per generator update.
    pub disc_steps: usize,
    /// Weight of the MSE pull towards the distilled weights.
    pub supervision_weight: f64,
    /// K values averaged for validation model selection.
    pub val_k: Vec<usize>,
}

impl ExplainerConfig {
    pub fn synthetic() -> Self {
        ExplainerConfig {
            lambda: 2.0,
            epochs: 300,
            gen_lr: 1e-3,
            disc_lr: 1e-3,
            seed: 0,
            encoder_depth: 6,
            disc_steps: 1,
            supervision_weight: 10.0,
            val_k: vec![6, 7, 8, 9, 10],
        }
    }

    pub fn real_world() -> Self {
        ExplainerConfig {
            lambda: 3.0,
            epochs: 100,
            encoder_depth: 7,
            val_k: vec![15, 20, 25, 30],
            ..Self::synthetic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.gen_lr > 0.0 && self.disc_lr > 0.0) {
            return Err(Error::Config("learning rates must be > 0".into()));
        }
        if self.encoder_depth == 0 {
            return Err(Error::Config("encoder depth must be >= 1".into()));
        }
        if self.val_k.is_empty() || self.val_k.contains(&0) {
            return Err(Error::Config("val_k must be a non-empty list of K >= 1".into()));
        }
        Ok(())
    }
}

/// Encoder-decoder mask generator.
///
/// Node inputs are the dataset features followed by a one-hot of the target
/// model's predicted class on every row.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator<T> {
    pub encoder: GcnStack<T>,
    pub hidden: Dense<T>,
    pub out: Dense<T>,
    feature_dim: usize,
    class_count: usize,
}

impl<T: Scalar> Generator<T> {
    pub fn new(
        feature_dim: usize,
        class_count: usize,
        depth: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let in_dim = feature_dim + class_count;
        let mut widths = vec![in_dim];
        widths.extend(std::iter::repeat_n(EMBED, depth.max(1)));
        Generator {
            encoder: GcnStack::new(&widths, rng),
            hidden: Dense::new(EMBED, EMBED, rng),
            out: Dense::new(EMBED, 1, rng),
            feature_dim,
            class_count,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    /// Encoder input for graph `g`.
    pub fn input(&self, g: &Graph<T>, predicted: usize) -> Result<Matrix<T>> {
        if g.feature_dim() != self.feature_dim {
            return Err(Error::shape("generator input", (g.node_count(), g.feature_dim()), (g.node_count(), self.feature_dim)));
        }
        if predicted >= self.class_count {
            return Err(Error::InvalidArgument(format!("class {predicted} out of range")));
        }
        let mut x = Matrix::zeros(g.node_count(), self.input_dim());
        for v in 0..g.node_count() {
            let row = x.row_mut(v);
            row[..self.feature_dim].copy_from_slice(g.features().row(v));
            row[self.feature_dim + predicted] = T::one();
        }
        Ok(x)
    }

    /// Per-edge weights (`E x 1`, aligned with `g.edges()`) on `tape`.
    /// The encoder runs on the unweighted normalized adjacency.
    pub fn weights_on(&self, tape: &mut Tape<T>, p: &[Var], g: &Graph<T>, x: Var) -> Result<Var> {
        let ne = 2 * self.encoder.depth();
        let ones = tape.constant(Matrix::filled(g.edge_count(), 1, T::one()));
        let z = self.encoder.forward(tape, &p[..ne], x, ones, g.topology(), false)?;
        let pairs = tape.edge_product(z, g.topology())?;
        let h = Dense::forward(tape, &p[ne..ne + 2], pairs)?;
        let h = tape.relu(h);
        let logit = Dense::forward(tape, &p[ne + 2..ne + 4], h)?;
        Ok(tape.sigmoid(logit))
    }

    pub fn edge_weights(&self, g: &Graph<T>, predicted: usize) -> Result<Vec<T>> {
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, false);
        let x = tape.constant(self.input(g, predicted)?);
        let w = self.weights_on(&mut tape, &p, g, x)?;
        Ok(tape.value(w).data().to_vec())
    }

    /// Mask for `g` given the target model's view of it. Products
    /// `z_i * z_j` are symmetric, so each undirected pair gets one value.
    pub fn generate(&self, model: &TargetModel<T>, g: &Graph<T>, target: Option<usize>) -> Result<WeightMatrix<T>> {
        let predicted = model.predict(g, None, target)?;
        let w = self.edge_weights(g, predicted)?;
        let wm = WeightMatrix::from_edge_weights(g, &w)?;
        debug_assert!(wm.support_violations(g).is_empty());
        Ok(wm)
    }
}

impl<T: Scalar> Module<T> for Generator<T> {
    fn params(&self) -> Vec<&Matrix<T>> {
        let mut p = self.encoder.params();
        p.extend(self.hidden.params());
        p.extend(self.out.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut p = self.encoder.params_mut();
        p.extend(self.hidden.params_mut());
        p.extend(self.out.params_mut());
        p
    }
}

/// Three graph convolutions, mean pooling and a sigmoid unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator<T> {
    pub convs: GcnStack<T>,
    pub out: Dense<T>,
}

impl<T: Scalar> Discriminator<T> {
    pub fn new(in_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut widths = vec![in_dim];
        widths.extend(std::iter::repeat_n(EMBED, DISC_DEPTH));
        Discriminator {
            convs: GcnStack::new(&widths, rng),
            out: Dense::new(EMBED, 1, rng),
        }
    }

    /// `1 x 1` logit of "real".
    pub fn logit_on(&self, tape: &mut Tape<T>, p: &[Var], g: &Graph<T>, x: Var, w: Var) -> Result<Var> {
        let nc = 2 * self.convs.depth();
        let h = self.convs.forward(tape, &p[..nc], x, w, g.topology(), true)?;
        let pooled = tape.mean_rows(h)?;
        Dense::forward(tape, &p[nc..], pooled)
    }

    /// Probability that `g` (binary when `weights` is `None`) is real.
    pub fn discriminate(&self, g: &Graph<T>, weights: Option<&WeightMatrix<T>>) -> Result<T> {
        let w = match weights {
            Some(m) => m.edge_weights(g)?,
            None => vec![T::one(); g.edge_count()],
        };
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, false);
        let x = tape.constant(g.features().clone());
        let w = tape.constant(Matrix::from_vec(w.len(), 1, w)?);
        let l = self.logit_on(&mut tape, &p, g, x, w)?;
        Ok(sigmoid(tape.value(l).item()))
    }
}

impl<T: Scalar> Module<T> for Discriminator<T> {
    fn params(&self) -> Vec<&Matrix<T>> {
        let mut p = self.convs.params();
        p.extend(self.out.params());
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut p = self.convs.params_mut();
        p.extend(self.out.params_mut());
        p
    }
}

fn ln_clamped<T: Scalar>(x: T) -> T {
    x.max(T::min_positive_value()).ln()
}

fn mean_of<T: Scalar>(xs: impl ExactSizeIterator<Item = T>) -> T {
    let n = xs.len();
    if n == 0 {
        return T::zero();
    }
    xs.sum::<T>() / T::of_usize(n)
}

/// `-mean(log d_real) - mean(log(1 - d_fake))`.
pub fn discriminator_loss<T: Scalar>(d_real: &[T], d_fake: &[T]) -> T {
    -mean_of(d_real.iter().map(|&d| ln_clamped(d))) - mean_of(d_fake.iter().map(|&d| ln_clamped(T::one() - d)))
}

/// `mean(log(1 - d_fake)) + lambda * mean_i MSE(f_orig_i, f_masked_i)`.
pub fn generator_loss<T: Scalar>(d_fake: &[T], f_orig: &[Matrix<T>], f_masked: &[Matrix<T>], lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
    }
    if f_orig.len() != f_masked.len() {
        return Err(Error::shape("generator_loss", (f_orig.len(), 1), (f_masked.len(), 1)));
    }
    let mut fid = Vec::with_capacity(f_orig.len());
    for (a, b) in f_orig.iter().zip(f_masked) {
        if a.shape() != b.shape() {
            return Err(Error::shape("generator_loss", a.shape(), b.shape()));
        }
        let n = T::of_usize(a.data().len().max(1));
        fid.push(a.data().iter().zip(b.data()).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>() / n);
    }
    let adv = mean_of(d_fake.iter().map(|&d| ln_clamped(T::one() - d)));
    Ok(adv + lambda * mean_of(fid.into_iter()))
}

/// Everything the training loop needs about one instance, computed once.
#[derive(Clone, Debug)]
pub struct Prepared<T> {
    pub instance: Instance<T>,
    pub predicted: usize,
    /// Encoder input.
    pub x_gen: Matrix<T>,
    /// Target model probabilities on the unmasked instance.
    pub f_orig: Matrix<T>,
    /// Distilled weights aligned with the instance's edges.
    pub distilled: Option<Matrix<T>>,
}

impl<T: Scalar> Prepared<T> {
    pub fn new(
        gen: &Generator<T>,
        model: &TargetModel<T>,
        instance: Instance<T>,
        distilled: Option<&DistilledTarget<T>>,
    ) -> Result<Self> {
        let g = &instance.graph;
        let f_orig = model.forward_edges(g, None)?;
        let predicted = f_orig.argmax_row(model.output_row(instance.target)?);
        let x_gen = gen.input(g, predicted)?;
        let distilled = match distilled {
            Some(d) => {
                let w = d.weights.edge_weights(g)?;
                Some(Matrix::from_vec(w.len(), 1, w)?)
            }
            None => None,
        };
        Ok(Prepared {
            instance,
            predicted,
            x_gen,
            f_orig,
            distilled,
        })
    }
}

/// Builds the full generator objective for one instance on `tape`:
/// `log(1 - D(G)) + lambda * MSE(f(g), f(W * A)) + s * MSE(W, distilled)`.
/// `gen_p` are the generator's bound parameters; the discriminator and the
/// target model enter as constants.
#[allow(clippy::too_many_arguments)]
pub fn generator_objective<T: Scalar>(
    tape: &mut Tape<T>,
    gen: &Generator<T>,
    gen_p: &[Var],
    disc: &Discriminator<T>,
    model: &TargetModel<T>,
    item: &Prepared<T>,
    lambda: T,
    supervision_weight: T,
) -> Result<(Var, Var)> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
    }
    let g = &item.instance.graph;
    let x = tape.constant(item.x_gen.clone());
    let w = gen.weights_on(tape, gen_p, g, x)?;

    let dp = disc.bind(tape, false);
    let xd = tape.constant(g.features().clone());
    let d_logit = disc.logit_on(tape, &dp, g, xd, w)?;
    let neg = tape.scale(d_logit, -T::one());
    let adv = tape.log_sigmoid(neg);

    let mp = model.bind(tape, false);
    let xm = tape.constant(g.features().clone());
    let logits = model.logits_on(tape, &mp, g, xm, w)?;
    let probs = tape.softmax(logits);
    let orig = tape.constant(item.f_orig.clone());
    let fid = tape.mse(probs, orig)?;
    let fid = tape.scale(fid, lambda);
    let mut loss = tape.add(adv, fid)?;

    if let Some(d) = &item.distilled {
        if supervision_weight > T::zero() {
            let target = tape.constant(d.clone());
            let sup = tape.mse(w, target)?;
            let sup = tape.scale(sup, supervision_weight);
            loss = tape.add(loss, sup)?;
        }
    }
    Ok((loss, w))
}

fn discriminator_step_loss<T: Scalar>(
    tape: &mut Tape<T>,
    disc: &Discriminator<T>,
    dp: &[Var],
    g: &Graph<T>,
    fake_w: Matrix<T>,
) -> Result<Var> {
    let x = tape.constant(g.features().clone());
    let ones = tape.constant(Matrix::filled(g.edge_count(), 1, T::one()));
    let real = disc.logit_on(tape, dp, g, x, ones)?;
    let fw = tape.constant(fake_w);
    let fake = disc.logit_on(tape, dp, g, x, fw)?;
    // -log D(real) - log(1 - D(fake))
    let lr = tape.log_sigmoid(real);
    let nf = tape.scale(fake, -T::one());
    let lf = tape.log_sigmoid(nf);
    let s = tape.add(lr, lf)?;
    Ok(tape.scale(s, -T::one()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Training means; `None` for the untrained row.
    pub disc_loss: Option<f64>,
    pub gen_loss: Option<f64>,
    pub fidelity: Option<f64>,
    pub supervision: Option<f64>,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainerReport {
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    /// Row 0 is the untrained generator.
    pub history: Vec<EpochStats>,
    pub mean_d_real: f64,
    pub mean_d_fake: f64,
}

#[derive(Clone, Debug)]
pub struct TrainedExplainer<T> {
    pub generator: Generator<T>,
    pub discriminator: Discriminator<T>,
    pub report: ExplainerReport,
}

/// Alternating adversarial training over the explained train instances.
/// Each instance gets `disc_steps` discriminator updates and one generator
/// update. The generator with the best mean validation explanation accuracy
/// over `cfg.val_k` is returned (the untrained one included; first best
/// wins).
pub fn train_explainer<T: Scalar>(
    bundle: &DatasetBundle<T>,
    model: &TargetModel<T>,
    targets: &[DistilledTarget<T>],
    cfg: &ExplainerConfig,
) -> Result<TrainedExplainer<T>> {
    cfg.validate()?;
    let train_ids = bundle.explain_instances(Part::Train)?;
    let by_id: HashMap<usize, &DistilledTarget<T>> = targets.iter().map(|t| (t.instance_id, t)).collect();
    let missing: Vec<usize> = train_ids.iter().copied().filter(|i| !by_id.contains_key(i)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingTargets(missing));
    }
    let feature_dim = bundle.graphs.first().map_or(0, Graph::feature_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gen = Generator::new(feature_dim, model.class_count(), cfg.encoder_depth, &mut rng);
    let mut disc = Discriminator::new(feature_dim, &mut rng);

    let train: Vec<Prepared<T>> = train_ids
        .iter()
        .map(|&id| Prepared::new(&gen, model, model.instance(bundle, id)?, Some(by_id[&id])))
        .collect::<Result<_>>()?;
    let val: Vec<Prepared<T>> = bundle
        .explain_instances(Part::Validation)?
        .into_iter()
        .map(|id| Prepared::new(&gen, model, model.instance(bundle, id)?, None))
        .collect::<Result<_>>()?;

    let mut gen_opt = Adam::with_lr(T::of(cfg.gen_lr))?;
    let mut disc_opt = Adam::with_lr(T::of(cfg.disc_lr))?;
    let lambda = T::of(cfg.lambda);
    let sup = T::of(cfg.supervision_weight);

    let acc0 = validation_accuracy(&gen, model, &val, &cfg.val_k)?;
    let mut history = vec![EpochStats {
        epoch: 0,
        disc_loss: None,
        gen_loss: None,
        fidelity: None,
        supervision: None,
        val_accuracy: acc0,
    }];
    let mut best = (gen.clone(), disc.clone(), acc0, 0usize);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut dsum, mut gsum, mut fsum, mut ssum) = (0.0, 0.0, 0.0, 0.0);
        for &i in &order {
            let item = &train[i];
            let g = &item.instance.graph;
            let fake = Matrix::from_vec(g.edge_count(), 1, gen.edge_weights(g, item.predicted)?)?;
            for _ in 0..cfg.disc_steps {
                let mut tape = Tape::new();
                let dp = disc.bind(&mut tape, true);
                let loss = discriminator_step_loss(&mut tape, &disc, &dp, g, fake.clone())?;
                let lv = tape.value(loss).item().as_f64();
                if !lv.is_finite() {
                    return Err(Error::NonFinite(format!("discriminator loss at epoch {epoch}")));
                }
                dsum += lv;
                let grads = tape.backward(loss)?;
                let gs: Vec<Matrix<T>> = dp.iter().map(|&v| grads.get_or_zeros(v, tape.shape(v))).collect();
                disc_opt.step(&mut disc.params_mut(), &gs)?;
            }

            let mut tape = Tape::new();
            let gp = gen.bind(&mut tape, true);
            let (loss, w) = generator_objective(&mut tape, &gen, &gp, &disc, model, item, lambda, sup)?;
            let lv = tape.value(loss).item().as_f64();
            if !lv.is_finite() {
                return Err(Error::NonFinite(format!("generator loss at epoch {epoch}")));
            }
            gsum += lv;
            if let Some(d) = &item.distilled {
                ssum += tape.value(w).zip_map(d, |a, b| (a - b) * (a - b)).sum().as_f64() / d.rows().max(1) as f64;
            }
            let grads = tape.backward(loss)?;
            let gs: Vec<Matrix<T>> = gp.iter().map(|&v| grads.get_or_zeros(v, tape.shape(v))).collect();
            gen_opt.step(&mut gen.params_mut(), &gs)?;
            fsum += masked_fidelity(model, item, tape.value(w).data())?;
        }
        let n = train.len().max(1) as f64;
        let val_accuracy = validation_accuracy(&gen, model, &val, &cfg.val_k)?;
        let stats = EpochStats {
            epoch,
            disc_loss: Some(dsum / (n * cfg.disc_steps.max(1) as f64)),
            gen_loss: Some(gsum / n),
            fidelity: Some(fsum / n),
            supervision: Some(ssum / n),
            val_accuracy,
        };
        log::debug!("{stats:?}");
        if val_accuracy > best.2 {
            best = (gen.clone(), disc.clone(), val_accuracy, epoch);
        }
        history.push(stats);
    }
    let (generator, discriminator, best_val_accuracy, best_epoch) = best;
    let (mut dr, mut df) = (Vec::new(), Vec::new());
    for item in &val {
        let g = &item.instance.graph;
        dr.push(discriminator.discriminate(g, None)?.as_f64());
        let w = WeightMatrix::from_edge_weights(g, &generator.edge_weights(g, item.predicted)?)?;
        df.push(discriminator.discriminate(g, Some(&w))?.as_f64());
    }
    log::info!(
        "explainer on {}: best epoch {best_epoch}, validation accuracy {best_val_accuracy:.4}",
        bundle.name
    );
    Ok(TrainedExplainer {
        generator,
        discriminator,
        report: ExplainerReport {
            best_epoch,
            best_val_accuracy,
            history,
            mean_d_real: mean_of(dr.into_iter()),
            mean_d_fake: mean_of(df.into_iter()),
        },
    })
}

/// Unweighted MSE between target-model outputs on the instance and on the
/// instance masked by `w`.
fn masked_fidelity<T: Scalar>(model: &TargetModel<T>, item: &Prepared<T>, w: &[T]) -> Result<f64> {
    let p = model.forward_edges(&item.instance.graph, Some(w))?;
    let n = p.data().len().max(1) as f64;
    Ok(p.zip_map(&item.f_orig, |a, b| (a - b) * (a - b)).sum().as_f64() / n)
}

/// Mean over `ks` of the fraction of instances whose top-K explanation
/// keeps the target model's prediction.
fn validation_accuracy<T: Scalar>(
    gen: &Generator<T>,
    model: &TargetModel<T>,
    items: &[Prepared<T>],
    ks: &[usize],
) -> Result<f64> {
    if items.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for item in items {
        let g = &item.instance.graph;
        let w = WeightMatrix::from_edge_weights(g, &gen.edge_weights(g, item.predicted)?)?;
        let exp = apply_mask(g, &w)?;
        for &k in ks {
            let top = topk_edges(&exp, k)?;
            if model.predict_edges(g, Some(top.edge_weights()), item.instance.target)? == item.predicted {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (items.len() * ks.len()) as f64)
}

/// A top-K explanation of one instance.
#[derive(Clone, Debug)]
pub struct InstanceExplanation<T> {
    pub instance: Instance<T>,
    /// Generator output on the instance graph.
    pub weights: WeightMatrix<T>,
    /// Binary top-K explanation in instance-local ids.
    pub explanation: Explanation<T>,
    /// `explanation.edge_set()` in the ids of the input graph.
    pub global_edges: Vec<Edge>,
    /// Target model prediction on the unmasked instance.
    pub predicted: usize,
}

/// Generates a mask, applies it and keeps the top `k` edges. For node
/// models `target` names the node in `g` and the work happens on its
/// computation subgraph.
pub fn explain<T: Scalar>(
    gen: &Generator<T>,
    model: &TargetModel<T>,
    g: &Graph<T>,
    target: Option<usize>,
    k: usize,
) -> Result<InstanceExplanation<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let instance = match (model.kind(), target) {
        (crate::gnn::ModelKind::Node, Some(v)) => {
            let (graph, map) = crate::graph::khop_subgraph(g, v, model.computation_hops())?;
            Instance {
                id: v,
                graph,
                target: Some(map.center),
                map: Some(map),
            }
        }
        (crate::gnn::ModelKind::Node, None) => {
            return Err(Error::InvalidArgument("node model needs a target node".into()))
        }
        (crate::gnn::ModelKind::Graph, _) => Instance {
            id: 0,
            graph: g.clone(),
            target: None,
            map: None,
        },
    };
    explain_instance(gen, model, instance, k)
}

/// [`explain`] for an already extracted instance.
pub fn explain_instance<T: Scalar>(
    gen: &Generator<T>,
    model: &TargetModel<T>,
    instance: Instance<T>,
    k: usize,
) -> Result<InstanceExplanation<T>> {
    let g = &instance.graph;
    let predicted = model.predict(g, None, instance.target)?;
    let weights = WeightMatrix::from_edge_weights(g, &gen.edge_weights(g, predicted)?)?;
    let explanation = topk_edges(&apply_mask(g, &weights)?, k)?.with_target(instance.target);
    let global_edges = match &instance.map {
        Some(map) => explanation.edge_set().iter().map(|&e| map.edge_to_global(e)).collect(),
        None => explanation.edge_set().to_vec(),
    };
    Ok(InstanceExplanation {
        instance,
        weights,
        explanation,
        global_edges,
        predicted,
    })
}

/// Translates instance-local edges with an optional node map.
pub fn to_global_edges(map: Option<&NodeMap>, edges: &[Edge]) -> Vec<Edge> {
    match map {
        Some(m) => edges.iter().map(|&e| m.edge_to_global(e)).collect(),
        None => edges.to_vec(),
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorDoc {
    feature_dim: usize,
    class_count: usize,
    encoder: Vec<LayerDoc>,
    decoder: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
struct DiscriminatorDoc {
    layers: Vec<LayerDoc>,
    readout: LayerDoc,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    dataset: String,
    target_checksum: String,
    config: ExplainerConfig,
    generator: GeneratorDoc,
    discriminator: DiscriminatorDoc,
}

/// Generator and discriminator plus the run they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplainerCheckpoint<T> {
    pub dataset: String,
    pub target_checksum: String,
    pub config: ExplainerConfig,
    pub generator: Generator<T>,
    pub discriminator: Discriminator<T>,
}

impl<T: Scalar> ExplainerCheckpoint<T> {
    pub fn to_json(&self) -> Result<String> {
        let g = &self.generator;
        let doc = CheckpointDoc {
            dataset: self.dataset.clone(),
            target_checksum: self.target_checksum.clone(),
            config: self.config.clone(),
            generator: GeneratorDoc {
                feature_dim: g.feature_dim,
                class_count: g.class_count,
                encoder: stack_to_docs(&g.encoder),
                decoder: vec![LayerDoc::from_dense(&g.hidden), LayerDoc::from_dense(&g.out)],
            },
            discriminator: DiscriminatorDoc {
                layers: stack_to_docs(&self.discriminator.convs),
                readout: LayerDoc::from_dense(&self.discriminator.out),
            },
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CheckpointDoc = serde_json::from_str(s)?;
        let gd = doc.generator;
        let [hidden, out]: [LayerDoc; 2] = gd
            .decoder
            .try_into()
            .map_err(|_| Error::InvalidArgument("generator decoder must have two layers".into()))?;
        let generator = Generator {
            encoder: stack_from_docs(&gd.encoder)?,
            hidden: hidden.to_dense()?,
            out: out.to_dense()?,
            feature_dim: gd.feature_dim,
            class_count: gd.class_count,
        };
        let in_dim = gd.feature_dim + gd.class_count;
        if generator.encoder.in_dim() != in_dim
            || generator.encoder.out_dim() != generator.hidden.fan_in()
            || generator.out.fan_out() != 1
        {
            return Err(Error::InvalidArgument("generator layer shapes do not chain".into()));
        }
        let discriminator = Discriminator {
            convs: stack_from_docs(&doc.discriminator.layers)?,
            out: doc.discriminator.readout.to_dense()?,
        };
        Ok(ExplainerCheckpoint {
            dataset: doc.dataset,
            target_checksum: doc.target_checksum,
            config: doc.config,
            generator,
            discriminator,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Probabilities of the target model on `g` with edge weights `w`.
pub fn masked_output<T: Scalar>(model: &TargetModel<T>, g: &Graph<T>, w: &WeightMatrix<T>) -> Result<Matrix<T>> {
    model.forward(g, Some(w))
}
