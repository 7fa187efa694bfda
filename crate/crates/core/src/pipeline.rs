//! Staged experiment runs driven by a TOML config.
//!
//! Every stage writes its artifacts under the run directory and records a
//! cache key and an artifact checksum in `manifest.json`. A stage is
//! skipped when its key (stage config plus upstream checksums) matches the
//! recorded one and the artifacts on disk still hash to the recorded
//! checksum.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{gen_ba_shapes, gen_tree_cycles, load_tu, split_dataset, write_tu, Part, Split, Task, TuRawFiles};
use crate::distill::{cache_path, distill_all, write_atomic};
use crate::error::{Error, Result};
use crate::evaluation::{default_k_list, export_dot, dot_file_name, node_predictions, reports_to_csv, sweep, AccuracyReport};
use crate::explainer::{explain, train_explainer, ExplainerCheckpoint, ExplainerConfig, ExplainerReport};
use crate::gnn::{label_accuracy, sha256_hex, train_target, TargetModel, TrainConfig, TrainReport};
use crate::{Dataset64, TargetModel64};

pub const MANIFEST: &str = "manifest.json";
const DATA_DIR: &str = "data";
const DATASET_JSON: &str = "data/dataset.json";
const SPLIT_JSON: &str = "data/split.json";
const MODEL_JSON: &str = "model.json";
const TRAIN_REPORT: &str = "train_report.json";
const DISTILL_DIR: &str = "distill";
const EXPLAINER_JSON: &str = "explainer.json";
const EXPLAINER_REPORT: &str = "explainer_report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const RECORDS_JSON: &str = "records.json";
const DOT_DIR: &str = "dot";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    GenData,
    TrainGnn,
    Distill,
    TrainExplainer,
    Evaluate,
    Visualize,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::GenData,
        Stage::TrainGnn,
        Stage::Distill,
        Stage::TrainExplainer,
        Stage::Evaluate,
        Stage::Visualize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::GenData => "gen-data",
            Stage::TrainGnn => "train-gnn",
            Stage::Distill => "distill",
            Stage::TrainExplainer => "train-explainer",
            Stage::Evaluate => "evaluate",
            Stage::Visualize => "visualize",
        }
    }

    pub fn from_name(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }

    /// Stages whose artifacts this one reads.
    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::GenData => &[],
            Stage::TrainGnn => &[Stage::GenData],
            Stage::Distill => &[Stage::GenData, Stage::TrainGnn],
            Stage::TrainExplainer => &[Stage::GenData, Stage::TrainGnn, Stage::Distill],
            Stage::Evaluate | Stage::Visualize => &[Stage::GenData, Stage::TrainGnn, Stage::TrainExplainer],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A builtin synthetic set, or a TU directory for graph classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tu_dir: Option<PathBuf>,
    /// Number of graphs kept from a TU set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
}

pub const BUILTINS: [&str; 2] = ["ba-shapes", "tree-cycles"];

impl DatasetSpec {
    pub fn builtin(name: &str) -> Self {
        DatasetSpec {
            name: name.to_string(),
            tu_dir: None,
            subsample: None,
        }
    }

    pub fn task(&self) -> Task {
        if self.tu_dir.is_some() {
            Task::GraphClassification
        } else {
            Task::NodeClassification
        }
    }

    fn check(&self) -> Result<()> {
        match &self.tu_dir {
            None if !BUILTINS.contains(&self.name.as_str()) => Err(Error::Config(format!(
                "unknown dataset `{}`; builtins are {BUILTINS:?}, or set tu_dir",
                self.name
            ))),
            None if self.subsample.is_some() => Err(Error::Config("subsample applies to TU datasets".into())),
            Some(dir) if !dir.is_dir() => Err(Error::Config(format!("tu_dir {} does not exist", dir.display()))),
            _ => Ok(()),
        }
    }
}

/// Fully resolved run settings. `out` is where the run lives and is not
/// part of the recorded config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    /// Seed for data generation, subsampling and the split.
    pub seed: u64,
    pub k: Vec<usize>,
    pub train: TrainConfig,
    pub explainer: ExplainerConfig,
    /// Test instances exported as DOT by `visualize`.
    pub visualize: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: DatasetSpec,
    #[serde(default)]
    seed: u64,
    out: Option<PathBuf>,
    k: Option<Vec<usize>>,
    visualize: Option<usize>,
    #[serde(default)]
    train: TrainOverrides,
    #[serde(default)]
    explainer: ExplainerOverrides,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainOverrides {
    epochs: Option<usize>,
    lr: Option<f64>,
    seed: Option<u64>,
    weight_decay: Option<f64>,
    patience: Option<usize>,
    batch_size: Option<usize>,
    restarts: Option<usize>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplainerOverrides {
    lambda: Option<f64>,
    epochs: Option<usize>,
    gen_lr: Option<f64>,
    disc_lr: Option<f64>,
    seed: Option<u64>,
    encoder_depth: Option<usize>,
    disc_steps: Option<usize>,
    supervision_weight: Option<f64>,
    val_k: Option<Vec<usize>>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RunConfig {
    /// Defaults for a dataset: its default K list, lambda 2
    /// for synthetic and 3 for real-world sets, all seeds equal to `seed`.
    pub fn for_dataset(dataset: DatasetSpec, seed: u64, out: PathBuf) -> Result<Self> {
        dataset.check()?;
        let task = dataset.task();
        let k = default_k_list(&dataset.name);
        let mut explainer = match task {
            Task::NodeClassification => ExplainerConfig::synthetic(),
            Task::GraphClassification => ExplainerConfig::real_world(),
        };
        explainer.seed = seed;
        explainer.val_k = k.clone();
        let mut train = TrainConfig::for_task(task);
        train.seed = seed;
        Ok(RunConfig {
            dataset,
            seed,
            k,
            train,
            explainer,
            visualize: 5,
            out,
        })
    }

    /// Parses a config document. Relative paths are taken from `base`;
    /// `file` only labels diagnostics.
    pub fn parse(text: &str, file: &Path, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| text[..s.start].matches('\n').count() + 1);
            Error::Parse {
                file: file.to_path_buf(),
                line,
                msg: e.message().to_string(),
            }
        })?;
        let mut dataset = raw.dataset;
        dataset.tu_dir = dataset.tu_dir.map(|d| base.join(d));
        let out = base.join(raw.out.unwrap_or_else(|| PathBuf::from("runs").join(&dataset.name)));
        let mut cfg = RunConfig::for_dataset(dataset, raw.seed, out)?;
        if let Some(k) = raw.k {
            cfg.set_k(k);
        }
        set(&mut cfg.visualize, raw.visualize);
        let t = raw.train;
        let tc = &mut cfg.train;
        set(&mut tc.epochs, t.epochs);
        set(&mut tc.lr, t.lr);
        set(&mut tc.seed, t.seed);
        set(&mut tc.weight_decay, t.weight_decay);
        set(&mut tc.patience, t.patience);
        set(&mut tc.batch_size, t.batch_size);
        set(&mut tc.restarts, t.restarts);
        let x = raw.explainer;
        let ec = &mut cfg.explainer;
        set(&mut ec.lambda, x.lambda);
        set(&mut ec.epochs, x.epochs);
        set(&mut ec.gen_lr, x.gen_lr);
        set(&mut ec.disc_lr, x.disc_lr);
        set(&mut ec.seed, x.seed);
        set(&mut ec.encoder_depth, x.encoder_depth);
        set(&mut ec.disc_steps, x.disc_steps);
        set(&mut ec.supervision_weight, x.supervision_weight);
        set(&mut ec.val_k, x.val_k);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, path, base)
    }

    /// TOML form of the resolved config (without `out`). Parsing it back
    /// gives the same config.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.check()?;
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(Error::Config("k must be a non-empty list of K >= 1".into()));
        }
        if self.train.epochs == 0 || !(self.train.lr > 0.0) {
            return Err(Error::Config("train.epochs must be >= 1 and train.lr > 0".into()));
        }
        self.explainer.validate()
    }

    /// Sets the data, target-model and explainer seeds.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
        self.explainer.seed = seed;
    }

    /// Sets the evaluation K list and the validation K list with it.
    pub fn set_k(&mut self, k: Vec<usize>) {
        self.explainer.val_k = k.clone();
        self.k = k;
    }

    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(self)?.as_bytes()))
    }

    /// The part of the config a stage's output depends on, besides its
    /// upstream artifacts.
    fn stage_inputs(&self, stage: Stage) -> Result<String> {
        Ok(match stage {
            Stage::GenData => serde_json::to_string(&(&self.dataset, self.seed))?,
            Stage::TrainGnn => serde_json::to_string(&self.train)?,
            Stage::Distill => String::new(),
            Stage::TrainExplainer => serde_json::to_string(&self.explainer)?,
            Stage::Evaluate => serde_json::to_string(&self.k)?,
            Stage::Visualize => serde_json::to_string(&(self.k[0], self.visualize))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of the stage config and the upstream checksums.
    pub key: String,
    /// Hash of the artifacts.
    pub checksum: String,
    /// Artifact paths relative to the run directory.
    pub artifacts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub config: RunConfig,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ran,
    Cached,
}

/// Held-out label accuracy of the target model next to its training report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub report: TrainReport,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    pub test_accuracy: f64,
}

/// An open run directory.
pub struct Run {
    cfg: RunConfig,
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    /// Creates the run directory if needed and picks up an existing
    /// manifest there.
    pub fn open(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let dir = cfg.out.clone();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(MANIFEST);
        let stages = if path.exists() {
            Manifest::load(&path)?.stages
        } else {
            BTreeMap::new()
        };
        let manifest = Manifest {
            config_hash: cfg.hash()?,
            config: cfg.clone(),
            stages,
        };
        Ok(Run { cfg, dir, manifest })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// All stages in order.
    pub fn pipeline(&mut self) -> Result<Vec<(Stage, Outcome)>> {
        Stage::ALL.into_iter().map(|s| Ok((s, self.run_stage(s)?))).collect()
    }

    /// Runs `stage` unless its cached artifacts are current. Upstream
    /// stages must already be current.
    pub fn run_stage(&mut self, stage: Stage) -> Result<Outcome> {
        // nearest upstream first, so the error names the stage to run next
        for &up in stage.upstream().iter().rev() {
            self.require(up)?;
        }
        let key = self.key(stage)?;
        if let Some(rec) = self.manifest.stages.get(stage.name()) {
            if rec.key == key && self.artifacts_checksum(&rec.artifacts).ok().as_ref() == Some(&rec.checksum) {
                log::info!("{stage}: cached");
                return Ok(Outcome::Cached);
            }
        }
        log::info!("{stage}: running");
        let artifacts = match stage {
            Stage::GenData => self.gen_data()?,
            Stage::TrainGnn => self.train_gnn()?,
            Stage::Distill => self.distill()?,
            Stage::TrainExplainer => self.train_explainer()?,
            Stage::Evaluate => self.evaluate()?,
            Stage::Visualize => self.visualize()?,
        };
        let checksum = self.artifacts_checksum(&artifacts)?;
        self.manifest.stages.insert(
            stage.name().to_string(),
            StageRecord { key, checksum, artifacts },
        );
        self.save_manifest()?;
        Ok(Outcome::Ran)
    }

    fn save_manifest(&self) -> Result<()> {
        write_atomic(&self.dir.join(MANIFEST), &self.manifest.to_json()?)
    }

    fn key(&self, stage: Stage) -> Result<String> {
        let mut s = format!("{}\n{}\n", stage.name(), self.cfg.stage_inputs(stage)?);
        for up in stage.upstream() {
            let rec = self
                .manifest
                .stages
                .get(up.name())
                .ok_or_else(|| Error::MissingStage(up.name(), up.name().to_string()))?;
            s.push_str(&rec.checksum);
            s.push('\n');
        }
        Ok(sha256_hex(s.as_bytes()))
    }

    /// Fails unless `stage` has current artifacts on disk.
    fn require(&self, stage: Stage) -> Result<()> {
        let Some(rec) = self.manifest.stages.get(stage.name()) else {
            return Err(Error::MissingStage(stage.name(), self.dir.join(MANIFEST).display().to_string()));
        };
        if let Some(missing) = rec.artifacts.iter().find(|a| !self.dir.join(a).exists()) {
            return Err(Error::MissingStage(stage.name(), self.dir.join(missing).display().to_string()));
        }
        if self.artifacts_checksum(&rec.artifacts)? != rec.checksum || self.key(stage)? != rec.key {
            return Err(Error::StaleStage(stage.name()));
        }
        Ok(())
    }

    fn artifacts_checksum(&self, artifacts: &[String]) -> Result<String> {
        let mut bytes = Vec::new();
        for a in artifacts {
            let p = self.dir.join(a);
            bytes.extend_from_slice(a.as_bytes());
            bytes.push(0);
            bytes.extend_from_slice(&sha256_hex(&fs::read(&p).map_err(|e| Error::io(&p, e))?).into_bytes());
            bytes.push(b'\n');
        }
        Ok(sha256_hex(&bytes))
    }

    fn write(&self, rel: &str, contents: &str) -> Result<String> {
        write_atomic(&self.dir.join(rel), contents)?;
        Ok(rel.to_string())
    }

    fn gen_data(&self) -> Result<Vec<String>> {
        let spec = &self.cfg.dataset;
        let seed = self.cfg.seed;
        let bundle: Dataset64 = match (&spec.tu_dir, spec.name.as_str()) {
            (None, "ba-shapes") => gen_ba_shapes(seed)?,
            (None, "tree-cycles") => gen_tree_cycles(seed)?,
            (None, other) => return Err(Error::Config(format!("unknown dataset `{other}`"))),
            (Some(dir), name) => {
                let mut b = load_tu(&TuRawFiles::in_dir(dir, name))?;
                if let Some(n) = spec.subsample {
                    b = b.subsample(n, seed)?;
                }
                b
            }
        };
        let bundle = split_dataset(bundle, seed)?;
        let mut out = Vec::new();
        match bundle.task {
            Task::NodeClassification => out.push(self.write(DATASET_JSON, &bundle.to_json()?)?),
            Task::GraphClassification => {
                let files = write_tu(&bundle, &self.dir.join(DATA_DIR), &spec.name)?;
                for p in [Some(files.edges), Some(files.graph_indicator), Some(files.graph_labels), files.node_labels]
                    .into_iter()
                    .flatten()
                {
                    let rel = p.strip_prefix(&self.dir).map_err(|_| Error::Config("TU files outside run".into()))?;
                    out.push(rel.to_string_lossy().into_owned());
                }
            }
        }
        out.push(self.write(SPLIT_JSON, &serde_json::to_string(bundle.split()?)?)?);
        log::info!("{}: {} instances", bundle.name, bundle.instance_count());
        Ok(out)
    }

    /// The dataset written by `gen-data`, with its split.
    pub fn load_bundle(&self) -> Result<Dataset64> {
        self.require(Stage::GenData)?;
        let data = self.dir.join(DATA_DIR);
        let mut bundle = match self.cfg.dataset.task() {
            Task::NodeClassification => Dataset64::load_json(&self.dir.join(DATASET_JSON))?,
            Task::GraphClassification => load_tu(&TuRawFiles::in_dir(&data, &self.cfg.dataset.name))?,
        };
        let p = self.dir.join(SPLIT_JSON);
        let split: Split = serde_json::from_str(&fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?)?;
        bundle.split = Some(split);
        bundle.validate()?;
        Ok(bundle)
    }

    /// The target model written by `train-gnn`.
    pub fn load_model(&self) -> Result<TargetModel64> {
        self.require(Stage::TrainGnn)?;
        TargetModel::load(&self.dir.join(MODEL_JSON))
    }

    /// The explainer written by `train-explainer`.
    pub fn load_explainer(&self) -> Result<ExplainerCheckpoint<f64>> {
        self.require(Stage::TrainExplainer)?;
        ExplainerCheckpoint::load(&self.dir.join(EXPLAINER_JSON))
    }

    pub fn load_target_summary(&self) -> Result<TargetSummary> {
        self.require(Stage::TrainGnn)?;
        read_json(&self.dir.join(TRAIN_REPORT))
    }

    pub fn load_explainer_report(&self) -> Result<ExplainerReport> {
        self.require(Stage::TrainExplainer)?;
        read_json(&self.dir.join(EXPLAINER_REPORT))
    }

    /// Per-K reports written by `evaluate`.
    pub fn load_reports(&self) -> Result<Vec<AccuracyReport>> {
        self.require(Stage::Evaluate)?;
        read_json(&self.dir.join(RECORDS_JSON))
    }

    fn train_gnn(&self) -> Result<Vec<String>> {
        let bundle = self.load_bundle()?;
        let (model, report) = train_target(&bundle, &self.cfg.train)?;
        let summary = TargetSummary {
            report,
            train_accuracy: label_accuracy(&model, &bundle, Part::Train)?,
            validation_accuracy: label_accuracy(&model, &bundle, Part::Validation)?,
            test_accuracy: label_accuracy(&model, &bundle, Part::Test)?,
        };
        log::info!("target model test accuracy {:.4}", summary.test_accuracy);
        Ok(vec![
            self.write(MODEL_JSON, &model.to_json()?)?,
            self.write(TRAIN_REPORT, &serde_json::to_string_pretty(&summary)?)?,
        ])
    }

    fn distill(&self) -> Result<Vec<String>> {
        let bundle = self.load_bundle()?;
        let model = self.load_model()?;
        let dir = self.dir.join(DISTILL_DIR);
        let targets = distill_all(&model, &bundle, Some(&dir))?;
        targets
            .iter()
            .map(|t| {
                let p = cache_path(&dir, &bundle.name, t.instance_id);
                Ok(p.strip_prefix(&self.dir).expect("under run dir").to_string_lossy().into_owned())
            })
            .collect()
    }

    fn train_explainer(&self) -> Result<Vec<String>> {
        let bundle = self.load_bundle()?;
        let model = self.load_model()?;
        let targets = distill_all(&model, &bundle, Some(&self.dir.join(DISTILL_DIR)))?;
        let trained = train_explainer(&bundle, &model, &targets, &self.cfg.explainer)?;
        let ckpt = ExplainerCheckpoint {
            dataset: bundle.name.clone(),
            target_checksum: model.checksum()?,
            config: self.cfg.explainer.clone(),
            generator: trained.generator,
            discriminator: trained.discriminator,
        };
        log::info!(
            "explainer best epoch {} validation accuracy {:.4}",
            trained.report.best_epoch,
            trained.report.best_val_accuracy
        );
        Ok(vec![
            self.write(EXPLAINER_JSON, &ckpt.to_json()?)?,
            self.write(EXPLAINER_REPORT, &serde_json::to_string_pretty(&trained.report)?)?,
        ])
    }

    fn evaluate(&self) -> Result<Vec<String>> {
        let bundle = self.load_bundle()?;
        let model = self.load_model()?;
        let ckpt = self.load_explainer()?;
        let reports = sweep(&model, &ckpt.generator, &bundle, &self.cfg.k)?;
        let off: usize = reports.iter().map(AccuracyReport::off_support).sum();
        if off > 0 {
            return Err(Error::InvalidArgument(format!("{off} explanation edges are not in the input graph")));
        }
        for r in &reports {
            log::info!("{} K={} accuracy {:.4} over {}", r.dataset, r.k, r.accuracy, r.n_test);
        }
        Ok(vec![
            self.write(REPORT_CSV, &reports_to_csv(&reports))?,
            self.write(RECORDS_JSON, &serde_json::to_string_pretty(&reports)?)?,
        ])
    }

    fn visualize(&self) -> Result<Vec<String>> {
        let bundle = self.load_bundle()?;
        let model = self.load_model()?;
        let ckpt = self.load_explainer()?;
        let k = self.cfg.k[0];
        let ids = bundle.explain_instances(Part::Test)?;
        let mut out = Vec::new();
        for &id in ids.iter().take(self.cfg.visualize) {
            let (g, target) = match bundle.task {
                Task::NodeClassification => (&bundle.graphs[0], Some(id)),
                Task::GraphClassification => (&bundle.graphs[id], None),
            };
            let e = explain(&ckpt.generator, &model, g, target, k)?;
            let sub = &e.instance.graph;
            let preds = node_predictions(&model, sub, None)?;
            let labels = e.instance.map.as_ref().map(|m| m.global.as_slice());
            let dot = export_dot(sub, &e.explanation, &preds, labels)?;
            let rel = format!("{DOT_DIR}/{}", dot_file_name(&bundle.name, id, k));
            out.push(self.write(&rel, &dot)?);
        }
        Ok(out)
    }
}

fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
