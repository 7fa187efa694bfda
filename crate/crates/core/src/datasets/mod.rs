//! Benchmark datasets: synthetic motif graphs, TU-format molecule sets and
//! the train/validation/test split.

mod synthetic;
mod tu;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

pub use synthetic::{gen_ba_shapes, gen_tree_cycles, BA_ATTACH, BA_BASE_NODES, MOTIF_COUNT, SYNTHETIC_FEATURE_DIM, TREE_DEPTH};
pub use tu::{load_tu, write_tu, TuRawFiles};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    NodeClassification,
    GraphClassification,
}

/// Disjoint instance index sets. Instances are node ids for node tasks and
/// graph ids for graph tasks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn part(&self, p: Part) -> &[usize] {
        match p {
            Part::Train => &self.train,
            Part::Validation => &self.validation,
            Part::Test => &self.test,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBundle<T> {
    pub name: String,
    pub task: Task,
    pub graphs: Vec<Graph<T>>,
    pub class_count: usize,
    pub split: Option<Split>,
}

impl<T: Scalar> DatasetBundle<T> {
    /// Number of split units: nodes of the single graph for node tasks,
    /// graphs for graph tasks.
    pub fn instance_count(&self) -> usize {
        match self.task {
            Task::NodeClassification => self.graphs.first().map_or(0, Graph::node_count),
            Task::GraphClassification => self.graphs.len(),
        }
    }

    /// Label of instance `i` (node label or graph label).
    pub fn label(&self, i: usize) -> Option<usize> {
        match self.task {
            Task::NodeClassification => self.graphs[0].node_labels().map(|l| l[i]),
            Task::GraphClassification => self.graphs[i].graph_label(),
        }
    }

    pub fn split(&self) -> Result<&Split> {
        self.split
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("dataset {} has no split", self.name)))
    }

    /// Instances that get explained: motif nodes (label >= 1) for node
    /// tasks, every graph for graph tasks.
    pub fn explain_instances(&self, part: Part) -> Result<Vec<usize>> {
        let ids = self.split()?.part(part);
        Ok(match self.task {
            Task::NodeClassification => ids
                .iter()
                .copied()
                .filter(|&v| self.label(v).is_some_and(|l| l >= 1))
                .collect(),
            Task::GraphClassification => ids.to_vec(),
        })
    }

    /// Checks label ranges and split consistency.
    pub fn validate(&self) -> Result<()> {
        let n = self.instance_count();
        for i in 0..n {
            match self.label(i) {
                Some(l) if l < self.class_count => {}
                Some(l) => {
                    return Err(Error::InvalidArgument(format!(
                        "instance {i} label {l} >= class count {}",
                        self.class_count
                    )))
                }
                None => return Err(Error::InvalidArgument(format!("instance {i} has no label"))),
            }
        }
        if let Some(s) = &self.split {
            let mut seen = vec![false; n];
            for &i in s.train.iter().chain(&s.validation).chain(&s.test) {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!("split repeats or overflows at {i}")));
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidArgument("split does not cover every instance".into()));
            }
        }
        Ok(())
    }

    /// Keeps `n` graphs drawn uniformly by `seed` (graph tasks only); drops
    /// any existing split.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Self> {
        if self.task != Task::GraphClassification {
            return Err(Error::InvalidArgument("subsample applies to graph tasks".into()));
        }
        let mut idx: Vec<usize> = (0..self.graphs.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(n);
        idx.sort_unstable();
        Ok(DatasetBundle {
            name: self.name.clone(),
            task: self.task,
            graphs: idx.iter().map(|&i| self.graphs[i].clone()).collect(),
            class_count: self.class_count,
            split: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        if self.task != Task::NodeClassification || self.graphs.len() != 1 {
            return Err(Error::InvalidArgument(
                "JSON serialization covers single-graph node datasets".into(),
            ));
        }
        let g = &self.graphs[0];
        let doc = SyntheticDoc {
            name: self.name.clone(),
            task: self.task,
            class_count: self.class_count,
            nodes: g.node_count(),
            edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
            labels: g.node_labels().map(<[usize]>::to_vec).unwrap_or_default(),
            features: (0..g.node_count())
                .map(|v| g.features().row(v).iter().map(|x| x.as_f64()).collect())
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SyntheticDoc = serde_json::from_str(s)?;
        let rows: Vec<Vec<T>> = doc
            .features
            .iter()
            .map(|r| r.iter().map(|&x| T::of(x)).collect())
            .collect();
        let feats = if rows.is_empty() {
            Matrix::zeros(doc.nodes, 0)
        } else {
            Matrix::from_rows(&rows)?
        };
        let g = Graph::new(doc.nodes, doc.edges.iter().map(|e| (e[0], e[1])), feats)?
            .with_node_labels(doc.labels)?;
        let bundle = DatasetBundle {
            name: doc.name,
            task: doc.task,
            graphs: vec![g],
            class_count: doc.class_count,
            split: None,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[derive(Serialize, Deserialize)]
struct SyntheticDoc {
    #[serde(default)]
    name: String,
    task: Task,
    class_count: usize,
    nodes: usize,
    edges: Vec<[usize; 2]>,
    labels: Vec<usize>,
    features: Vec<Vec<f64>>,
}

/// Shuffles instance ids by `seed` and cuts them 80/10/10 as
/// `floor(0.8 n)`, `floor(0.1 n)` and the remainder.
pub fn split_dataset<T: Scalar>(mut bundle: DatasetBundle<T>, seed: u64) -> Result<DatasetBundle<T>> {
    let n = bundle.instance_count();
    if n < 10 {
        return Err(Error::InvalidArgument(format!("cannot split {n} instances (need >= 10)")));
    }
    bundle.split = Some(split_indices(n, seed));
    Ok(bundle)
}

pub fn split_indices(n: usize, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n * 8 / 10;
    let n_val = n / 10;
    let test = idx.split_off(n_train + n_val);
    let validation = idx.split_off(n_train);
    Split {
        train: idx,
        validation,
        test,
    }
}
