//! Explanation accuracy: the share of test instances whose top-K
//! explanation gets the same target-model prediction as the full input.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::datasets::{DatasetBundle, Part};
use crate::error::{Error, Result};
use crate::explainer::{explain_instance, Generator};
use crate::gnn::TargetModel;
use crate::graph::{apply_mask, topk_edges, Explanation, Graph, WeightMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: usize,
    pub original: usize,
    pub explained: usize,
    pub matched: bool,
    /// Size of the explanation edge set.
    pub edges: usize,
    /// Explanation edges missing from the input graph (always 0 unless
    /// something is broken).
    pub off_support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub dataset: String,
    pub k: usize,
    pub accuracy: f64,
    pub n_test: usize,
    pub records: Vec<InstanceRecord>,
}

impl AccuracyReport {
    pub fn from_records(dataset: &str, k: usize, records: Vec<InstanceRecord>) -> Self {
        AccuracyReport {
            dataset: dataset.to_string(),
            k,
            accuracy: accuracy_from_records(&records),
            n_test: records.len(),
            records,
        }
    }

    pub fn off_support(&self) -> usize {
        self.records.iter().map(|r| r.off_support).sum()
    }
}

/// Matches over total; 0 for an empty list.
pub fn accuracy_from_records(records: &[InstanceRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.matched).count() as f64 / records.len() as f64
}

/// Default K list for a dataset; TU sets share one.
pub fn default_k_list(dataset: &str) -> Vec<usize> {
    match dataset {
        "ba-shapes" => (5..=9).collect(),
        "tree-cycles" => (6..=10).collect(),
        _ => vec![15, 20, 25, 30],
    }
}

pub fn explanation_accuracy<T: Scalar>(
    model: &TargetModel<T>,
    gen: &Generator<T>,
    bundle: &DatasetBundle<T>,
    k: usize,
) -> Result<AccuracyReport> {
    Ok(sweep(model, gen, bundle, &[k])?.remove(0))
}

/// One report per K, in the given order. The mask of each instance is
/// generated once and cut at every K.
pub fn sweep<T: Scalar>(
    model: &TargetModel<T>,
    gen: &Generator<T>,
    bundle: &DatasetBundle<T>,
    ks: &[usize],
) -> Result<Vec<AccuracyReport>> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidArgument("K list must be non-empty with K >= 1".into()));
    }
    let ids = bundle.explain_instances(Part::Test)?;
    if ids.is_empty() {
        return Err(Error::InvalidArgument(format!("{} has no test instances to explain", bundle.name)));
    }
    let mut per_k: Vec<Vec<InstanceRecord>> = vec![Vec::with_capacity(ids.len()); ks.len()];
    for &id in &ids {
        let inst = model.instance(bundle, id)?;
        let source = match bundle.graphs.len() {
            1 if inst.map.is_some() => &bundle.graphs[0],
            _ => &bundle.graphs[id],
        };
        let first = explain_instance(gen, model, inst, ks[0])?;
        let exp = apply_mask(&first.instance.graph, &first.weights)?;
        for (slot, &k) in per_k.iter_mut().zip(ks) {
            let top = topk_edges(&exp, k)?;
            slot.push(score(model, source, &first.instance, &top, first.predicted, id)?);
        }
    }
    Ok(ks
        .iter()
        .zip(per_k)
        .map(|(&k, records)| AccuracyReport::from_records(&bundle.name, k, records))
        .collect())
}

fn score<T: Scalar>(
    model: &TargetModel<T>,
    source: &Graph<T>,
    inst: &crate::gnn::Instance<T>,
    top: &Explanation<T>,
    original: usize,
    id: usize,
) -> Result<InstanceRecord> {
    let g = &inst.graph;
    let explained = model.predict_edges(g, Some(top.edge_weights()), inst.target)?;
    let global = crate::explainer::to_global_edges(inst.map.as_ref(), top.edge_set());
    let off_support = global.iter().filter(|&&(a, b)| !source.has_edge(a, b)).count()
        + top.edge_set().iter().filter(|&&(a, b)| !g.has_edge(a, b)).count();
    Ok(InstanceRecord {
        id,
        original,
        explained,
        matched: explained == original,
        edges: top.edge_set().len(),
        off_support,
    })
}

pub const CSV_HEADER: &str = "dataset,K,accuracy,n_test";

/// One row per report. Accuracy is written in shortest round-trip form.
pub fn reports_to_csv(reports: &[AccuracyReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(s, "{},{},{},{}", r.dataset, r.k, r.accuracy, r.n_test);
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub dataset: String,
    pub k: usize,
    pub accuracy: f64,
    pub n_test: usize,
}

impl From<&AccuracyReport> for CsvRow {
    fn from(r: &AccuracyReport) -> Self {
        CsvRow {
            dataset: r.dataset.clone(),
            k: r.k,
            accuracy: r.accuracy,
            n_test: r.n_test,
        }
    }
}

pub fn reports_from_csv(text: &str) -> Result<Vec<CsvRow>> {
    let bad = |line: usize, msg: String| Error::Parse {
        file: "report.csv".into(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(i + 1, format!("expected 4 fields, found {}", f.len())));
        }
        let num = |s: &str, what: &str| s.trim().parse::<usize>().map_err(|e| bad(i + 1, format!("{what}: {e}")));
        rows.push(CsvRow {
            dataset: f[0].to_string(),
            k: num(f[1], "K")?,
            accuracy: f[2].trim().parse().map_err(|e| bad(i + 1, format!("accuracy: {e}")))?,
            n_test: num(f[3], "n_test")?,
        });
    }
    Ok(rows)
}

const PALETTE: [&str; 6] = ["lightgrey", "lightblue", "palegreen", "khaki", "plum", "lightsalmon"];

/// File name used for exported explanations.
pub fn dot_file_name(dataset: &str, instance: usize, k: usize) -> String {
    format!("{dataset}_{instance}_K{k}.dot")
}

/// Graphviz rendering of an explanation: nodes colored by predicted class,
/// the explained node drawn as a red double circle, explanation edges bold
/// and the rest thin and grey. `labels` optionally renames nodes (global
/// ids of a subgraph).
pub fn export_dot<T: Scalar>(
    g: &Graph<T>,
    exp: &Explanation<T>,
    predictions: &[usize],
    labels: Option<&[usize]>,
) -> Result<String> {
    if exp.node_count() != g.node_count() || predictions.len() != g.node_count() {
        return Err(Error::InvalidArgument("explanation, graph and predictions disagree on node count".into()));
    }
    let name = |v: usize| labels.map_or(v, |l| l[v]);
    let mut s = String::from("graph explanation {\n  node [shape=circle, style=filled];\n");
    for v in 0..g.node_count() {
        let color = PALETTE[predictions[v] % PALETTE.len()];
        if exp.target() == Some(v) {
            let _ = writeln!(
                s,
                "  n{} [label=\"{}\", fillcolor={color}, shape=doublecircle, color=red, penwidth=3];",
                name(v),
                name(v)
            );
        } else {
            let _ = writeln!(s, "  n{} [label=\"{}\", fillcolor={color}];", name(v), name(v));
        }
    }
    let kept = exp.edge_set();
    for &(a, b) in g.edges() {
        if kept.binary_search(&(a, b)).is_ok() {
            let _ = writeln!(s, "  n{} -- n{} [style=bold, penwidth=3];", name(a), name(b));
        } else {
            let _ = writeln!(s, "  n{} -- n{} [color=grey, penwidth=1];", name(a), name(b));
        }
    }
    s.push_str("}\n");
    Ok(s)
}

/// Per-node predictions of `model` on `g` (node models), or the graph
/// prediction repeated on every node.
pub fn node_predictions<T: Scalar>(model: &TargetModel<T>, g: &Graph<T>, mask: Option<&WeightMatrix<T>>) -> Result<Vec<usize>> {
    let p = model.forward(g, mask)?;
    Ok(match model.kind() {
        crate::gnn::ModelKind::Node => (0..g.node_count()).map(|v| p.argmax_row(v)).collect(),
        crate::gnn::ModelKind::Graph => vec![p.argmax_row(0); g.node_count()],
    })
}
