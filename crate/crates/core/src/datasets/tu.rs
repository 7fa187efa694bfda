//! TU Dortmund plain-text graph collections.
//!
//! Layout for a dataset `NAME` (all ids 1-based, one record per line):
//!
//! * `NAME_A.txt`: `i, j` adjacency pairs (both directions usually listed)
//! * `NAME_graph_indicator.txt`: graph id of node `i` on line `i`
//! * `NAME_graph_labels.txt`: label of graph `g` on line `g`
//! * `NAME_node_labels.txt`: optional node label on line `i`
//! * `NAME_edge_labels.txt`: optional, read for presence only

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{DatasetBundle, Task};
use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// Degree one-hot width when node labels are absent (degrees capped at 10).
const DEGREE_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuRawFiles {
    pub name: String,
    pub edges: PathBuf,
    pub graph_indicator: PathBuf,
    pub graph_labels: PathBuf,
    pub node_labels: Option<PathBuf>,
    pub edge_labels: Option<PathBuf>,
}

impl TuRawFiles {
    /// Standard file names under `dir`; optional files are kept only if
    /// they exist.
    pub fn in_dir(dir: &Path, name: &str) -> Self {
        let f = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
        let opt = |p: PathBuf| p.exists().then_some(p);
        TuRawFiles {
            name: name.to_string(),
            edges: f("A"),
            graph_indicator: f("graph_indicator"),
            graph_labels: f("graph_labels"),
            node_labels: opt(f("node_labels")),
            edge_labels: opt(f("edge_labels")),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(file: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_ints(path: &Path) -> Result<Vec<(usize, i64)>> {
    let text = read(path)?;
    lines(&text)
        .map(|(ln, l)| {
            l.parse::<i64>()
                .map(|v| (ln, v))
                .map_err(|_| parse_err(path, ln, format!("expected an integer, got `{l}`")))
        })
        .collect()
}

/// Maps the sorted distinct values of `raw` onto `0..k`.
fn dense_codes(raw: &[i64]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<i64> = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let codes = raw
        .iter()
        .map(|v| distinct.binary_search(v).expect("present"))
        .collect();
    (codes, distinct.len())
}

pub fn load_tu<T: Scalar>(files: &TuRawFiles) -> Result<DatasetBundle<T>> {
    let indicator = parse_ints(&files.graph_indicator)?;
    let n_nodes = indicator.len();
    let mut graph_of = Vec::with_capacity(n_nodes);
    let mut n_graphs = 0usize;
    for &(ln, g) in &indicator {
        if g < 1 {
            return Err(parse_err(&files.graph_indicator, ln, format!("graph id {g} must be >= 1")));
        }
        let g = g as usize - 1;
        if g + 1 < n_graphs {
            return Err(parse_err(&files.graph_indicator, ln, "graph ids must be non-decreasing"));
        }
        n_graphs = n_graphs.max(g + 1);
        graph_of.push(g);
    }
    // local index of every node within its graph
    let mut first = vec![usize::MAX; n_graphs];
    let mut size = vec![0usize; n_graphs];
    for (v, &g) in graph_of.iter().enumerate() {
        if first[g] == usize::MAX {
            first[g] = v;
        }
        size[g] += 1;
    }
    if let Some(g) = size.iter().position(|&s| s == 0) {
        return Err(parse_err(&files.graph_indicator, 0, format!("graph {} has no nodes", g + 1)));
    }

    let glabels = parse_ints(&files.graph_labels)?;
    if glabels.len() != n_graphs {
        return Err(parse_err(
            &files.graph_labels,
            glabels.last().map_or(0, |l| l.0),
            format!("{} graph labels for {} graphs", glabels.len(), n_graphs),
        ));
    }
    let (graph_codes, class_count) = dense_codes(&glabels.iter().map(|l| l.1).collect::<Vec<_>>());

    let node_codes = match &files.node_labels {
        Some(p) => {
            let raw = parse_ints(p)?;
            if raw.len() != n_nodes {
                return Err(parse_err(
                    p,
                    raw.last().map_or(0, |l| l.0),
                    format!("{} node labels for {} nodes", raw.len(), n_nodes),
                ));
            }
            Some(dense_codes(&raw.iter().map(|l| l.1).collect::<Vec<_>>()))
        }
        None => None,
    };
    if let Some(p) = &files.edge_labels {
        // edge attributes are not used, but the file must at least be readable
        read(p)?;
    }

    let text = read(&files.edges)?;
    let mut per_graph: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_graphs];
    for (ln, l) in lines(&text) {
        let mut parts = l.split(',').map(str::trim);
        let parsed = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
            _ => None,
        };
        let (a, b) = parsed.ok_or_else(|| parse_err(&files.edges, ln, format!("expected `i, j`, got `{l}`")))?;
        for x in [a, b] {
            if x == 0 || x > n_nodes {
                return Err(parse_err(&files.edges, ln, format!("node id {x} is not in 1..={n_nodes}")));
            }
        }
        let (a, b) = (a - 1, b - 1);
        let g = graph_of[a];
        if graph_of[b] != g {
            return Err(parse_err(
                &files.edges,
                ln,
                format!("edge ({}, {}) crosses graphs {} and {}", a + 1, b + 1, g + 1, graph_of[b] + 1),
            ));
        }
        if a == b {
            log::warn!("{}:{ln}: dropping self-loop on node {}", files.edges.display(), a + 1);
            continue;
        }
        per_graph[g].push((a - first[g], b - first[g]));
    }

    let mut graphs = Vec::with_capacity(n_graphs);
    for g in 0..n_graphs {
        let n = size[g];
        let edges = std::mem::take(&mut per_graph[g]);
        let (feats, labels) = match &node_codes {
            Some((codes, width)) => {
                let local = &codes[first[g]..first[g] + n];
                (one_hot::<T>(local, *width), Some(local.to_vec()))
            }
            None => (Matrix::zeros(n, DEGREE_CAP + 1), None),
        };
        let mut graph = Graph::new(n, edges, feats)?.with_graph_label(graph_codes[g]);
        if let Some(l) = labels {
            graph = graph.with_node_labels(l)?;
        } else {
            let deg: Vec<usize> = (0..n).map(|v| graph.degree(v).min(DEGREE_CAP)).collect();
            graph = graph.with_features(one_hot(&deg, DEGREE_CAP + 1))?;
        }
        graphs.push(graph);
    }
    let bundle = DatasetBundle {
        name: files.name.clone(),
        task: Task::GraphClassification,
        graphs,
        class_count,
        split: None,
    };
    bundle.validate()?;
    Ok(bundle)
}

fn one_hot<T: Scalar>(codes: &[usize], width: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(codes.len(), width);
    for (i, &c) in codes.iter().enumerate() {
        m[(i, c)] = T::one();
    }
    m
}

/// Writes a graph-classification bundle in TU layout; node labels are
/// written when every graph carries them.
pub fn write_tu<T: Scalar>(bundle: &DatasetBundle<T>, dir: &Path, name: &str) -> Result<TuRawFiles> {
    if bundle.task != Task::GraphClassification {
        return Err(Error::InvalidArgument("TU layout holds graph-classification sets".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (mut a, mut ind, mut gl, mut nl) = (String::new(), String::new(), String::new(), String::new());
    let with_labels = bundle.graphs.iter().all(|g| g.node_labels().is_some());
    let mut offset = 0usize;
    for (gi, g) in bundle.graphs.iter().enumerate() {
        let label = g
            .graph_label()
            .ok_or_else(|| Error::InvalidArgument(format!("graph {gi} has no label")))?;
        writeln!(gl, "{label}").unwrap();
        for v in 0..g.node_count() {
            writeln!(ind, "{}", gi + 1).unwrap();
            if with_labels {
                writeln!(nl, "{}", g.node_labels().unwrap()[v]).unwrap();
            }
        }
        // both directions, ascending, as the public files do
        let mut pairs: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        for &(x, y) in g.edges() {
            pairs.insert((x, y), ());
            pairs.insert((y, x), ());
        }
        for &(x, y) in pairs.keys() {
            writeln!(a, "{}, {}", x + offset + 1, y + offset + 1).unwrap();
        }
        offset += g.node_count();
    }
    let mut files = TuRawFiles::in_dir(dir, name);
    let put = |p: &Path, s: &str| std::fs::write(p, s).map_err(|e| Error::io(p, e));
    put(&files.edges, &a)?;
    put(&files.graph_indicator, &ind)?;
    put(&files.graph_labels, &gl)?;
    if with_labels {
        let p = dir.join(format!("{name}_node_labels.txt"));
        put(&p, &nl)?;
        files.node_labels = Some(p);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(dir: &Path, a: &str, ind: &str, gl: &str, nl: Option<&str>) -> TuRawFiles {
        std::fs::write(dir.join("T_A.txt"), a).unwrap();
        std::fs::write(dir.join("T_graph_indicator.txt"), ind).unwrap();
        std::fs::write(dir.join("T_graph_labels.txt"), gl).unwrap();
        if let Some(nl) = nl {
            std::fs::write(dir.join("T_node_labels.txt"), nl).unwrap();
        }
        TuRawFiles::in_dir(dir, "T")
    }

    // triangle (nodes 1-3) + 2-edge path (nodes 4-6)
    const A: &str = "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n5, 6\n6, 5\n";
    const IND: &str = "1\n1\n1\n2\n2\n2\n";

    #[test]
    fn loads_triangle_and_path() {
        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), A, IND, "1\n-1\n", Some("0\n2\n0\n1\n1\n2\n"));
        let b = load_tu::<f64>(&files).unwrap();
        assert_eq!(b.graphs.len(), 2);
        assert_eq!(b.class_count, 2);
        assert_eq!(b.graphs[0].edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(b.graphs[1].edges(), &[(0, 1), (1, 2)]);
        // -1 sorts first
        assert_eq!((b.graphs[0].graph_label(), b.graphs[1].graph_label()), (Some(1), Some(0)));
        assert_eq!(b.graphs[0].features().row(1), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn degree_features_without_node_labels() {
        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), A, IND, "0\n1\n", None);
        let b = load_tu::<f64>(&files).unwrap();
        let f = b.graphs[1].features();
        assert_eq!(f.cols(), DEGREE_CAP + 1);
        assert_eq!((f[(0, 1)], f[(1, 2)]), (1.0, 1.0));
    }

    #[test]
    fn rejects_cross_graph_edges() {
        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), "1, 2\n3, 4\n", IND, "0\n1\n", None);
        let err = load_tu::<f64>(&files).unwrap_err().to_string();
        assert!(err.contains("T_A.txt:2") && err.contains("crosses"), "{err}");
    }

    #[test]
    fn rejects_dangling_ids_and_missing_labels() {
        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), "1, 2\n\n6, 7\n", IND, "0\n1\n", None);
        let err = load_tu::<f64>(&files).unwrap_err().to_string();
        assert!(err.contains("T_A.txt:3") && err.contains("7"), "{err}");

        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), A, IND, "0\n", None);
        let err = load_tu::<f64>(&files).unwrap_err().to_string();
        assert!(err.contains("graph_labels") && err.contains("1 graph labels for 2"), "{err}");

        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), A, IND, "0\n1\n", Some("0\n1\n"));
        assert!(load_tu::<f64>(&files).unwrap_err().to_string().contains("node labels"));
    }

    #[test]
    fn write_then_load_round_trips() {
        let d = tempfile::tempdir().unwrap();
        let files = fixture(d.path(), A, IND, "0\n1\n", Some("0\n2\n0\n1\n1\n2\n"));
        let b = load_tu::<f64>(&files).unwrap();
        let out = tempfile::tempdir().unwrap();
        let written = write_tu(&b, out.path(), "T").unwrap();
        let mut again = load_tu::<f64>(&written).unwrap();
        again.name = b.name.clone();
        assert_eq!(again, b);
    }
}
