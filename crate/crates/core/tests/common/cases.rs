//! Oracle checks shared by the focused tests and the acceptance suite.

use std::sync::Arc;

use advx::autodiff::{Matrix, Tape, Var};
use advx::datasets::{split_dataset, DatasetBundle, Task};
use advx::distill::distill;
use advx::explainer::{generator_objective, Discriminator, Generator, Prepared};
use advx::gnn::{train_target, Instance, ModelKind, TargetModel, TrainConfig};
use advx::graph::Graph;
use advx::nn::Module;
use rand::Rng;

use super::{check_gradients, random_edges, rng, uniform};

type Build = Box<dyn Fn(&mut Tape<f64>, &[Var]) -> Var>;
type Case = (&'static str, Vec<(usize, usize)>, (f64, f64), Build);

/// Reduces any output to a scalar through a fixed random projection so that
/// every output entry gets a distinct upstream gradient.
fn project(t: &mut Tape<f64>, y: Var) -> Var {
    let (n, m) = t.shape(y);
    let mut r = rng(999);
    let w = t.constant(uniform(&mut r, n, m, -1.0, 1.0));
    let p = t.mul(y, w).unwrap();
    t.mean(p)
}

fn projected(f: impl Fn(&mut Tape<f64>, &[Var]) -> Var + 'static) -> Build {
    Box::new(move |t, v| {
        let y = f(t, v);
        project(t, y)
    })
}

/// (name, input shapes, sampling range, loss builder) for every dense
/// primitive.
fn dense_cases() -> Vec<Case> {
    let wide = (-2.0, 2.0);
    vec![
        ("matmul", vec![(3, 3), (3, 3)], wide, projected(|t, v| t.matmul(v[0], v[1]).unwrap())),
        ("add", vec![(2, 3), (2, 3)], wide, projected(|t, v| t.add(v[0], v[1]).unwrap())),
        ("sub", vec![(2, 3), (2, 3)], wide, projected(|t, v| t.sub(v[0], v[1]).unwrap())),
        ("mul", vec![(2, 3), (2, 3)], wide, projected(|t, v| t.mul(v[0], v[1]).unwrap())),
        ("scale", vec![(2, 3)], wide, projected(|t, v| t.scale(v[0], -1.7))),
        ("add_bias", vec![(4, 3), (1, 3)], wide, projected(|t, v| t.add_bias(v[0], v[1]).unwrap())),
        (
            "mask_mul",
            vec![(3, 3)],
            wide,
            projected(|t, v| {
                let mask = Matrix::from_vec(3, 3, vec![1.0, 0.0, 0.5, 0.2, 1.0, 0.0, 0.0, 0.3, 1.0]).unwrap();
                t.mask_mul(v[0], mask).unwrap()
            }),
        ),
        ("relu", vec![(3, 4)], wide, projected(|t, v| t.relu(v[0]))),
        ("sigmoid", vec![(3, 4)], wide, projected(|t, v| t.sigmoid(v[0]))),
        ("log", vec![(3, 4)], (0.5, 2.0), projected(|t, v| t.log(v[0]))),
        ("log_sigmoid", vec![(3, 4)], wide, projected(|t, v| t.log_sigmoid(v[0]))),
        ("softmax", vec![(3, 4)], wide, projected(|t, v| t.softmax(v[0]))),
        ("mean_rows", vec![(5, 3)], wide, projected(|t, v| t.mean_rows(v[0]).unwrap())),
        ("select_rows", vec![(5, 3)], wide, projected(|t, v| t.select_rows(v[0], &[4, 1, 1]).unwrap())),
        ("mean", vec![(3, 2)], wide, Box::new(|t, v| t.mean(v[0]))),
        ("mse", vec![(3, 3), (3, 3)], wide, Box::new(|t, v| t.mse(v[0], v[1]).unwrap())),
        (
            "bce_with_logits",
            vec![(2, 3)],
            wide,
            Box::new(|t, v| {
                let targets = Matrix::from_vec(2, 3, vec![1.0, 0.0, 0.3, 0.0, 1.0, 0.8]).unwrap();
                t.bce_with_logits(v[0], targets).unwrap()
            }),
        ),
        (
            "softmax_cross_entropy",
            vec![(4, 3)],
            wide,
            Box::new(|t, v| t.softmax_cross_entropy(v[0], &[0, 2, 3], &[2, 0, 1]).unwrap()),
        ),
    ]
}

/// Worst relative error per primitive over `trials` random inputs each.
pub fn primitive_errors(trials: u64) -> Vec<(&'static str, f64)> {
    let mut out = Vec::new();
    for (name, shapes, (lo, hi), build) in dense_cases() {
        let mut worst = 0.0f64;
        for seed in 0..trials {
            let mut r = rng(seed);
            let inputs: Vec<Matrix<f64>> = shapes.iter().map(|&(a, b)| uniform(&mut r, a, b, lo, hi)).collect();
            worst = worst.max(check_gradients(&inputs, &build).worst);
        }
        out.push((name, worst));
    }
    let (mut prop, mut prod) = (0.0f64, 0.0f64);
    let mut seed = 0;
    let mut done = 0;
    while done < trials {
        let mut r = rng(100 + seed);
        seed += 1;
        let n = 6;
        let g = Graph::new(n, random_edges(&mut r, n, 0.5), Matrix::<f64>::zeros(n, 1)).unwrap();
        if g.edge_count() == 0 {
            continue;
        }
        done += 1;
        let topo = Arc::clone(g.topology());
        let inputs = vec![uniform(&mut r, g.edge_count(), 1, 0.1, 2.0), uniform(&mut r, n, 3, -2.0, 2.0)];
        let t1 = Arc::clone(&topo);
        prop = prop.max(
            check_gradients(&inputs, move |t, v| {
                let y = t.propagate(v[0], v[1], &t1).unwrap();
                project(t, y)
            })
            .worst,
        );
        prod = prod.max(
            check_gradients(&inputs[1..], |t, v| {
                let y = t.edge_product(v[0], &topo).unwrap();
                project(t, y)
            })
            .worst,
        );
    }
    out.push(("propagate", prop));
    out.push(("edge_product", prod));
    out
}

/// Worst relative error of the generator objective's parameter gradient on
/// a random 5-node instance.
pub fn generator_objective_error(seed: u64, kind: ModelKind, supervised: bool) -> f64 {
    let mut r = rng(seed);
    let n = 5;
    let mut edges = random_edges(&mut r, n, 0.5);
    if edges.is_empty() {
        edges.push((0, 1));
    }
    let g = Graph::new(n, edges, uniform(&mut r, n, 3, -1.0, 1.0)).unwrap();
    let model = TargetModel::new(kind, 3, 3, seed);
    let target = (kind == ModelKind::Node).then_some(seed as usize % n);
    let inst = Instance {
        id: 0,
        graph: g.clone(),
        target,
        map: None,
    };
    let mut r = rng(1000 + seed);
    let gen = Generator::<f64>::new(3, 3, 2, &mut r);
    let disc = Discriminator::<f64>::new(3, &mut r);
    let distilled = supervised.then(|| distill(&model, &g, target).unwrap());
    let item = Prepared::new(&gen, &model, inst, distilled.as_ref()).unwrap();
    let inputs: Vec<Matrix<f64>> = gen.params().into_iter().cloned().collect();
    check_gradients(&inputs, |t, p| {
        generator_objective(t, &gen, p, &disc, &model, &item, 2.0, 10.0).unwrap().0
    })
    .worst
}

/// Random graphs with at most 8 edges; label 1 when some node has
/// degree >= 3.
pub fn toy_graphs(count: usize, seed: u64) -> Vec<Graph<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(4..=7);
            let mut edges = random_edges(&mut r, n, 0.45);
            edges.truncate(8);
            if edges.is_empty() {
                edges.push((0, 1));
            }
            let mut deg = vec![0; n];
            for &(a, b) in &edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            let label = usize::from(deg.iter().any(|&d| d >= 3));
            Graph::new(n, edges, Matrix::filled(n, 2, 1.0)).unwrap().with_graph_label(label)
        })
        .collect()
}

/// Graph classifier trained briefly on [`toy_graphs`].
pub fn toy_model() -> TargetModel<f64> {
    let bundle = DatasetBundle {
        name: "toy".into(),
        task: Task::GraphClassification,
        graphs: toy_graphs(80, 1),
        class_count: 2,
        split: None,
    };
    let bundle = split_dataset(bundle, 0).unwrap();
    let cfg = TrainConfig {
        epochs: 60,
        patience: 60,
        ..TrainConfig::for_task(Task::GraphClassification)
    };
    train_target(&bundle, &cfg).unwrap().0
}

fn ce(model: &TargetModel<f64>, g: &Graph<f64>, class: usize) -> f64 {
    -model.forward(g, None).unwrap()[(0, class)].ln()
}

/// Loss increase from deleting each edge, by rebuilding the graph without it.
pub fn brute_force_deltas(model: &TargetModel<f64>, g: &Graph<f64>) -> Vec<f64> {
    let class = model.forward(g, None).unwrap().argmax_row(0);
    let base = ce(model, g, class);
    g.edges()
        .iter()
        .map(|&e| {
            let rest: Vec<_> = g.edges().iter().copied().filter(|&x| x != e).collect();
            ce(model, &g.edge_subgraph(&rest).unwrap(), class) - base
        })
        .collect()
}

/// Ids of graphs whose distilled top-1 edge differs from the brute-force
/// argmax (first maximal edge in id order, which is lexicographic).
pub fn distill_top1_mismatches(model: &TargetModel<f64>, graphs: &[Graph<f64>]) -> Vec<usize> {
    let mut bad = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let deltas = brute_force_deltas(model, g);
        let best = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = {
            let t = distill(model, g, None).unwrap();
            g.edges().iter().map(|&(a, b)| t.weights.get(a, b)).collect()
        };
        let ok = if best <= 0.0 {
            w.iter().all(|&x| x == 0.0)
        } else {
            let top = (0..w.len()).fold(0, |m, j| if w[j] > w[m] { j } else { m });
            let oracle = deltas.iter().position(|&d| d == best).unwrap();
            top == oracle && w[top] == 1.0
        };
        if !ok {
            bad.push(i);
        }
    }
    bad
}
