//! Metric bookkeeping: sweeps, records, CSV and empty test sets.

use advx::datasets::{gen_tree_cycles, split_dataset, Split};
use advx::evaluation::{accuracy_from_records, explanation_accuracy, reports_from_csv, reports_to_csv, sweep, CsvRow};
use advx::explainer::Generator;
use advx::gnn::{ModelKind, TargetModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup() -> (advx::Dataset64, advx::TargetModel64, Generator<f64>) {
    let bundle = split_dataset(gen_tree_cycles::<f64>(1).unwrap(), 1).unwrap();
    let model = TargetModel::new(ModelKind::Node, 10, 2, 3);
    let gen = Generator::new(10, 2, 3, &mut ChaCha8Rng::seed_from_u64(3));
    (bundle, model, gen)
}

#[test]
fn sweep_agrees_with_single_calls_and_records() {
    let (bundle, model, gen) = setup();
    let ks = [6, 7, 8, 9, 10];
    let reports = sweep(&model, &gen, &bundle, &ks).unwrap();
    assert_eq!(reports.iter().map(|r| r.k).collect::<Vec<_>>(), ks);
    for r in &reports {
        assert_eq!(r, &explanation_accuracy(&model, &gen, &bundle, r.k).unwrap());
        assert_eq!(r.accuracy, accuracy_from_records(&r.records));
        assert_eq!(r.n_test, bundle.explain_instances(advx::datasets::Part::Test).unwrap().len());
        assert!((0.0..=1.0).contains(&r.accuracy));
        assert_eq!(r.off_support(), 0);
        assert!(r.records.iter().all(|x| x.edges <= r.k && x.matched == (x.original == x.explained)));
    }
    let csv = reports_to_csv(&reports);
    assert_eq!(reports_from_csv(&csv).unwrap(), reports.iter().map(CsvRow::from).collect::<Vec<_>>());
}

#[test]
fn empty_test_split_is_rejected() {
    let (mut bundle, model, gen) = setup();
    let s = bundle.split.take().unwrap();
    bundle.split = Some(Split {
        train: s.train.iter().chain(&s.test).copied().collect(),
        validation: s.validation,
        test: Vec::new(),
    });
    assert!(sweep(&model, &gen, &bundle, &[6]).is_err());
    assert!(sweep(&model, &gen, &setup().0, &[]).is_err());
    assert!(sweep(&model, &gen, &setup().0, &[0]).is_err());
}
