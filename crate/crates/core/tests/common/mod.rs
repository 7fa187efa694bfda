#![allow(dead_code)]

pub mod cases;

use advx::autodiff::{Matrix, Tape, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

/// Below this magnitude a central difference is dominated by roundoff
/// (about eps * |loss| / FD_STEP ~ 1e-11), so errors are measured against
/// the floor instead of the gradient itself.
pub const FD_FLOOR: f64 = 1e-6;

/// Worst mismatch between an analytic gradient and the central difference,
/// as relative error, with magnitudes below [`FD_FLOOR`] raised to it.
#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    pub worst: f64,
    pub checked: usize,
}

impl FdReport {
    pub fn ok(&self, tol: f64) -> bool {
        self.worst <= tol
    }
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR)
}

/// Checks d(build)/d(inputs) against central differences. `build` records a
/// scalar loss on a fresh tape from leaves bound to `inputs`.
pub fn check_gradients<F>(inputs: &[Matrix<f64>], build: F) -> FdReport
where
    F: Fn(&mut Tape<f64>, &[Var]) -> Var,
{
    let eval = |vals: &[Matrix<f64>]| -> f64 {
        let mut t = Tape::new();
        let vars: Vec<Var> = vals.iter().map(|m| t.param(m.clone())).collect();
        let l = build(&mut t, &vars);
        t.value(l).item()
    };
    let mut t = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|m| t.param(m.clone())).collect();
    let loss = build(&mut t, &vars);
    let grads = t.backward(loss).unwrap();

    let mut worst = 0.0f64;
    let mut checked = 0;
    for (k, input) in inputs.iter().enumerate() {
        let g = grads.get_or_zeros(vars[k], input.shape());
        for idx in 0..input.data().len() {
            let at = |d: f64| {
                let mut v = inputs.to_vec();
                v[k].data_mut()[idx] += d;
                eval(&v)
            };
            let numeric = (at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(g.data()[idx], numeric));
            checked += 1;
        }
    }
    FdReport { worst, checked }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Random simple graph on `n` nodes with each pair present w.p. `p`.
pub fn random_edges(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}
