use std::sync::Arc;

use crate::autodiff::matrix::{gemm_nt_acc, gemm_tn_acc, Matrix};
use crate::autodiff::topology::Topology;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op<T> {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    AddBias(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Log(Var),
    LogSigmoid(Var),
    Softmax(Var),
    MeanRows(Var),
    Mean(Var),
    MaskMul(Var, Matrix<T>),
    SelectRows(Var, Vec<usize>),
    Mse(Var, Var),
    BceWithLogits(Var, Matrix<T>),
    SoftmaxCrossEntropy {
        logits: Var,
        rows: Vec<usize>,
        labels: Vec<usize>,
    },
    Propagate {
        weights: Var,
        h: Var,
        topo: Arc<Topology>,
        inv_sqrt_deg: Vec<T>,
    },
    EdgeProduct(Var, Arc<Topology>),
}

struct Node<T> {
    value: Matrix<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Records primitive operations in creation order (which is a topological
/// order) so that [`Tape::backward`] can replay them in reverse.
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
    consumed: bool,
}

/// Result of a backward pass: one optional gradient per recorded value.
pub struct Gradients<T> {
    grads: Vec<Option<Matrix<T>>>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient of the loss w.r.t. `v`; `None` when `v` does not influence it
    /// or was recorded as a constant.
    pub fn get(&self, v: Var) -> Option<&Matrix<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Like [`Gradients::get`] but yields zeros of the given shape.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Matrix<T> {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            consumed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Differentiable input (a parameter).
    pub fn param(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Input that never receives a gradient.
    pub fn constant(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    fn push(&mut self, value: Matrix<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::shape(op, sa, sb));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::MatMul(a, b), ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::Add(a, b), ng))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::Sub(a, b), ng))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::Mul(a, b), ng))
    }

    pub fn scale(&mut self, a: Var, c: T) -> Var {
        let value = self.value(a).map(|x| x * c);
        let ng = self.ng(a);
        self.push(value, Op::Scale(a, c), ng)
    }

    /// Adds the `1 x m` row `bias` to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(bias));
        if sb.0 != 1 || sb.1 != sa.1 {
            return Err(Error::shape("add_bias", sa, sb));
        }
        let mut value = self.value(a).clone();
        let b = self.value(bias).data().to_vec();
        for i in 0..sa.0 {
            for (x, &y) in value.row_mut(i).iter_mut().zip(&b) {
                *x = *x + y;
            }
        }
        let ng = self.ng(a) || self.ng(bias);
        Ok(self.push(value, Op::AddBias(a, bias), ng))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x.max(T::zero()));
        let ng = self.ng(a);
        self.push(value, Op::Relu(a), ng)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        let ng = self.ng(a);
        self.push(value, Op::Sigmoid(a), ng)
    }

    /// Natural log; inputs are clamped below at the smallest positive normal
    /// so the result stays finite.
    pub fn log(&mut self, a: Var) -> Var {
        let tiny = T::min_positive_value();
        let value = self.value(a).map(|x| x.max(tiny).ln());
        let ng = self.ng(a);
        self.push(value, Op::Log(a), ng)
    }

    /// `log(sigmoid(a))` evaluated without overflow.
    pub fn log_sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(log_sigmoid);
        let ng = self.ng(a);
        self.push(value, Op::LogSigmoid(a), ng)
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: Var) -> Var {
        let value = softmax_rows(self.value(a));
        let ng = self.ng(a);
        self.push(value, Op::Softmax(a), ng)
    }

    /// Column means: `n x m -> 1 x m`.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let (n, m) = self.shape(a);
        if n == 0 {
            return Err(Error::shape("mean_rows", (n, m), (1, m)));
        }
        let src = self.value(a);
        let mut value = Matrix::zeros(1, m);
        for i in 0..n {
            for (o, &x) in value.data_mut().iter_mut().zip(src.row(i)) {
                *o = *o + x;
            }
        }
        let inv = T::one() / T::of_usize(n);
        let value = value.map(|x| x * inv);
        let ng = self.ng(a);
        Ok(self.push(value, Op::MeanRows(a), ng))
    }

    /// Mean of all entries, as a 1x1 value.
    pub fn mean(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let value = Matrix::scalar(v.sum() / T::of_usize(v.data().len().max(1)));
        let ng = self.ng(a);
        self.push(value, Op::Mean(a), ng)
    }

    /// Elementwise product with a constant mask.
    pub fn mask_mul(&mut self, a: Var, mask: Matrix<T>) -> Result<Var> {
        if self.shape(a) != mask.shape() {
            return Err(Error::shape("mask_mul", self.shape(a), mask.shape()));
        }
        let value = self.value(a).zip_map(&mask, |x, m| x * m);
        let ng = self.ng(a);
        Ok(self.push(value, Op::MaskMul(a, mask), ng))
    }

    pub fn select_rows(&mut self, a: Var, rows: &[usize]) -> Result<Var> {
        let (n, m) = self.shape(a);
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::shape("select_rows", (n, m), (bad, m)));
        }
        let src = self.value(a);
        let mut data = Vec::with_capacity(rows.len() * m);
        for &r in rows {
            data.extend_from_slice(src.row(r));
        }
        let value = Matrix::from_vec(rows.len(), m, data)?;
        let ng = self.ng(a);
        Ok(self.push(value, Op::SelectRows(a, rows.to_vec()), ng))
    }

    /// Mean squared error over all entries.
    pub fn mse(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mse", a, b)?;
        let (va, vb) = (self.value(a), self.value(b));
        let n = T::of_usize(va.data().len().max(1));
        let s: T = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum();
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(Matrix::scalar(s / n), Op::Mse(a, b), ng))
    }

    /// Mean binary cross-entropy between `sigmoid(logits)` and `targets`.
    pub fn bce_with_logits(&mut self, logits: Var, targets: Matrix<T>) -> Result<Var> {
        if self.shape(logits) != targets.shape() {
            return Err(Error::shape("bce", self.shape(logits), targets.shape()));
        }
        let x = self.value(logits);
        let n = T::of_usize(x.data().len().max(1));
        let s: T = x
            .data()
            .iter()
            .zip(targets.data())
            .map(|(&x, &t)| x.max(T::zero()) - x * t + (-x.abs()).exp().ln_1p())
            .sum();
        let ng = self.ng(logits);
        Ok(self.push(
            Matrix::scalar(s / n),
            Op::BceWithLogits(logits, targets),
            ng,
        ))
    }

    /// Mean over `rows` of `-log softmax(logits[row])[label]`.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: Var,
        rows: &[usize],
        labels: &[usize],
    ) -> Result<Var> {
        let (n, c) = self.shape(logits);
        if rows.len() != labels.len() || rows.is_empty() {
            return Err(Error::shape("softmax_cross_entropy", (n, c), (rows.len(), labels.len())));
        }
        if rows.iter().any(|&r| r >= n) || labels.iter().any(|&l| l >= c) {
            return Err(Error::InvalidArgument(format!(
                "softmax_cross_entropy: row or label out of range for {n}x{c} logits"
            )));
        }
        let x = self.value(logits);
        let mut s = T::zero();
        for (&r, &l) in rows.iter().zip(labels) {
            let row = x.row(r);
            s = s + log_sum_exp(row) - row[l];
        }
        let value = Matrix::scalar(s / T::of_usize(rows.len()));
        let ng = self.ng(logits);
        Ok(self.push(
            value,
            Op::SoftmaxCrossEntropy {
                logits,
                rows: rows.to_vec(),
                labels: labels.to_vec(),
            },
            ng,
        ))
    }

    /// Graph convolution aggregation `D^{-1/2}(A_w + I)D^{-1/2} h`, where
    /// `A_w` places `weights[e]` on both entries of undirected edge `e` and
    /// `D` is the row-sum degree of `A_w + I`.
    ///
    /// `weights` is `E x 1`; weights must be non-negative.
    pub fn propagate(&mut self, weights: Var, h: Var, topo: &Arc<Topology>) -> Result<Var> {
        let (e, n) = (topo.edge_count(), topo.node_count());
        if self.shape(weights) != (e, 1) {
            return Err(Error::shape("propagate(weights)", self.shape(weights), (e, 1)));
        }
        if self.shape(h).0 != n {
            return Err(Error::shape("propagate(h)", self.shape(h), (n, self.shape(h).1)));
        }
        let w = self.value(weights).data();
        let mut deg = vec![T::one(); n];
        for (v, d) in deg.iter_mut().enumerate() {
            for &(_, eid) in topo.neighbors(v) {
                *d = *d + w[eid];
            }
        }
        let inv_sqrt_deg: Vec<T> = deg.iter().map(|&d| d.sqrt().recip()).collect();
        let hv = self.value(h);
        let f = hv.cols();
        let mut out = Matrix::zeros(n, f);
        for v in 0..n {
            let sv = inv_sqrt_deg[v];
            let orow = out.row_mut(v);
            let self_coef = sv * sv;
            for (o, &x) in orow.iter_mut().zip(hv.row(v)) {
                *o = self_coef * x;
            }
            for &(u, eid) in topo.neighbors(v) {
                let coef = w[eid] * sv * inv_sqrt_deg[u];
                if coef == T::zero() {
                    continue;
                }
                for (o, &x) in orow.iter_mut().zip(hv.row(u)) {
                    *o = *o + coef * x;
                }
            }
        }
        let ng = self.ng(weights) || self.ng(h);
        Ok(self.push(
            out,
            Op::Propagate {
                weights,
                h,
                topo: Arc::clone(topo),
                inv_sqrt_deg,
            },
            ng,
        ))
    }

    /// Per-edge features `z[lo] * z[hi]` (elementwise), one row per edge.
    pub fn edge_product(&mut self, z: Var, topo: &Arc<Topology>) -> Result<Var> {
        let (n, f) = self.shape(z);
        if n != topo.node_count() {
            return Err(Error::shape("edge_product", (n, f), (topo.node_count(), f)));
        }
        let zv = self.value(z);
        let mut out = Matrix::zeros(topo.edge_count(), f);
        for (e, &(a, b)) in topo.edges().iter().enumerate() {
            for ((o, &x), &y) in out.row_mut(e).iter_mut().zip(zv.row(a)).zip(zv.row(b)) {
                *o = x * y;
            }
        }
        let ng = self.ng(z);
        Ok(self.push(out, Op::EdgeProduct(z, Arc::clone(topo)), ng))
    }

    /// Reverse pass from a 1x1 `loss`. A tape can be differentiated once;
    /// a second call is rejected with [`Error::BackwardTwice`].
    pub fn backward(&mut self, loss: Var) -> Result<Gradients<T>> {
        let shape = self.shape(loss);
        if shape != (1, 1) {
            return Err(Error::NonScalarLoss(shape.0, shape.1));
        }
        if self.consumed {
            return Err(Error::BackwardTwice);
        }
        self.consumed = true;

        let mut grads: Vec<Option<Matrix<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::scalar(T::one()));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.needs_grad {
                grads[idx] = Some(g);
                continue;
            }
            self.backprop_node(node, &g, &mut grads);
            grads[idx] = Some(g);
        }
        // constants never report a gradient
        for (slot, node) in grads.iter_mut().zip(&self.nodes) {
            if !node.needs_grad {
                *slot = None;
            }
        }
        Ok(Gradients { grads })
    }

    fn backprop_node(&self, node: &Node<T>, g: &Matrix<T>, grads: &mut [Option<Matrix<T>>]) {
        let val = |v: Var| &self.nodes[v.0].value;
        let wants = |v: Var| self.nodes[v.0].needs_grad;
        let y = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if wants(*a) {
                    let mut ga = Matrix::zeros(val(*a).rows(), val(*a).cols());
                    gemm_nt_acc(g, val(*b), &mut ga);
                    acc(grads, *a, ga);
                }
                if wants(*b) {
                    let mut gb = Matrix::zeros(val(*b).rows(), val(*b).cols());
                    gemm_tn_acc(val(*a), g, &mut gb);
                    acc(grads, *b, gb);
                }
            }
            Op::Add(a, b) => {
                acc_if(grads, wants(*a), *a, || g.clone());
                acc_if(grads, wants(*b), *b, || g.clone());
            }
            Op::Sub(a, b) => {
                acc_if(grads, wants(*a), *a, || g.clone());
                acc_if(grads, wants(*b), *b, || g.map(|x| -x));
            }
            Op::Mul(a, b) => {
                acc_if(grads, wants(*a), *a, || g.zip_map(val(*b), |x, y| x * y));
                acc_if(grads, wants(*b), *b, || g.zip_map(val(*a), |x, y| x * y));
            }
            Op::Scale(a, c) => acc_if(grads, wants(*a), *a, || g.map(|x| x * *c)),
            Op::AddBias(a, b) => {
                acc_if(grads, wants(*a), *a, || g.clone());
                if wants(*b) {
                    let mut gb = Matrix::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for (o, &x) in gb.data_mut().iter_mut().zip(g.row(i)) {
                            *o = *o + x;
                        }
                    }
                    acc(grads, *b, gb);
                }
            }
            Op::Relu(a) => acc_if(grads, wants(*a), *a, || {
                g.zip_map(val(*a), |gx, x| if x > T::zero() { gx } else { T::zero() })
            }),
            Op::Sigmoid(a) => acc_if(grads, wants(*a), *a, || {
                g.zip_map(y, |gx, s| gx * s * (T::one() - s))
            }),
            Op::Log(a) => {
                let tiny = T::min_positive_value();
                acc_if(grads, wants(*a), *a, || g.zip_map(val(*a), |gx, x| gx / x.max(tiny)))
            }
            Op::LogSigmoid(a) => acc_if(grads, wants(*a), *a, || {
                g.zip_map(val(*a), |gx, x| gx * sigmoid(-x))
            }),
            Op::Softmax(a) => {
                if wants(*a) {
                    let mut ga = Matrix::zeros(y.rows(), y.cols());
                    for i in 0..y.rows() {
                        let (yr, gr) = (y.row(i), g.row(i));
                        let dot: T = yr.iter().zip(gr).map(|(&p, &q)| p * q).sum();
                        for ((o, &p), &q) in ga.row_mut(i).iter_mut().zip(yr).zip(gr) {
                            *o = p * (q - dot);
                        }
                    }
                    acc(grads, *a, ga);
                }
            }
            Op::MeanRows(a) => {
                if wants(*a) {
                    let (n, m) = val(*a).shape();
                    let inv = T::one() / T::of_usize(n);
                    let mut ga = Matrix::zeros(n, m);
                    for i in 0..n {
                        for (o, &x) in ga.row_mut(i).iter_mut().zip(g.data()) {
                            *o = x * inv;
                        }
                    }
                    acc(grads, *a, ga);
                }
            }
            Op::Mean(a) => acc_if(grads, wants(*a), *a, || {
                let (n, m) = val(*a).shape();
                Matrix::filled(n, m, g.item() / T::of_usize((n * m).max(1)))
            }),
            Op::MaskMul(a, mask) => {
                acc_if(grads, wants(*a), *a, || g.zip_map(mask, |x, m| x * m))
            }
            Op::SelectRows(a, rows) => {
                if wants(*a) {
                    let (n, m) = val(*a).shape();
                    let mut ga = Matrix::zeros(n, m);
                    for (k, &r) in rows.iter().enumerate() {
                        for (o, &x) in ga.row_mut(r).iter_mut().zip(g.row(k)) {
                            *o = *o + x;
                        }
                    }
                    acc(grads, *a, ga);
                }
            }
            Op::Mse(a, b) => {
                let (va, vb) = (val(*a), val(*b));
                let k = T::of(2.0) * g.item() / T::of_usize(va.data().len().max(1));
                let diff = va.zip_map(vb, |x, y| (x - y) * k);
                if wants(*b) {
                    acc(grads, *b, diff.map(|x| -x));
                }
                acc_if(grads, wants(*a), *a, || diff);
            }
            Op::BceWithLogits(x, t) => acc_if(grads, wants(*x), *x, || {
                let k = g.item() / T::of_usize(t.data().len().max(1));
                val(*x).zip_map(t, |x, t| (sigmoid(x) - t) * k)
            }),
            Op::SoftmaxCrossEntropy {
                logits,
                rows,
                labels,
            } => {
                if wants(*logits) {
                    let x = val(*logits);
                    let k = g.item() / T::of_usize(rows.len());
                    let mut gx = Matrix::zeros(x.rows(), x.cols());
                    for (&r, &l) in rows.iter().zip(labels) {
                        let row = x.row(r);
                        let lse = log_sum_exp(row);
                        let out = gx.row_mut(r);
                        for (j, (o, &v)) in out.iter_mut().zip(row).enumerate() {
                            let p = (v - lse).exp();
                            let onehot = if j == l { T::one() } else { T::zero() };
                            *o = *o + (p - onehot) * k;
                        }
                    }
                    acc(grads, *logits, gx);
                }
            }
            Op::Propagate {
                weights,
                h,
                topo,
                inv_sqrt_deg: s,
            } => {
                let w = val(*weights).data();
                let hv = val(*h);
                let n = topo.node_count();
                if wants(*h) {
                    // the normalized operator is symmetric, so the adjoint is itself
                    let mut gh = Matrix::zeros(n, hv.cols());
                    for v in 0..n {
                        let sv = s[v];
                        let orow = gh.row_mut(v);
                        for (o, &x) in orow.iter_mut().zip(g.row(v)) {
                            *o = sv * sv * x;
                        }
                        for &(u, eid) in topo.neighbors(v) {
                            let coef = w[eid] * sv * s[u];
                            for (o, &x) in orow.iter_mut().zip(g.row(u)) {
                                *o = *o + coef * x;
                            }
                        }
                    }
                    acc(grads, *h, gh);
                }
                if wants(*weights) {
                    let dot = |a: &[T], b: &[T]| -> T { a.iter().zip(b).map(|(&x, &y)| x * y).sum() };
                    // dL/ds_v, then chain through s_v = d_v^{-1/2}
                    let mut d_deg = vec![T::zero(); n];
                    for v in 0..n {
                        let mut ds = T::of(2.0) * s[v] * dot(g.row(v), hv.row(v));
                        for &(u, eid) in topo.neighbors(v) {
                            ds = ds
                                + w[eid] * s[u] * (dot(g.row(v), hv.row(u)) + dot(g.row(u), hv.row(v)));
                        }
                        d_deg[v] = ds * T::of(-0.5) * s[v] * s[v] * s[v];
                    }
                    let mut gw = Matrix::zeros(topo.edge_count(), 1);
                    for (eid, &(a, b)) in topo.edges().iter().enumerate() {
                        let direct = s[a] * s[b] * (dot(g.row(a), hv.row(b)) + dot(g.row(b), hv.row(a)));
                        gw.data_mut()[eid] = direct + d_deg[a] + d_deg[b];
                    }
                    acc(grads, *weights, gw);
                }
            }
            Op::EdgeProduct(z, topo) => {
                if wants(*z) {
                    let zv = val(*z);
                    let mut gz = Matrix::zeros(zv.rows(), zv.cols());
                    for (e, &(a, b)) in topo.edges().iter().enumerate() {
                        let ge = g.row(e);
                        for k in 0..zv.cols() {
                            gz[(a, k)] = gz[(a, k)] + ge[k] * zv[(b, k)];
                            gz[(b, k)] = gz[(b, k)] + ge[k] * zv[(a, k)];
                        }
                    }
                    acc(grads, *z, gz);
                }
            }
        }
    }
}

fn acc<T: Scalar>(grads: &mut [Option<Matrix<T>>], v: Var, g: Matrix<T>) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

fn acc_if<T: Scalar>(
    grads: &mut [Option<Matrix<T>>],
    wanted: bool,
    v: Var,
    g: impl FnOnce() -> Matrix<T>,
) {
    if wanted {
        acc(grads, v, g());
    }
}

pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `log(sigmoid(x)) = -softplus(-x)`.
pub fn log_sigmoid<T: Scalar>(x: T) -> T {
    x.min(T::zero()) - (-x.abs()).exp().ln_1p()
}

pub fn log_sum_exp<T: Scalar>(row: &[T]) -> T {
    let m = row.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    m + row.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

pub fn softmax_rows<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    let mut out = x.clone();
    for i in 0..x.rows() {
        let row = out.row_mut(i);
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut z = T::zero();
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            z = z + *v;
        }
        for v in row.iter_mut() {
            *v = *v / z;
        }
    }
    out
}
