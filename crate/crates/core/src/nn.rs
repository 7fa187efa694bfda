//! Layers shared by the target model, the generator and the discriminator.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Matrix, Tape, Topology, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anything with an ordered list of trainable matrices.
pub trait Module<T: Scalar> {
    fn params(&self) -> Vec<&Matrix<T>>;
    fn params_mut(&mut self) -> Vec<&mut Matrix<T>>;

    /// Records every parameter on `tape`, as differentiable leaves when
    /// `trainable`, otherwise as constants.
    fn bind(&self, tape: &mut Tape<T>, trainable: bool) -> Vec<Var> {
        self.params()
            .into_iter()
            .map(|p| {
                if trainable {
                    tape.param(p.clone())
                } else {
                    tape.constant(p.clone())
                }
            })
            .collect()
    }

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.data().len()).sum()
    }
}

fn glorot<T: Scalar>(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix<T> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| T::of(rng.gen_range(-limit..limit))).collect();
    Matrix::from_vec(rows, cols, data).expect("sized")
}

/// `x W + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub weight: Matrix<T>,
    pub bias: Matrix<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        Dense {
            weight: glorot(fan_in, fan_out, rng),
            bias: Matrix::zeros(1, fan_out),
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense {
            weight: Matrix::zeros(fan_in, fan_out),
            bias: Matrix::zeros(1, fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.cols()
    }

    /// `p` holds this layer's two bound parameters.
    pub fn forward(tape: &mut Tape<T>, p: &[Var], x: Var) -> Result<Var> {
        let xw = tape.matmul(x, p[0])?;
        tape.add_bias(xw, p[1])
    }
}

impl<T: Scalar> Module<T> for Dense<T> {
    fn params(&self) -> Vec<&Matrix<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix<T>> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Graph convolution `Â H W + b`, where `Â` is the renormalized weighted
/// adjacency (see [`Tape::propagate`]).
#[derive(Clone, Debug, PartialEq)]
pub struct GcnLayer<T> {
    pub lin: Dense<T>,
}

impl<T: Scalar> GcnLayer<T> {
    pub fn new(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        GcnLayer {
            lin: Dense::new(fan_in, fan_out, rng),
        }
    }

    pub fn forward(
        tape: &mut Tape<T>,
        p: &[Var],
        h: Var,
        edge_weights: Var,
        topo: &Arc<Topology>,
    ) -> Result<Var> {
        // aggregate on the narrower side
        let (fan_in, fan_out) = tape.shape(p[0]);
        if fan_out < fan_in {
            let hw = tape.matmul(h, p[0])?;
            let agg = tape.propagate(edge_weights, hw, topo)?;
            tape.add_bias(agg, p[1])
        } else {
            let agg = tape.propagate(edge_weights, h, topo)?;
            Dense::forward(tape, p, agg)
        }
    }
}

impl<T: Scalar> Module<T> for GcnLayer<T> {
    fn params(&self) -> Vec<&Matrix<T>> {
        self.lin.params()
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix<T>> {
        self.lin.params_mut()
    }
}

/// Stack of graph convolutions with ReLU between layers. The last layer's
/// activation is controlled by `relu_last`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnStack<T> {
    pub layers: Vec<GcnLayer<T>>,
}

impl<T: Scalar> GcnStack<T> {
    /// `widths = [in, h1, ..., out]`.
    pub fn new(widths: &[usize], rng: &mut impl Rng) -> Self {
        GcnStack {
            layers: widths.windows(2).map(|w| GcnLayer::new(w[0], w[1], rng)).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.lin.fan_in())
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.lin.fan_out())
    }

    pub fn forward(
        &self,
        tape: &mut Tape<T>,
        p: &[Var],
        x: Var,
        edge_weights: Var,
        topo: &Arc<Topology>,
        relu_last: bool,
    ) -> Result<Var> {
        let mut h = x;
        for i in 0..self.layers.len() {
            h = GcnLayer::forward(tape, &p[2 * i..2 * i + 2], h, edge_weights, topo)?;
            if i + 1 < self.layers.len() || relu_last {
                h = tape.relu(h);
            }
        }
        Ok(h)
    }
}

impl<T: Scalar> Module<T> for GcnStack<T> {
    fn params(&self) -> Vec<&Matrix<T>> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix<T>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }
}

/// Serialized dense layer: shape plus row-major values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub shape: [usize; 2],
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerDoc {
    pub fn from_dense<T: Scalar>(d: &Dense<T>) -> Self {
        LayerDoc {
            shape: [d.fan_in(), d.fan_out()],
            weight: d.weight.data().iter().map(|x| x.as_f64()).collect(),
            bias: d.bias.data().iter().map(|x| x.as_f64()).collect(),
        }
    }

    pub fn to_dense<T: Scalar>(&self) -> Result<Dense<T>> {
        let [r, c] = self.shape;
        let conv = |v: &[f64]| v.iter().map(|&x| T::of(x)).collect::<Vec<T>>();
        if self.weight.len() != r * c || self.bias.len() != c {
            return Err(Error::InvalidArgument(format!("layer {r}x{c} has wrong parameter counts")));
        }
        Ok(Dense {
            weight: Matrix::from_vec(r, c, conv(&self.weight))?,
            bias: Matrix::from_vec(1, c, conv(&self.bias))?,
        })
    }
}

pub fn stack_to_docs<T: Scalar>(s: &GcnStack<T>) -> Vec<LayerDoc> {
    s.layers.iter().map(|l| LayerDoc::from_dense(&l.lin)).collect()
}

pub fn stack_from_docs<T: Scalar>(docs: &[LayerDoc]) -> Result<GcnStack<T>> {
    let layers = docs
        .iter()
        .map(|d| d.to_dense().map(|lin| GcnLayer { lin }))
        .collect::<Result<Vec<_>>>()?;
    if layers.windows(2).any(|w| w[0].lin.fan_out() != w[1].lin.fan_in()) {
        return Err(Error::InvalidArgument("layer shapes do not chain".into()));
    }
    Ok(GcnStack { layers })
}
