use crate::autodiff::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Adam optimizer with bias-corrected moments and optional L2 weight decay
/// folded into the gradient.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    weight_decay: T,
    step: i32,
    m: Vec<Matrix<T>>,
    v: Vec<Matrix<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(lr: T, beta1: T, beta2: T, eps: T) -> Result<Self> {
        if !(lr > T::zero()) {
            return Err(Error::InvalidArgument(format!("learning rate must be > 0, got {lr}")));
        }
        Ok(Adam {
            lr,
            beta1,
            beta2,
            eps,
            weight_decay: T::zero(),
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        })
    }

    /// Adam with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn with_lr(lr: T) -> Result<Self> {
        Self::new(lr, T::of(0.9), T::of(0.999), T::of(1e-8))
    }

    pub fn weight_decay(mut self, wd: T) -> Self {
        self.weight_decay = wd;
        self
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    /// Applies one update. `params` and `grads` are matched by position and
    /// must keep the same order and shapes across calls.
    pub fn step(&mut self, params: &mut [&mut Matrix<T>], grads: &[Matrix<T>]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::InvalidArgument(format!(
                "adam: {} params but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        if self.m.is_empty() {
            self.m = params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
            self.v = self.m.clone();
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::shape("adam", p.shape(), g.shape()));
            }
        }
        self.step += 1;
        let one = T::one();
        let bc1 = one - self.beta1.powi(self.step);
        let bc2 = one - self.beta2.powi(self.step);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let pd = p.data_mut();
            for (i, x) in pd.iter_mut().enumerate() {
                let gi = g.data()[i] + self.weight_decay * *x;
                let mi = self.beta1 * m.data()[i] + (one - self.beta1) * gi;
                let vi = self.beta2 * v.data()[i] + (one - self.beta2) * gi * gi;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                let mhat = mi / bc1;
                let vhat = vi / bc2;
                *x = *x - self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
