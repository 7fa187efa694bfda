//! Dense matrices with tape-based reverse-mode differentiation.
//!
//! Every network in the crate is written against [`Tape`]: parameters are
//! bound as leaves, primitives are recorded in order, and
//! [`Tape::backward`] walks the record once in reverse.

mod adam;
mod matrix;
mod tape;
mod topology;

pub use adam::Adam;
pub use matrix::Matrix;
pub use tape::{log_sigmoid, log_sum_exp, sigmoid, softmax_rows, Gradients, Tape, Var};
pub use topology::Topology;
