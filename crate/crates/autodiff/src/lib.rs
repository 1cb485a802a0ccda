//! Reverse-mode automatic differentiation over small dense tensors.
//!
//! A [`Graph`] records every operation of one forward pass. Calling
//! [`Graph::backward`] walks the recorded nodes in reverse order and returns
//! the gradient of a scalar output with respect to every node that requires
//! gradients. Graphs are single-use: build a fresh one for each forward pass
//! and drop it once gradients have been read.

pub mod checkpoint;
mod error;
pub mod gradcheck;
mod graph;
pub mod nn;
pub mod optim;
mod params;
mod tensor;

pub use error::{AutodiffError, Result};
pub use graph::{Gradients, Graph, Var};
pub use params::{ParamBinding, ParamGrads, ParamSet};
pub use tensor::Tensor;
