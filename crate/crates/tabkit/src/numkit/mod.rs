//! Numeric substrate: RNG streams, matrices, optimizers, gradients, statistics.

pub mod grad;
pub mod matrix;
pub mod optim;
pub mod rng;
pub mod solve;
pub mod stats;

pub use grad::{finite_diff_grad, DEFAULT_H};
pub use matrix::Matrix;
pub use optim::{epoch_schedule, BatchStrategy, Optimizer};
pub use rng::RngStream;
