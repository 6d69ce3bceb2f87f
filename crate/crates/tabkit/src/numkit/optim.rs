//! First-order optimizers and epoch batching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::rng::RngStream;

// Adam constants are fixed, not configurable.
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// How an epoch's samples are grouped into gradient steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchStrategy {
    Batch,
    MiniBatch(usize),
    Online,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OptKind {
    Sgd,
    Adam,
}

/// Optimizer with internal state; one instance per parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    kind: OptKind,
    pub learning_rate: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    pub step_count: u64,
}

impl Optimizer {
    pub fn sgd(learning_rate: f64) -> Self {
        Optimizer {
            kind: OptKind::Sgd,
            learning_rate,
            m: Vec::new(),
            v: Vec::new(),
            step_count: 0,
        }
    }

    pub fn adam(learning_rate: f64) -> Self {
        Optimizer {
            kind: OptKind::Adam,
            learning_rate,
            m: Vec::new(),
            v: Vec::new(),
            step_count: 0,
        }
    }

    /// One in-place update of `params` from `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch(format!(
                "optimizer step: {} params vs {} grads",
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient component {i}")));
        }
        match self.kind {
            OptKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= self.learning_rate * g;
                }
                self.step_count += 1;
            }
            OptKind::Adam => {
                if self.m.is_empty() {
                    self.m = vec![0.0; params.len()];
                    self.v = vec![0.0; params.len()];
                } else if self.m.len() != params.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "optimizer moments sized {} but params sized {}",
                        self.m.len(),
                        params.len()
                    )));
                }
                self.step_count += 1;
                let t = self.step_count as f64;
                let bc1 = 1.0 - BETA1.powf(t);
                let bc2 = 1.0 - BETA2.powf(t);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
                    self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
                    let m_hat = self.m[i] / bc1;
                    let v_hat = self.v[i] / bc2;
                    params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + EPS);
                }
            }
        }
        Ok(())
    }
}

/// Index batches for one epoch. `batch` keeps 0..n in order; the other
/// strategies shuffle first. A mini-batch size of 0 is an error; a size
/// of n or more degenerates to one (shuffled) batch.
pub fn epoch_schedule(
    n: usize,
    strategy: BatchStrategy,
    rng: &mut RngStream,
) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::EmptyDataset("epoch over zero samples".into()));
    }
    match strategy {
        BatchStrategy::Batch => Ok(vec![(0..n).collect()]),
        BatchStrategy::MiniBatch(k) => {
            if k == 0 {
                return Err(Error::Usage("mini-batch size must be at least 1".into()));
            }
            let idx = rng.permutation(n);
            Ok(idx.chunks(k).map(|c| c.to_vec()).collect())
        }
        BatchStrategy::Online => Ok(rng.permutation(n).into_iter().map(|i| vec![i]).collect()),
    }
}
