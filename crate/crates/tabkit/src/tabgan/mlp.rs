//! Fully-connected nets: ReLU hidden layers, linear output, manual
//! backprop. Parameters flatten to a single vector per net so one
//! optimizer instance owns each net's state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Optimizer, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub widths: Vec<usize>,
    /// weights[l] is widths[l] × widths[l+1].
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// He-scaled init for layers feeding a ReLU, Xavier for the linear
    /// output layer; biases start at zero.
    pub fn init(widths: &[usize], rng: &mut RngStream) -> Result<Mlp> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Usage(format!(
                "net needs at least two nonzero layer widths, got {widths:?}"
            )));
        }
        let last = widths.len() - 2;
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for (l, pair) in widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let std = if l == last {
                (1.0 / fan_in as f64).sqrt()
            } else {
                (2.0 / fan_in as f64).sqrt()
            };
            weights.push(Matrix::from_fn(fan_in, fan_out, |_, _| {
                rng.normal() * std
            }));
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Mlp {
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.widths
            .windows(2)
            .map(|p| p[0] * p[1] + p[1])
            .sum()
    }

    /// Per-layer activations: trace[0] is the input, trace[L] the linear
    /// output, everything between post-ReLU.
    pub fn forward_trace(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        if x.n_cols() != self.n_inputs() {
            return Err(Error::ShapeMismatch(format!(
                "net expects {} inputs, got {}",
                self.n_inputs(),
                x.n_cols()
            )));
        }
        let n_layers = self.weights.len();
        let mut trace = Vec::with_capacity(n_layers + 1);
        trace.push(x.clone());
        for l in 0..n_layers {
            let mut z = trace[l].matmul(&self.weights[l])?;
            for i in 0..z.n_rows() {
                let row = z.row_mut(i);
                for (v, b) in row.iter_mut().zip(&self.biases[l]) {
                    *v += b;
                    if l + 1 < n_layers && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            trace.push(z);
        }
        Ok(trace)
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_trace(x)?.pop().unwrap())
    }

    /// Backprop `d_out` = ∂L/∂output through a forward trace. Returns the
    /// flat parameter gradient (same layout as [`Mlp::params_flat`]) and
    /// ∂L/∂input, which chains the discriminator into the generator.
    pub fn backward(&self, trace: &[Matrix], d_out: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        let n_layers = self.weights.len();
        if trace.len() != n_layers + 1 {
            return Err(Error::ShapeMismatch(format!(
                "trace has {} stages for a {}-layer net",
                trace.len(),
                n_layers
            )));
        }
        let mut layer_grads: Vec<(Matrix, Vec<f64>)> = Vec::with_capacity(n_layers);
        let mut delta = d_out.clone();
        for l in (0..n_layers).rev() {
            let dw = trace[l].transpose().matmul(&delta)?;
            let mut db = vec![0.0; self.biases[l].len()];
            for i in 0..delta.n_rows() {
                for (b, v) in db.iter_mut().zip(delta.row(i)) {
                    *b += v;
                }
            }
            let mut d_prev = delta.matmul(&self.weights[l].transpose())?;
            if l > 0 {
                // ReLU gate: the stored activation is already rectified.
                for i in 0..d_prev.n_rows() {
                    let act = trace[l].row(i).to_vec();
                    for (g, a) in d_prev.row_mut(i).iter_mut().zip(act) {
                        if a <= 0.0 {
                            *g = 0.0;
                        }
                    }
                }
            }
            layer_grads.push((dw, db));
            delta = d_prev;
        }
        layer_grads.reverse();
        let mut flat = Vec::with_capacity(self.n_params());
        for (dw, db) in layer_grads {
            flat.extend_from_slice(dw.data());
            flat.extend_from_slice(&db);
        }
        Ok((flat, delta))
    }

    /// Layer-major layout: weight matrix row-major, then its bias vector.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w.data());
            flat.extend_from_slice(b);
        }
        flat
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters for a net with {}",
                flat.len(),
                self.n_params()
            )));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let nw = w.n_rows() * w.n_cols();
            w.data_mut().copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = b.len();
            b.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    /// One optimizer update from a flat gradient.
    pub fn apply_step(&mut self, opt: &mut Optimizer, grads: &[f64]) -> Result<()> {
        let mut params = self.params_flat();
        opt.step(&mut params, grads)?;
        self.set_params_flat(&params)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    // log(1 + e^x) without overflow on either tail.
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Mean binary cross-entropy on logits, plus ∂loss/∂logit. Targets are
/// 0/1 reals; logits an n×1 column.
pub fn bce_with_logits(logits: &Matrix, targets: &[f64]) -> Result<(f64, Matrix)> {
    if logits.n_cols() != 1 || logits.n_rows() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} logits vs {} targets",
            logits.n_rows(),
            logits.n_cols(),
            targets.len()
        )));
    }
    let n = targets.len() as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(logits.n_rows(), 1);
    for (i, &t) in targets.iter().enumerate() {
        let z = logits.get(i, 0);
        loss += softplus(z) - t * z;
        grad.set(i, 0, (sigmoid(z) - t) / n);
    }
    Ok((loss / n, grad))
}

/// Non-saturating generator objective: mean −log σ(logit) over fakes,
/// plus ∂loss/∂logit.
pub fn nonsaturating_loss(logits: &Matrix) -> Result<(f64, Matrix)> {
    if logits.n_cols() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "expected an n×1 logit column, got {} cols",
            logits.n_cols()
        )));
    }
    let n = logits.n_rows() as f64;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(logits.n_rows(), 1);
    for i in 0..logits.n_rows() {
        let z = logits.get(i, 0);
        loss += softplus(-z);
        grad.set(i, 0, (sigmoid(z) - 1.0) / n);
    }
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::finite_diff_grad;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    fn micro_net(widths: &[usize], seed: u64) -> Mlp {
        Mlp::init(widths, &mut RngStream::seeded(seed)).unwrap()
    }

    #[test]
    fn forward_shapes_and_relu_gating() {
        let net = micro_net(&[3, 5, 2], 7);
        let x = Matrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 * 0.1 - 0.5);
        let out = net.forward(&x).unwrap();
        assert_eq!((out.n_rows(), out.n_cols()), (4, 2));
        assert!(net.forward(&Matrix::zeros(1, 2)).is_err());

        // All-negative first-layer weights and positive input force every
        // hidden unit to zero; with zero biases the output must be exactly 0.
        let mut gated = net.clone();
        for w in gated.weights[0].data_mut().iter_mut() {
            *w = -1.0;
        }
        let ones = Matrix::from_fn(1, 3, |_, _| 1.0);
        let out = gated.forward(&ones).unwrap();
        assert_eq!(out.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn params_flat_round_trip() {
        let mut net = micro_net(&[4, 3, 2], 1);
        let flat = net.params_flat();
        assert_eq!(flat.len(), net.n_params());
        let mut bumped = flat.clone();
        for v in &mut bumped {
            *v += 1.0;
        }
        net.set_params_flat(&bumped).unwrap();
        assert_eq!(net.params_flat(), bumped);
        assert!(net.set_params_flat(&bumped[1..]).is_err());
    }

    #[test]
    fn bce_matches_hand_values() {
        // logit 0 → softplus(0) = ln 2 regardless of target.
        let logits = Matrix::from_fn(2, 1, |_, _| 0.0);
        let (loss, grad) = bce_with_logits(&logits, &[1.0, 0.0]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((grad.get(0, 0) - (-0.25)).abs() < 1e-12);
        assert!((grad.get(1, 0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bce_gradient_matches_finite_difference() {
        let net = micro_net(&[2, 3, 2, 1], 21);
        let x = Matrix::from_rows(vec![vec![0.7, -1.3], vec![-0.4, 0.9]]).unwrap();
        let targets = [1.0, 0.0];
        let trace = net.forward_trace(&x).unwrap();
        let (_, dlogit) = bce_with_logits(trace.last().unwrap(), &targets).unwrap();
        let (analytic, _) = net.backward(&trace, &dlogit).unwrap();

        let loss_at = |p: &[f64]| {
            let mut probe = net.clone();
            probe.set_params_flat(p).unwrap();
            let out = probe.forward(&x).unwrap();
            bce_with_logits(&out, &targets).unwrap().0
        };
        let numeric = finite_diff_grad(loss_at, &net.params_flat(), 1e-6).unwrap();
        let worst = analytic
            .iter()
            .zip(&numeric)
            .map(|(&a, &b)| rel_err(a, b))
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn input_gradient_matches_finite_difference() {
        let net = micro_net(&[3, 4, 1], 5);
        let x0 = vec![0.3, -0.8, 1.1];
        let loss_at_input = |xs: &[f64]| {
            let x = Matrix::from_rows(vec![xs.to_vec()]).unwrap();
            let out = net.forward(&x).unwrap();
            nonsaturating_loss(&out).unwrap().0
        };
        let x = Matrix::from_rows(vec![x0.clone()]).unwrap();
        let trace = net.forward_trace(&x).unwrap();
        let (_, dlogit) = nonsaturating_loss(trace.last().unwrap()).unwrap();
        let (_, d_input) = net.backward(&trace, &dlogit).unwrap();
        let numeric = finite_diff_grad(loss_at_input, &x0, 1e-6).unwrap();
        for (a, b) in d_input.row(0).iter().zip(&numeric) {
            assert!(rel_err(*a, *b) < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert!(sigmoid(-800.0) > 0.0 || sigmoid(-800.0) == 0.0);
        assert!(sigmoid(-800.0).is_finite());
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        // softplus stays finite where exp would overflow
        let (loss, _) = nonsaturating_loss(&Matrix::from_fn(1, 1, |_, _| -750.0)).unwrap();
        assert!(loss.is_finite() && loss > 700.0);
    }

    #[test]
    fn init_rejects_degenerate_widths() {
        let mut rng = RngStream::seeded(0);
        assert!(Mlp::init(&[5], &mut rng).is_err());
        assert!(Mlp::init(&[5, 0, 2], &mut rng).is_err());
    }
}
