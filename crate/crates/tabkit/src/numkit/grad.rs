//! Numerical gradients by central differences.

use crate::error::{Error, Result};

/// Step size used when callers have no reason to pick their own.
pub const DEFAULT_H: f64 = 1e-6;

/// Central-difference gradient of `f` at `x`: (f(x+h·e_i) − f(x−h·e_i)) / 2h.
pub fn finite_diff_grad<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::Usage(format!("step size must be positive, got {h}")));
    }
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective at perturbed coordinate {i}"
            )));
        }
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let g = finite_diff_grad(f, &[1.0, -2.0, 0.5], DEFAULT_H).unwrap();
        let want = [2.0, -4.0, 1.0];
        for (gi, wi) in g.iter().zip(want) {
            assert!((gi - wi).abs() < 1e-6, "{gi} vs {wi}");
        }
    }

    #[test]
    fn constant_gradient_is_zero() {
        let g = finite_diff_grad(|_| 42.0, &[3.0, 4.0], DEFAULT_H).unwrap();
        assert!(g.iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn product_gradient() {
        let f = |x: &[f64]| x[0] * x[1];
        let g = finite_diff_grad(f, &[2.0, 3.0], DEFAULT_H).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-6);
        assert!((g[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn transcendental_gradient() {
        // f = sin(x0) + exp(x1); grad = (cos(x0), exp(x1))
        let f = |x: &[f64]| x[0].sin() + x[1].exp();
        let x = [0.7, -0.3];
        let g = finite_diff_grad(f, &x, DEFAULT_H).unwrap();
        assert!((g[0] - x[0].cos()).abs() < 1e-8);
        assert!((g[1] - x[1].exp()).abs() < 1e-8);
    }

    #[test]
    fn nonfinite_objective_rejected() {
        let f = |x: &[f64]| (-x[0]).ln(); // NaN for positive probe
        assert!(finite_diff_grad(f, &[0.5], DEFAULT_H).is_err());
    }

    #[test]
    fn bad_step_rejected() {
        assert!(finite_diff_grad(|_| 0.0, &[1.0], 0.0).is_err());
        assert!(finite_diff_grad(|_| 0.0, &[1.0], -1e-6).is_err());
    }
}
