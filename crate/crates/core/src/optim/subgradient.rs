use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule")]
pub enum StepRule {
    /// `αₖ = scale / k`, `k = 1, 2, …`
    Harmonic { scale: f64 },
}

impl StepRule {
    pub fn step(&self, k: usize) -> f64 {
        match *self {
            StepRule::Harmonic { scale } => scale / k as f64,
        }
    }
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Harmonic { scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgradConfig {
    pub step_rule: StepRule,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for SubgradConfig {
    fn default() -> Self {
        Self {
            step_rule: StepRule::default(),
            grad_tol: 1e-2,
            max_iters: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradReport {
    pub iterations: usize,
    pub initial_value: f64,
    pub best_value: f64,
    pub best_iteration: usize,
    /// Best value seen after each iteration, starting with the initial one.
    pub best_trajectory: Vec<f64>,
    /// Norm of the subgradient at the last iterate.
    pub final_subgrad_norm: f64,
    pub converged: bool,
}

/// Subgradient method `xᵏ = xᵏ⁻¹ − αₖ gᵏ⁻¹` returning the best iterate seen.
pub fn subgradient_descent(
    mut objective: impl FnMut(&Matrix) -> Result<(f64, Matrix)>,
    x0: Matrix,
    cfg: &SubgradConfig,
) -> Result<(Matrix, SubgradReport)> {
    let (f0, mut g) = objective(&x0)?;
    check_finite(f0, &g, 0)?;
    let mut x = x0.clone();
    let (mut best_x, mut best_f, mut best_k) = (x0, f0, 0);
    let mut trajectory = vec![f0];
    let mut gnorm = g.frobenius_norm();
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=cfg.max_iters {
        if gnorm < cfg.grad_tol {
            converged = true;
            break;
        }
        x.axpy(-cfg.step_rule.step(k), &g)?;
        let (f, g_new) = objective(&x)?;
        check_finite(f, &g_new, k)?;
        g = g_new;
        gnorm = g.frobenius_norm();
        iterations = k;
        if f < best_f {
            best_f = f;
            best_x = x.clone();
            best_k = k;
        }
        trajectory.push(best_f);
    }
    if !converged && gnorm < cfg.grad_tol {
        converged = true;
    }
    Ok((
        best_x,
        SubgradReport {
            iterations,
            initial_value: f0,
            best_value: best_f,
            best_iteration: best_k,
            best_trajectory: trajectory,
            final_subgrad_norm: gnorm,
            converged,
        },
    ))
}

fn check_finite(f: f64, g: &Matrix, k: usize) -> Result<()> {
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::Numerical(format!("subgradient method: non-finite value at iteration {k}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_return_start() {
        let x0 = Matrix::filled(2, 2, 3.0);
        let cfg = SubgradConfig {
            max_iters: 0,
            ..SubgradConfig::default()
        };
        let (x, rep) = subgradient_descent(|x| Ok((x.dot(x)?, x.scaled(2.0))), x0.clone(), &cfg).unwrap();
        assert_eq!(x, x0);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn smooth_quadratic_approaches_target() {
        let a = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 4.0]]).unwrap();
        let obj = |x: &Matrix| {
            let d = x.sub(&a)?;
            Ok((0.5 * d.dot(&d)?, d))
        };
        let (x, rep) = subgradient_descent(obj, Matrix::zeros(2, 2), &SubgradConfig::default()).unwrap();
        assert!(rep.best_value <= rep.initial_value);
        assert!(x.sub(&a).unwrap().frobenius_norm() < 1e-2);
        assert!(rep.best_trajectory.windows(2).all(|p| p[1] <= p[0]));
    }
}
