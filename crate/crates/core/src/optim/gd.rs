use log::warn;
use serde::{Deserialize, Serialize};

use super::wolfe::{wolfe_linesearch, WolfeParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mlr::WeightMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    /// Stop when `‖Wᵏ⁺¹ − Wᵏ‖_F` falls to this.
    pub step_tol: f64,
    /// Stop when `‖∇G(Wᵏ)‖_F` falls to this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Starting point; zero when absent.
    pub w0: Option<WeightMatrix>,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            step_tol: 1e-4,
            grad_tol: 1e-4,
            max_iters: 2000,
            w0: None,
        }
    }
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_tol > 0.0 && self.grad_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidInput(
                "gradient descent needs positive tolerances and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    StepTol,
    GradTol,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// `G(W⁰), G(W¹), …`
    pub objective_trajectory: Vec<f64>,
    pub final_grad_norm: f64,
    /// Line searches that ended with sufficient decrease only.
    pub line_search_warnings: usize,
}

/// Steepest descent `Wᵏ⁺¹ = Wᵏ − αₖ ∇G(Wᵏ)` with a strong Wolfe step.
///
/// The first trial step is `alpha_init`; later ones reuse the last decrease,
/// `α₀ = 2.02 (Gᵏ − Gᵏ⁻¹) / ‖∇G(Wᵏ)‖²`.
pub fn gradient_descent(
    mut objective: impl FnMut(&Matrix) -> Result<(f64, Matrix)>,
    w0: Matrix,
    cfg: &GdConfig,
    wolfe: &WolfeParams,
) -> Result<(Matrix, FitReport)> {
    cfg.validate()?;
    wolfe.validate()?;
    let mut w = w0;
    let (mut f, mut g) = objective(&w)?;
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::Numerical("objective is not finite at the starting point".into()));
    }
    let mut trajectory = vec![f];
    let mut warnings = 0;
    let mut prev_decrease: Option<f64> = None;
    let mut gnorm = g.frobenius_norm();

    for k in 0..cfg.max_iters {
        if gnorm <= cfg.grad_tol {
            return Ok((w, report(StopReason::GradTol, k, trajectory, gnorm, warnings)));
        }
        let slope0 = -gnorm * gnorm;
        let alpha0 = match prev_decrease {
            Some(df) if df > 0.0 => (2.02 * df / -slope0).clamp(1e-10, 1e10),
            _ => wolfe.alpha_init,
        };
        let params = WolfeParams {
            alpha_init: alpha0,
            ..*wolfe
        };

        // the gradient at the accepted step is reused for the next iteration
        let mut evaluated: Vec<(f64, f64, Matrix)> = Vec::new();
        let search = wolfe_linesearch(
            |alpha| {
                let mut trial = w.clone();
                trial.axpy(-alpha, &g)?;
                let (ft, gt) = objective(&trial)?;
                let slope = -gt.dot(&g)?;
                evaluated.push((alpha, ft, gt));
                Ok((ft, slope))
            },
            f,
            slope0,
            &params,
        )
        .map_err(|e| match e {
            Error::LineSearch { reason, .. } => Error::LineSearch { iteration: k, reason },
            other => other,
        })?;
        if let Some(msg) = &search.warning {
            warnings += 1;
            warn!("iteration {k}: line search accepted a sufficient-decrease step only ({msg})");
        }
        let (_, f_new, g_new) = evaluated
            .into_iter()
            .rev()
            .find(|(a, _, _)| *a == search.step)
            .expect("accepted step was evaluated");

        w.axpy(-search.step, &g)?;
        let step_norm = search.step * gnorm;
        prev_decrease = Some(f - f_new);
        f = f_new;
        g = g_new;
        gnorm = g.frobenius_norm();
        trajectory.push(f);
        if step_norm <= cfg.step_tol {
            return Ok((w, report(StopReason::StepTol, k + 1, trajectory, gnorm, warnings)));
        }
    }
    let reason = if gnorm <= cfg.grad_tol {
        StopReason::GradTol
    } else {
        StopReason::MaxIters
    };
    Ok((w, report(reason, cfg.max_iters, trajectory, gnorm, warnings)))
}

fn report(stop_reason: StopReason, iterations: usize, trajectory: Vec<f64>, gnorm: f64, warnings: usize) -> FitReport {
    FitReport {
        stop_reason,
        iterations,
        objective_trajectory: trajectory,
        final_grad_norm: gnorm,
        line_search_warnings: warnings,
    }
}
