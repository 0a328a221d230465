//! Quadratic-penalty splitting of the coupled regularizer for networks.
//!
//! ```text
//! ℒ(θ, ξ) = L(θ) + λ ‖[X, ξ]‖_* + (μ/2) ‖f_θ(X) − ξ‖_F²
//! ```
//!
//! minimized by alternating SGD epochs on `θ` with a subgradient solve in `ξ`.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::mlp::{forward_cached, mlp_backward, mlp_forward, MlpParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mlr::{argmax_rows, cross_entropy};
use crate::optim::{sgd_momentum, subgradient_descent, SgdConfig, SgdReport, StepDecay, StepRule, SubgradConfig, SubgradReport};
use crate::regularizers::{baseline_reg, concat_value_and_subgrad, ConcatSubgradient, CoupledFactor, RegularizerKind, RegularizerSpec};

/// Offset between the initialization seed and the shuffling seed.
const SHUFFLE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyState {
    pub theta: MlpParams,
    pub xi: Matrix,
    pub lambda: f64,
    pub mu: f64,
    pub outer_iter: usize,
    pub objective_history: Vec<f64>,
}

impl PenaltyState {
    /// `ξ⁰ = 0`.
    pub fn new(theta: MlpParams, n: usize, lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "penalty method needs lambda > 0 and mu > 0, got {lambda} and {mu}"
            )));
        }
        let c = *theta.sizes().last().unwrap();
        Ok(Self {
            theta,
            xi: Matrix::zeros(n, c),
            lambda,
            mu,
            outer_iter: 0,
            objective_history: Vec::new(),
        })
    }

    fn check(&self, x: &Matrix, y: &Matrix) -> Result<()> {
        let c = *self.theta.sizes().last().unwrap();
        if self.xi.shape() != (x.rows(), c) || y.shape() != (x.rows(), c) {
            return Err(Error::InvalidInput(format!(
                "xi is {}x{}, labels {}x{}, expected {}x{c}",
                self.xi.rows(),
                self.xi.cols(),
                y.rows(),
                y.cols(),
                x.rows()
            )));
        }
        Ok(())
    }
}

/// Evaluates `g(ξ) = ‖[X, ξ]‖_*`, through the factored route when `X` has
/// full row rank.
#[derive(Debug, Clone)]
pub struct CoupledTerm<'a> {
    x: &'a Matrix,
    factor: Option<CoupledFactor>,
}

impl<'a> CoupledTerm<'a> {
    pub fn new(x: &'a Matrix) -> Result<Self> {
        let factor = if x.rows() <= x.cols() {
            Some(CoupledFactor::new(x)?).filter(|f| f.has_full_row_rank())
        } else {
            None
        };
        Ok(Self { x, factor })
    }

    pub fn dense(x: &'a Matrix) -> Self {
        Self { x, factor: None }
    }

    pub fn eval(&self, xi: &Matrix) -> Result<ConcatSubgradient> {
        match &self.factor {
            Some(f) => f.concat_value_and_subgrad(xi),
            None => concat_value_and_subgrad(self.x, xi),
        }
    }
}

fn half_sq_dist(a: &Matrix, b: &Matrix) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(0.5 * d.dot(&d)?)
}

/// `L(θ) + λ ‖[X, ξ]‖_* + (μ/2) ‖f_θ(X) − ξ‖_F²` with a dense SVD.
pub fn penalty_objective(state: &PenaltyState, x: &Matrix, y: &Matrix) -> Result<f64> {
    state.check(x, y)?;
    penalty_value(state, x, y, &CoupledTerm::dense(x))
}

fn penalty_value(state: &PenaltyState, x: &Matrix, y: &Matrix, term: &CoupledTerm<'_>) -> Result<f64> {
    let f = mlp_forward(&state.theta, x)?;
    let (loss, _) = cross_entropy(&f, y)?;
    Ok(loss + state.lambda * term.eval(&state.xi)?.value + state.mu * half_sq_dist(&f, &state.xi)?)
}

/// `L(θ) + (μ/2) ‖f_θ(X) − ξ‖_F²`.
pub fn theta_objective(theta: &MlpParams, x: &Matrix, y: &Matrix, xi: &Matrix, mu: f64) -> Result<f64> {
    let f = mlp_forward(theta, x)?;
    Ok(cross_entropy(&f, y)?.0 + mu * half_sq_dist(&f, xi)?)
}

/// Full-batch gradient of [`theta_objective`] with respect to the flattened
/// parameters.
pub fn theta_objective_grad(theta: &MlpParams, x: &Matrix, y: &Matrix, xi: &Matrix, mu: f64) -> Result<(f64, Vec<f64>)> {
    let all: Vec<usize> = (0..x.rows()).collect();
    let mut g = vec![0.0; theta.num_params()];
    let v = batch_grad(theta, x, y, Some((xi, mu)), &all, &mut g)?;
    Ok((v, g))
}

/// Unbiased minibatch estimate of `L(θ) + (μ/2)‖f_θ(X) − ξ‖²` and its
/// gradient. The penalty is a sum over samples, so its batch share is
/// scaled by `n / |B|`.
fn batch_grad(
    theta: &MlpParams,
    x: &Matrix,
    y: &Matrix,
    penalty: Option<(&Matrix, f64)>,
    batch: &[usize],
    out: &mut [f64],
) -> Result<f64> {
    let xb = x.select_rows(batch);
    let yb = y.select_rows(batch);
    let (f, cache) = forward_cached(theta, &xb)?;
    let (mut loss, mut dlogits) = cross_entropy(&f, &yb)?;
    if let Some((xi, mu)) = penalty {
        if mu > 0.0 {
            let scale = x.rows() as f64 / batch.len() as f64;
            let d = f.sub(&xi.select_rows(batch))?;
            loss += scale * 0.5 * mu * d.dot(&d)?;
            dlogits.axpy(scale * mu, &d)?;
        }
    }
    mlp_backward(theta, &cache, &dlogits, out)?;
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaStepInfo {
    pub before: f64,
    pub after: f64,
    pub retries: usize,
    /// The objective still rose by more than the tolerance after all retries.
    pub violation: bool,
}

/// Runs `cfg.epochs` SGD epochs on `L(θ) + (μ/2)‖f_θ(X) − ξ‖²` from
/// `state.theta`. If the full-batch objective rises by more than `eps_mono`
/// the epochs are rerun with half the learning rate, up to `max_retries`
/// times, after which the last attempt is kept and the violation logged.
/// Momentum starts from zero on every call.
pub fn theta_step(
    state: &PenaltyState,
    x: &Matrix,
    y: &Matrix,
    cfg: &SgdConfig,
    first_epoch: usize,
    eps_mono: f64,
    max_retries: usize,
) -> Result<(MlpParams, ThetaStepInfo)> {
    state.check(x, y)?;
    let before = theta_objective(&state.theta, x, y, &state.xi, state.mu)?;
    let mut retries = 0;
    loop {
        let attempt = SgdConfig {
            schedule: cfg.schedule.scaled(0.5f64.powi(retries as i32)),
            ..*cfg
        };
        let theta = sgd_on(&state.theta, x, y, Some((&state.xi, state.mu)), &attempt, first_epoch)?.0;
        let after = theta_objective(&theta, x, y, &state.xi, state.mu)?;
        let ok = after <= before + eps_mono;
        if ok || retries == max_retries {
            if !ok {
                warn!("theta step raised the objective from {before} to {after} after {retries} retries");
            }
            return Ok((
                theta,
                ThetaStepInfo {
                    before,
                    after,
                    retries,
                    violation: !ok,
                },
            ));
        }
        retries += 1;
    }
}

fn sgd_on(
    theta0: &MlpParams,
    x: &Matrix,
    y: &Matrix,
    penalty: Option<(&Matrix, f64)>,
    cfg: &SgdConfig,
    first_epoch: usize,
) -> Result<(MlpParams, SgdReport)> {
    let mut theta = theta0.clone();
    let mut flat = theta.to_flat();
    let mut scratch = theta.clone();
    let report = sgd_momentum(
        &mut flat,
        x.rows(),
        |p, batch, g| {
            scratch.set_flat(p)?;
            batch_grad(&scratch, x, y, penalty, batch, g)
        },
        cfg,
        first_epoch,
    )?;
    theta.set_flat(&flat)?;
    if !theta.is_finite() {
        return Err(Error::Numerical("network parameters became non-finite".into()));
    }
    Ok((theta, report))
}

/// `λ ‖[X, ξ]‖_* + (μ/2) ‖f − ξ‖²` and a subgradient.
fn xi_objective(term: &CoupledTerm<'_>, f: &Matrix, xi: &Matrix, lambda: f64, mu: f64) -> Result<(f64, Matrix)> {
    let c = term.eval(xi)?;
    let d = xi.sub(f)?;
    let mut g = d.scaled(mu);
    g.axpy(lambda, &c.subgrad)?;
    Ok((lambda * c.value + 0.5 * mu * d.dot(&d)?, g))
}

/// The ξ-subproblem with `f = f_θ(X)` fixed, by the subgradient method
/// warm-started at `state.xi` with steps `1 / (μ k)`.
///
/// `f` itself is kept when it scores better than the subgradient iterates.
pub fn xi_step(state: &PenaltyState, x: &Matrix, cfg: &SubgradConfig) -> Result<(Matrix, SubgradReport)> {
    let f = mlp_forward(&state.theta, x)?;
    xi_step_with(&CoupledTerm::new(x)?, &f, state, cfg)
}

fn xi_step_with(term: &CoupledTerm<'_>, f: &Matrix, state: &PenaltyState, cfg: &SubgradConfig) -> Result<(Matrix, SubgradReport)> {
    if state.xi.shape() != f.shape() {
        return Err(Error::InvalidInput("xi does not match the network output".into()));
    }
    let (lambda, mu) = (state.lambda, state.mu);
    if lambda == 0.0 {
        let v0 = mu * half_sq_dist(f, &state.xi)?;
        return Ok((
            f.clone(),
            SubgradReport {
                iterations: 0,
                initial_value: v0,
                best_value: 0.0,
                best_iteration: 0,
                best_trajectory: vec![v0, 0.0],
                final_subgrad_norm: 0.0,
                converged: true,
            },
        ));
    }
    let (xi, mut report) = subgradient_descent(|xi| xi_objective(term, f, xi, lambda, mu), state.xi.clone(), cfg)?;
    let (at_f, _) = xi_objective(term, f, f, lambda, mu)?;
    if at_f < report.best_value {
        report.best_value = at_f;
        return Ok((f.clone(), report));
    }
    Ok((xi, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltMinConfig {
    pub lambda: f64,
    pub mu: f64,
    pub hidden: Vec<usize>,
    pub outer_iters: usize,
    /// Defaults to `10⁻³ √(n c)`.
    pub outer_tol: Option<f64>,
    /// SGD epochs per θ update.
    pub epochs_per_step: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_retries: usize,
    /// The ξ solve stops once `‖∂h(ξ)‖_F < μ · xi_tol`, i.e. on the
    /// subgradient of `h / μ`.
    pub xi_tol: f64,
    pub xi_max_iters: usize,
    pub seed: u64,
}

impl Default for AltMinConfig {
    fn default() -> Self {
        Self {
            lambda: 5e-4,
            mu: 5e-3,
            hidden: vec![256],
            outer_iters: 25,
            outer_tol: None,
            epochs_per_step: 2,
            lr: 0.01,
            momentum: 0.9,
            batch_size: 128,
            max_retries: 3,
            xi_tol: 1e-2,
            xi_max_iters: 50,
            seed: 0,
        }
    }
}

impl AltMinConfig {
    pub fn sizes(&self, m: usize, c: usize) -> Vec<usize> {
        let mut s = vec![m];
        s.extend_from_slice(&self.hidden);
        s.push(c);
        s
    }

    fn sgd(&self) -> SgdConfig {
        SgdConfig {
            schedule: StepDecay::halfway(self.lr, self.outer_iters * self.epochs_per_step),
            momentum: self.momentum,
            batch_size: self.batch_size,
            epochs: self.epochs_per_step,
            seed: self.seed.wrapping_add(SHUFFLE_SEED_OFFSET),
        }
    }

    fn xi_cfg(&self) -> SubgradConfig {
        SubgradConfig {
            step_rule: StepRule::Harmonic { scale: 1.0 / self.mu },
            grad_tol: self.xi_tol * self.mu,
            max_iters: self.xi_max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub objective: f64,
    pub xi_change: f64,
    /// `ℒᵏ − ℒᵏ⁺¹ − (μ/2)‖ξᵏ − ξᵏ⁺¹‖²`; at least `−ε_mono` when the descent
    /// inequality holds.
    pub descent_margin: f64,
    pub theta: ThetaStepInfo,
    pub xi_iterations: usize,
    /// Fraction of the way from `ξᵏ` to the subproblem solution that was taken.
    pub xi_damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltMinReport {
    pub initial_objective: f64,
    pub eps_mono: f64,
    pub outer_tol: f64,
    pub converged: bool,
    pub records: Vec<OuterRecord>,
    pub theta_violations: usize,
}

impl AltMinReport {
    pub fn descent_holds(&self) -> bool {
        self.records.iter().all(|r| r.descent_margin >= -self.eps_mono)
    }
}

/// Algorithm 1: from He-initialized `θ⁰` and `ξ⁰ = 0`, alternate
/// [`theta_step`] and a damped [`xi_step`] until `‖ξᵏ − ξᵏ⁺¹‖_F` reaches the
/// outer tolerance or the outer budget runs out.
///
/// The ξ update moves `t ∈ [½, 1]` of the way to the subproblem iterate `ξ̂`,
/// with `t = min(1, ½ + (h(ξᵏ) − h(ξ̂)) / (μ ‖ξ̂ − ξᵏ‖²))`. Strong convexity of
/// `h` then gives `h(ξᵏ) − h(ξᵏ⁺¹) ≥ (μ/2)‖ξᵏ − ξᵏ⁺¹‖²` even when `ξ̂` is
/// inexact.
pub fn alternating_minimize(x: &Matrix, y: &Matrix, cfg: &AltMinConfig) -> Result<(MlpParams, PenaltyState, AltMinReport)> {
    let (n, m, c) = (x.rows(), x.cols(), y.cols());
    if y.rows() != n || n == 0 {
        return Err(Error::InvalidInput("labels and design matrix disagree on sample count".into()));
    }
    let theta0 = MlpParams::init(&cfg.sizes(m, c), cfg.seed)?;
    let mut state = PenaltyState::new(theta0, n, cfg.lambda, cfg.mu)?;
    let term = CoupledTerm::new(x)?;
    let outer_tol = cfg.outer_tol.unwrap_or(1e-3 * ((n * c) as f64).sqrt());
    let sgd = cfg.sgd();
    let xi_cfg = cfg.xi_cfg();

    let l0 = penalty_value(&state, x, y, &term)?;
    let eps_mono = 1e-6 * (1.0 + l0.abs());
    state.objective_history.push(l0);
    let mut records = Vec::new();
    let mut converged = false;
    let mut violations = 0;

    for k in 0..cfg.outer_iters {
        let (theta, info) = theta_step(&state, x, y, &sgd, k * cfg.epochs_per_step, eps_mono, cfg.max_retries)?;
        violations += usize::from(info.violation);
        state.theta = theta;

        let f = mlp_forward(&state.theta, x)?;
        let (xi_hat, xi_rep) = xi_step_with(&term, &f, &state, &xi_cfg)?;
        let (h_old, _) = xi_objective(&term, &f, &state.xi, cfg.lambda, cfg.mu)?;
        let (h_hat, _) = xi_objective(&term, &f, &xi_hat, cfg.lambda, cfg.mu)?;
        let dir = xi_hat.sub(&state.xi)?;
        let dist2 = dir.dot(&dir)?;
        let t = if dist2 > 0.0 {
            (0.5 + (h_old - h_hat).max(0.0) / (cfg.mu * dist2)).min(1.0)
        } else {
            1.0
        };
        let mut xi_new = state.xi.clone();
        xi_new.axpy(t, &dir)?;
        let change = t * dist2.sqrt();

        let prev = *state.objective_history.last().unwrap();
        state.xi = xi_new;
        state.outer_iter = k + 1;
        let obj = penalty_value(&state, x, y, &term)?;
        state.objective_history.push(obj);
        let margin = prev - obj - 0.5 * cfg.mu * change * change;
        debug!("outer {k}: objective {obj:.6e}, xi change {change:.3e}, damping {t:.3}");
        records.push(OuterRecord {
            objective: obj,
            xi_change: change,
            descent_margin: margin,
            theta: info,
            xi_iterations: xi_rep.iterations,
            xi_damping: t,
        });
        if change <= outer_tol {
            converged = true;
            break;
        }
    }
    let report = AltMinReport {
        initial_objective: l0,
        eps_mono,
        outer_tol,
        converged,
        records,
        theta_violations: violations,
    };
    Ok((state.theta.clone(), state, report))
}

/// SGD training of the network on `L(θ) + λ Σ_l R(W_l)` for a baseline
/// regularizer `R` applied to every weight matrix (biases are not penalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdTrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub reg: RegularizerSpec,
    pub seed: u64,
}

impl Default for SgdTrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256],
            epochs: 50,
            lr: 0.01,
            momentum: 0.9,
            batch_size: 128,
            reg: RegularizerSpec::none(),
            seed: 0,
        }
    }
}

impl SgdTrainConfig {
    /// The plain-SGD counterpart of an alternating-minimization run: same
    /// network, initialization, shuffling, schedule and epoch count.
    pub fn matching(alt: &AltMinConfig) -> Self {
        Self {
            hidden: alt.hidden.clone(),
            epochs: alt.outer_iters * alt.epochs_per_step,
            lr: alt.lr,
            momentum: alt.momentum,
            batch_size: alt.batch_size,
            reg: RegularizerSpec::none(),
            seed: alt.seed,
        }
    }
}

pub fn train_sgd(x: &Matrix, y: &Matrix, cfg: &SgdTrainConfig) -> Result<(MlpParams, SgdReport)> {
    if cfg.reg.kind == RegularizerKind::Coupled {
        return Err(Error::InvalidKind("coupled"));
    }
    let mut sizes = vec![x.cols()];
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(y.cols());
    let theta0 = MlpParams::init(&sizes, cfg.seed)?;
    let sgd = SgdConfig {
        schedule: StepDecay::halfway(cfg.lr, cfg.epochs),
        momentum: cfg.momentum,
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        seed: cfg.seed.wrapping_add(SHUFFLE_SEED_OFFSET),
    };
    let lambda = cfg.reg.effective_lambda();
    if lambda == 0.0 {
        return sgd_on(&theta0, x, y, None, &sgd, 0);
    }
    let mut scratch = theta0.clone();
    let mut flat = theta0.to_flat();
    let report = sgd_momentum(
        &mut flat,
        x.rows(),
        |p, batch, g| {
            scratch.set_flat(p)?;
            let mut loss = batch_grad(&scratch, x, y, None, batch, g)?;
            let mut off = 0;
            for l in scratch.layers() {
                let (v, sg) = baseline_reg(&l.weights, &cfg.reg)?;
                loss += lambda * v;
                for (gi, s) in g[off..].iter_mut().zip(sg.as_slice()) {
                    *gi += lambda * s;
                }
                off += l.weights.as_slice().len() + l.bias.len();
            }
            Ok(loss)
        },
        &sgd,
        0,
    )?;
    let mut theta = theta0;
    theta.set_flat(&flat)?;
    Ok((theta, report))
}

pub fn mlp_predict(theta: &MlpParams, x: &Matrix) -> Result<Vec<usize>> {
    Ok(argmax_rows(&mlp_forward(theta, x)?))
}
