//! Regularizer values and (sub)gradients.
//!
//! The coupled regularizer ties the design matrix `X` to the model output
//! `f(X)` through `‖[X, f(X)]‖_*`. For multinomial logistic regression the
//! output is `X Wᵀ` and the regularizer is differentiable with gradient
//! `V₂ S V₁ᵀ`, where `[X, X Wᵀ] = U S Vᵀ` and `V = [V₁; V₂]` is split after
//! the first `m` rows.

mod factored;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use factored::{CoupledFactor, Quadrature};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, thin_svd, Matrix, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularizerKind {
    None,
    L1,
    L2,
    Tikhonov,
    Coupled,
}

impl RegularizerKind {
    pub const ALL: [RegularizerKind; 5] = [
        RegularizerKind::None,
        RegularizerKind::L1,
        RegularizerKind::L2,
        RegularizerKind::Tikhonov,
        RegularizerKind::Coupled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegularizerKind::None => "none",
            RegularizerKind::L1 => "l1",
            RegularizerKind::L2 => "l2",
            RegularizerKind::Tikhonov => "tikhonov",
            RegularizerKind::Coupled => "coupled",
        }
    }
}

impl fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(RegularizerKind::None),
            "l1" => Ok(RegularizerKind::L1),
            "l2" => Ok(RegularizerKind::L2),
            "tikhonov" | "tik" => Ok(RegularizerKind::Tikhonov),
            "coupled" => Ok(RegularizerKind::Coupled),
            other => Err(Error::InvalidInput(format!("unknown regularizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub lambda: f64,
}

impl RegularizerSpec {
    pub fn new(kind: RegularizerKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "regularization weight must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }

    pub fn none() -> Self {
        Self {
            kind: RegularizerKind::None,
            lambda: 0.0,
        }
    }

    /// The weight actually applied: zero for `none`.
    pub fn effective_lambda(&self) -> f64 {
        match self.kind {
            RegularizerKind::None => 0.0,
            _ => self.lambda,
        }
    }
}

/// Value of `g(ξ) = ‖[X, ξ]‖_*` and the subgradient `U V₂ᵀ` (with `Z = 0`).
#[derive(Debug, Clone)]
pub struct ConcatSubgradient {
    pub value: f64,
    pub subgrad: Matrix,
}

pub fn concat_value_and_subgrad(x: &Matrix, xi: &Matrix) -> Result<ConcatSubgradient> {
    if x.rows() != xi.rows() {
        return Err(Error::InvalidInput(format!(
            "concatenation needs equal row counts, got {} and {}",
            x.rows(),
            xi.rows()
        )));
    }
    let m = x.cols();
    let svd = thin_svd(&x.hcat(xi)?, DEFAULT_RANK_TOL)?;
    let v2 = svd.v.row_range(m, m + xi.cols());
    Ok(ConcatSubgradient {
        value: svd.nuclear_norm(),
        subgrad: svd.u.matmul_t(&v2)?,
    })
}

/// `R(W) = ‖[X, X Wᵀ]‖_*` and `∇R(W) = V₂ S V₁ᵀ`, computed from a dense SVD
/// of the materialized concatenation.
pub fn coupled_reg_mlr(x: &Matrix, w: &Matrix) -> Result<(f64, Matrix)> {
    if w.cols() != x.cols() {
        return Err(Error::shape(
            "coupled_reg_mlr",
            format!("w with {} columns", x.cols()),
            format!("{}x{}", w.rows(), w.cols()),
        ));
    }
    let m = x.cols();
    let c = w.rows();
    let features = x.matmul_t(w)?;
    let svd = thin_svd(&x.hcat(&features)?, DEFAULT_RANK_TOL)?;
    let v1 = svd.v.row_range(0, m);
    let v2 = svd.v.row_range(m, m + c);
    let grad = v2.scale_columns(&svd.singulars).matmul_t(&v1)?;
    Ok((svd.nuclear_norm(), grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    /// `λ_max(XᵀX) / σ_min(E)`, `E = (W Xᵀ, Ŵ Xᵀ)`.
    pub bound: f64,
    /// `‖∇R(W) − ∇R(Ŵ)‖_F / ‖W − Ŵ‖_F`.
    pub observed: f64,
}

/// Relative threshold below which `σ_min(E)` counts as zero.
const SIGMA_MIN_TOL: f64 = 1e-10;

pub fn estimate_lipschitz(x: &Matrix, w: &Matrix, w_hat: &Matrix) -> Result<LipschitzEstimate> {
    w.check_same_shape(w_hat, "estimate_lipschitz")?;
    let dist = w.sub(w_hat)?.frobenius_norm();
    if dist == 0.0 {
        return Err(Error::InvalidInput("estimate_lipschitz needs w != w_hat".into()));
    }
    let e = w.matmul_t(x)?.hcat(&w_hat.matmul_t(x)?)?;
    let sv = singular_values(&e)?;
    let (smax, smin) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
    if smax == 0.0 || smin <= SIGMA_MIN_TOL * smax {
        return Err(Error::Degenerate(format!(
            "sigma_min(E) = {smin:e} vanishes, the Lipschitz bound does not apply"
        )));
    }
    let lam_max = singular_values(x)?.first().map_or(0.0, |s| s * s);
    let (_, g) = coupled_reg_mlr(x, w)?;
    let (_, g_hat) = coupled_reg_mlr(x, w_hat)?;
    Ok(LipschitzEstimate {
        bound: lam_max / smin,
        observed: g.sub(&g_hat)?.frobenius_norm() / dist,
    })
}

/// Baseline penalties: `l1 = Σ|wᵢⱼ|`, `l2 = ‖W‖_F`, `tikhonov = ½‖W‖_F²`.
/// Returns the unweighted value and a subgradient.
pub fn baseline_reg(w: &Matrix, spec: &RegularizerSpec) -> Result<(f64, Matrix)> {
    match spec.kind {
        RegularizerKind::None => Ok((0.0, Matrix::zeros(w.rows(), w.cols()))),
        RegularizerKind::L1 => {
            let value = w.as_slice().iter().map(|v| v.abs()).sum();
            Ok((value, w.map(sign)))
        }
        RegularizerKind::L2 => {
            let norm = w.frobenius_norm();
            if norm == 0.0 {
                Ok((0.0, Matrix::zeros(w.rows(), w.cols())))
            } else {
                Ok((norm, w.scaled(1.0 / norm)))
            }
        }
        RegularizerKind::Tikhonov => {
            let norm = w.frobenius_norm();
            Ok((0.5 * norm * norm, w.clone()))
        }
        RegularizerKind::Coupled => Err(Error::InvalidKind("coupled")),
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
