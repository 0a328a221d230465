//! Multinomial logistic regression with an optional regularizer.
//!
//! The model has no intercept. `W` is `c × m`, logits are `X Wᵀ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optim::{gradient_descent, FitReport, GdConfig, WolfeParams};
use crate::regularizers::{baseline_reg, coupled_reg_mlr, CoupledFactor, RegularizerKind, RegularizerSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix(Matrix);

impl WeightMatrix {
    pub fn new(w: Matrix) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::InvalidInput("weight matrix has non-finite entries".into()));
        }
        Ok(Self(w))
    }

    pub fn zeros(classes: usize, features: usize) -> Self {
        Self(Matrix::zeros(classes, features))
    }

    pub fn classes(&self) -> usize {
        self.0.rows()
    }

    pub fn features(&self) -> usize {
        self.0.cols()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl AsRef<Matrix> for WeightMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

fn check_shapes(w: &Matrix, x: &Matrix) -> Result<()> {
    if w.cols() != x.cols() {
        return Err(Error::shape(
            "mlr",
            format!("w with {} columns to match x", x.cols()),
            format!("{}x{}", w.rows(), w.cols()),
        ));
    }
    Ok(())
}

/// Row-wise softmax of `logits` in place; returns per-row log-sum-exp.
fn softmax_rows(logits: &mut Matrix) -> Result<Vec<f64>> {
    let mut lse = Vec::with_capacity(logits.rows());
    for i in 0..logits.rows() {
        let row = logits.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numerical(format!("non-finite logits in row {i}")));
        }
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
        lse.push(max + sum.ln());
    }
    Ok(lse)
}

pub fn softmax_probs(w: &WeightMatrix, x: &Matrix) -> Result<Matrix> {
    check_shapes(&w.0, x)?;
    let mut p = x.matmul_t(&w.0)?;
    softmax_rows(&mut p)?;
    Ok(p)
}

/// Mean cross-entropy and its gradient `(1/n)(P − Y)ᵀ X`.
pub fn mlr_loss_and_grad(w: &WeightMatrix, x: &Matrix, y: &Matrix) -> Result<(f64, Matrix)> {
    loss_and_grad(&w.0, x, y)
}

fn loss_and_grad(w: &Matrix, x: &Matrix, y: &Matrix) -> Result<(f64, Matrix)> {
    check_shapes(w, x)?;
    if y.shape() != (x.rows(), w.rows()) {
        return Err(Error::shape(
            "mlr_loss_and_grad",
            format!("y of shape {}x{}", x.rows(), w.rows()),
            format!("{}x{}", y.rows(), y.cols()),
        ));
    }
    let logits = x.matmul_t(w)?;
    let (loss, dlogits) = cross_entropy(&logits, y)?;
    Ok((loss, dlogits.t_matmul(x)?))
}

/// Mean cross-entropy of softmax(`logits`) against one-hot `y`, and its
/// gradient `(P − Y) / n` with respect to the logits.
pub(crate) fn cross_entropy(logits: &Matrix, y: &Matrix) -> Result<(f64, Matrix)> {
    let n = logits.rows();
    if n == 0 {
        return Err(Error::InvalidInput("cross-entropy needs at least one sample".into()));
    }
    let mut p = logits.clone();
    let lse = softmax_rows(&mut p)?;
    let mut loss = 0.0;
    for i in 0..n {
        let fit: f64 = logits.row(i).iter().zip(y.row(i)).map(|(z, t)| z * t).sum();
        loss += lse[i] - fit;
    }
    let scale = 1.0 / n as f64;
    let mut resid = p.sub(y)?;
    resid.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
    Ok((loss * scale, resid))
}

/// Index of the largest entry of each row, lowest index on ties.
pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

pub fn predict(w: &WeightMatrix, x: &Matrix) -> Result<Vec<usize>> {
    check_shapes(&w.0, x)?;
    Ok(argmax_rows(&x.matmul_t(&w.0)?))
}

/// Fraction of positions where `pred` and `truth` agree.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "accuracy: length mismatch");
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / pred.len() as f64
}

/// How the coupled regularizer is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoupledBackend {
    /// Thin SVD of `X` once, then a quadrature per evaluation.
    #[default]
    Factored,
    /// Dense SVD of `[X, X Wᵀ]` per evaluation.
    Dense,
}

/// `G(W) = L(W) + λ R(W)` on a fixed training set.
#[derive(Debug, Clone)]
pub struct MlrObjective<'a> {
    x: &'a Matrix,
    y: &'a Matrix,
    reg: RegularizerSpec,
    factor: Option<CoupledFactor>,
}

impl<'a> MlrObjective<'a> {
    pub fn new(x: &'a Matrix, y: &'a Matrix, reg: RegularizerSpec) -> Result<Self> {
        Self::with_backend(x, y, reg, CoupledBackend::default())
    }

    pub fn with_backend(x: &'a Matrix, y: &'a Matrix, reg: RegularizerSpec, backend: CoupledBackend) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::InvalidInput("objective needs at least one sample".into()));
        }
        if y.rows() != x.rows() {
            return Err(Error::shape(
                "MlrObjective::new",
                format!("{} label rows", x.rows()),
                format!("{}", y.rows()),
            ));
        }
        if y.cols() < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 classes, got {}", y.cols())));
        }
        for i in 0..y.rows() {
            let row = y.row(i);
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(Error::InvalidInput(format!("label row {i} is not one-hot")));
            }
        }
        if !x.is_finite() {
            return Err(Error::InvalidInput("design matrix has non-finite entries".into()));
        }
        let factor = match (reg.kind, backend) {
            (RegularizerKind::Coupled, CoupledBackend::Factored) if reg.effective_lambda() > 0.0 => {
                Some(CoupledFactor::new(x)?)
            }
            _ => None,
        };
        Ok(Self { x, y, reg, factor })
    }

    pub fn x(&self) -> &Matrix {
        self.x
    }

    pub fn y(&self) -> &Matrix {
        self.y
    }

    pub fn reg(&self) -> RegularizerSpec {
        self.reg
    }

    pub fn classes(&self) -> usize {
        self.y.cols()
    }

    pub fn features(&self) -> usize {
        self.x.cols()
    }

    pub fn value_and_grad(&self, w: &Matrix) -> Result<(f64, Matrix)> {
        let (loss, mut grad) = loss_and_grad(w, self.x, self.y)?;
        let lambda = self.reg.effective_lambda();
        if lambda == 0.0 {
            return Ok((loss, grad));
        }
        let (r, rg) = match (self.reg.kind, &self.factor) {
            (RegularizerKind::Coupled, Some(f)) => f.mlr_value_and_grad(w)?,
            (RegularizerKind::Coupled, None) => coupled_reg_mlr(self.x, w)?,
            _ => baseline_reg(w, &self.reg)?,
        };
        grad.axpy(lambda, &rg)?;
        Ok((loss + lambda * r, grad))
    }
}

pub fn objective_value_and_grad(w: &WeightMatrix, obj: &MlrObjective<'_>) -> Result<(f64, Matrix)> {
    obj.value_and_grad(&w.0)
}

/// Fits `W` by gradient descent from `cfg.w0` (zero when absent).
pub fn fit(obj: &MlrObjective<'_>, cfg: &GdConfig, wolfe: &WolfeParams) -> Result<(WeightMatrix, FitReport)> {
    let w0 = match &cfg.w0 {
        Some(w) => {
            if w.as_matrix().shape() != (obj.classes(), obj.features()) {
                return Err(Error::shape(
                    "mlr::fit",
                    format!("w0 of shape {}x{}", obj.classes(), obj.features()),
                    format!("{}x{}", w.classes(), w.features()),
                ));
            }
            w.as_matrix().clone()
        }
        None => Matrix::zeros(obj.classes(), obj.features()),
    };
    let (w, report) = gradient_descent(|w| obj.value_and_grad(w), w0, cfg, wolfe)?;
    Ok((WeightMatrix(w), report))
}
