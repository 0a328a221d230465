//! Coupled-tensor-norm regularization for classification.
//!
//! The regularizer `‖[X, f(X)]‖_*` couples the design matrix with the
//! features a model produces for it. [`mlr`] fits multinomial logistic
//! regression with it by gradient descent and a strong Wolfe line search;
//! [`dnn`] trains a small ReLU network with a quadratic-penalty splitting.

pub mod dataio;
pub mod dnn;
pub mod error;
pub mod linalg;
pub mod mlr;
pub mod optim;
pub mod regularizers;

pub use dataio::{Dataset, SplitSpec};
pub use dnn::{MlpParams, PenaltyState};
pub use error::{Error, Result};
pub use linalg::{DenseTensor, Matrix, ThinSvd};
pub use mlr::{MlrObjective, WeightMatrix};
pub use regularizers::{ConcatSubgradient, RegularizerKind, RegularizerSpec};
