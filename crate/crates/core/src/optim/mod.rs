//! First-order solvers.

mod gd;
mod sgd;
mod subgradient;
mod wolfe;

pub use gd::{gradient_descent, FitReport, GdConfig, StopReason};
pub use sgd::{sgd_momentum, SgdConfig, SgdReport, StepDecay};
pub use subgradient::{subgradient_descent, StepRule, SubgradConfig, SubgradReport};
pub use wolfe::{wolfe_linesearch, LineSearchResult, WolfeParams};
