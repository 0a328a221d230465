//! A small ReLU network trained with the quadratic-penalty splitting.

mod checkpoint;
mod mlp;
mod penalty;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest, LayerFiles};
pub use mlp::{forward_cached, mlp_backward, mlp_forward, ForwardCache, Layer, MlpParams};
pub use penalty::{
    alternating_minimize, mlp_predict, penalty_objective, theta_objective, theta_objective_grad, theta_step,
    train_sgd, xi_step, AltMinConfig, AltMinReport, CoupledTerm, OuterRecord, PenaltyState, SgdTrainConfig,
    ThetaStepInfo,
};
