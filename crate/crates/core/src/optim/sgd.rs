use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning rate `base` before epoch `decay_at`, `base · factor` from then on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDecay {
    pub base: f64,
    pub decay_at: usize,
    pub factor: f64,
}

impl StepDecay {
    /// Drops the rate tenfold halfway through `total_epochs`.
    pub fn halfway(base: f64, total_epochs: usize) -> Self {
        Self {
            base,
            decay_at: total_epochs / 2,
            factor: 0.1,
        }
    }

    pub fn constant(base: f64) -> Self {
        Self {
            base,
            decay_at: usize::MAX,
            factor: 1.0,
        }
    }

    pub fn rate(&self, epoch: usize) -> f64 {
        if epoch < self.decay_at {
            self.base
        } else {
            self.base * self.factor
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base * s,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub schedule: StepDecay,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl SgdConfig {
    pub fn new(epochs: usize, seed: u64) -> Self {
        Self {
            schedule: StepDecay::halfway(0.01, epochs),
            momentum: 0.9,
            batch_size: 128,
            epochs,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdReport {
    /// Mean minibatch loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Minibatch SGD with classical momentum, `v ← m v − η g`, `p ← p + v`.
///
/// `grad(params, batch, out)` writes the minibatch gradient into `out` and
/// returns the minibatch loss. Epochs are numbered from `first_epoch` for the
/// schedule and for shuffling, so a run split into several calls shuffles
/// exactly like one long run. Velocity starts at zero on every call.
pub fn sgd_momentum(
    params: &mut [f64],
    n_samples: usize,
    mut grad: impl FnMut(&[f64], &[usize], &mut [f64]) -> Result<f64>,
    cfg: &SgdConfig,
    first_epoch: usize,
) -> Result<SgdReport> {
    if n_samples == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("sgd needs samples and a positive batch size".into()));
    }
    let mut velocity = vec![0.0; params.len()];
    let mut g = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..n_samples).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in first_epoch..first_epoch + cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);
        let lr = cfg.schedule.rate(epoch);
        let mut total = 0.0;
        let mut batches = 0;
        for batch in order.chunks(cfg.batch_size) {
            g.iter_mut().for_each(|v| *v = 0.0);
            let loss = grad(params, batch, &mut g)?;
            if !loss.is_finite() || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite minibatch gradient in epoch {epoch}")));
            }
            for ((p, v), gi) in params.iter_mut().zip(velocity.iter_mut()).zip(&g) {
                *v = cfg.momentum * *v - lr * gi;
                *p += *v;
            }
            total += loss;
            batches += 1;
        }
        losses.push(total / batches as f64);
    }
    Ok(SgdReport { epoch_losses: losses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_batch_without_momentum_is_gradient_descent() {
        let target = [1.0, -2.0, 0.5];
        let mut p = vec![0.0; 3];
        let cfg = SgdConfig {
            schedule: StepDecay::constant(0.1),
            momentum: 0.0,
            batch_size: 10,
            epochs: 3,
            seed: 1,
        };
        sgd_momentum(
            &mut p,
            4,
            |p, _, g| {
                for i in 0..3 {
                    g[i] = p[i] - target[i];
                }
                Ok(0.0)
            },
            &cfg,
            0,
        )
        .unwrap();
        let mut q = [0.0f64; 3];
        for _ in 0..3 {
            for i in 0..3 {
                q[i] -= 0.1 * (q[i] - target[i]);
            }
        }
        assert_eq!(p, q.to_vec());
    }

    #[test]
    fn schedule_drops_at_half() {
        let s = StepDecay::halfway(0.01, 100);
        assert_eq!(s.rate(49), 0.01);
        assert!((s.rate(50) - 0.001).abs() < 1e-18);
    }

    #[test]
    fn same_seed_same_batches() {
        let run = || {
            let mut seen = Vec::new();
            let mut p = vec![0.0];
            sgd_momentum(
                &mut p,
                10,
                |_, b, _| {
                    seen.push(b.to_vec());
                    Ok(0.0)
                },
                &SgdConfig {
                    batch_size: 3,
                    ..SgdConfig::new(2, 7)
                },
                0,
            )
            .unwrap();
            seen
        };
        assert_eq!(run(), run());
    }
}
